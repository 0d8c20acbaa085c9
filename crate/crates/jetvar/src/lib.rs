//! Symbolic variational calculus for higher-order field theories on jet
//! bundles: total and fibre differentials, the constructive decomposition
//! of the first variation into an Euler-Lagrange part and a boundary part,
//! and numeric verification of the integration-by-parts identity on a
//! periodic box.

pub mod jetops;
pub mod multiindex;
pub mod numcheck;
pub mod problem;
pub mod render;
pub mod symexpr;
pub mod varcalc;
pub mod vforms;

#[cfg(test)]
pub(crate) mod testsupport;

pub use multiindex::{MultiIndex, MultiIndexError};
pub use symexpr::{
    parse_expr, subst_jets, EvalError, Expr, Func, JetSpace, NumericPoint, ParseError, Rational,
    SectionSym, VerticalFieldSym,
};
pub use vforms::{VForm, VFormError, VKey};
