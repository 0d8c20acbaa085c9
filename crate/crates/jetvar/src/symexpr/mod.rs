//! Exact symbolic expressions over jet coordinates.
//!
//! An [`Expr`] is an immutable tree over base variables `xi^i`, jet
//! variables `psi^a_N`, rational constants, opaque function atoms (named
//! functions of the base coordinates carrying a formal derivative
//! multi-index), and the elementary functions sin, cos, exp, ln.
//!
//! Equality is decided by [`Expr::canonicalize`], which expands to a
//! sum-of-products normal form with exact rational coefficients. This is
//! complete for the polynomial fragment in the atoms; no transcendental
//! rewriting is attempted (`sin^2 + cos^2` stays a two-term sum).

mod canon;
mod parse;

pub use parse::{parse_expr, ParseError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use thiserror::Error;

use crate::multiindex::MultiIndex;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("jet space needs at least one coordinate and one field")]
    Empty,
    #[error("identifier `{0}` declared more than once")]
    DuplicateIdentifier(String),
    #[error("identifier `{0}` is reserved")]
    ReservedIdentifier(String),
    #[error("{0}")]
    InvalidComponent(String),
}

/// The chart data of an r-th order jet space: base coordinate names,
/// field names, and the advisory maximal jet order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetSpace {
    coords: Vec<String>,
    fields: Vec<String>,
    max_order: usize,
}

pub const RESERVED_NAMES: [&str; 4] = ["sin", "cos", "exp", "ln"];

impl JetSpace {
    pub fn new(
        coords: Vec<String>,
        fields: Vec<String>,
        max_order: usize,
    ) -> Result<Arc<JetSpace>, SpaceError> {
        if coords.is_empty() || fields.is_empty() {
            return Err(SpaceError::Empty);
        }
        let mut seen = BTreeSet::new();
        for name in coords.iter().chain(fields.iter()) {
            if RESERVED_NAMES.contains(&name.as_str()) {
                return Err(SpaceError::ReservedIdentifier(name.clone()));
            }
            if !seen.insert(name.clone()) {
                return Err(SpaceError::DuplicateIdentifier(name.clone()));
            }
        }
        Ok(Arc::new(JetSpace {
            coords,
            fields,
            max_order,
        }))
    }

    /// Base dimension p.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Number of fields q.
    pub fn num_fields(&self) -> usize {
        self.fields.len()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn coord_name(&self, axis: usize) -> &str {
        &self.coords[axis]
    }

    pub fn field_name(&self, field: usize) -> &str {
        &self.fields[field]
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }
}

/// A named function of the base coordinates with a formal derivative
/// multi-index. Stands in for unspecified section or variation components.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpaqueAtom {
    pub name: String,
    pub deriv: MultiIndex,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Num(Rational),
    /// Base coordinate `xi^i` (0-based axis).
    Base(usize),
    /// Jet coordinate `psi^a_N` (0-based field index).
    Jet(usize, MultiIndex),
    Opaque(OpaqueAtom),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Func(Func, Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Num(Rational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Num(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::Num(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn base(axis: usize) -> Expr {
        Expr::Base(axis)
    }

    pub fn jet(field: usize, counts: &[u32]) -> Expr {
        Expr::Jet(field, MultiIndex::new(counts.to_vec()))
    }

    pub fn opaque(name: &str, counts: &[u32]) -> Expr {
        Expr::Opaque(OpaqueAtom {
            name: name.to_string(),
            deriv: MultiIndex::new(counts.to_vec()),
        })
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        Expr::Func(f, Box::new(arg))
    }

    pub fn pow(self, exp: i32) -> Expr {
        Expr::Pow(Box::new(self), exp)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }

    /// Expanded sum-of-products normal form with sorted atoms; idempotent.
    pub fn canonicalize(&self) -> Expr {
        canon::Poly::from_expr(self).into_expr()
    }

    /// Exact equality, decided by canonicalization.
    pub fn eq_exact(&self, other: &Expr) -> bool {
        canon::Poly::from_expr(self) == canon::Poly::from_expr(other)
    }

    /// Exact partial derivative with respect to base coordinate `xi^axis`,
    /// treating every jet variable as an independent coordinate. Opaque
    /// atoms bump their formal derivative index.
    pub fn partial_base(&self, axis: usize) -> Expr {
        self.derive(&|leaf| match leaf {
            Expr::Base(i) if *i == axis => Expr::one(),
            Expr::Opaque(at) => Expr::Opaque(OpaqueAtom {
                name: at.name.clone(),
                deriv: at.deriv.incremented(axis),
            }),
            _ => Expr::zero(),
        })
    }

    /// Exact partial derivative with respect to the jet coordinate
    /// `psi^field_N`.
    pub fn partial_jet(&self, field: usize, index: &MultiIndex) -> Expr {
        self.derive(&|leaf| match leaf {
            Expr::Jet(a, n) if *a == field && n == index => Expr::one(),
            _ => Expr::zero(),
        })
    }

    /// Generic derivation: `leaf_rule` fixes the action on Num/Base/Jet/
    /// Opaque leaves, the structural rules (linearity, Leibniz, chain rule)
    /// are shared.
    pub(crate) fn derive(&self, leaf_rule: &dyn Fn(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Num(_) => Expr::zero(),
            Expr::Base(_) | Expr::Jet(_, _) | Expr::Opaque(_) => leaf_rule(self),
            Expr::Add(terms) => Expr::Add(terms.iter().map(|t| t.derive(leaf_rule)).collect()),
            Expr::Mul(factors) => {
                let mut out = Vec::with_capacity(factors.len());
                for (i, f) in factors.iter().enumerate() {
                    let df = f.derive(leaf_rule);
                    if df.is_zero() {
                        continue;
                    }
                    let mut prod = Vec::with_capacity(factors.len());
                    for (j, g) in factors.iter().enumerate() {
                        prod.push(if i == j { df.clone() } else { g.clone() });
                    }
                    out.push(Expr::Mul(prod));
                }
                Expr::Add(out)
            }
            Expr::Pow(base, k) => {
                if *k == 0 {
                    return Expr::zero();
                }
                let db = base.derive(leaf_rule);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::Mul(vec![
                    Expr::int(*k as i64),
                    Expr::Pow(base.clone(), k - 1),
                    db,
                ])
            }
            Expr::Func(f, arg) => {
                let da = arg.derive(leaf_rule);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => Expr::func(Func::Cos, (**arg).clone()),
                    Func::Cos => Expr::Neg(Box::new(Expr::func(Func::Sin, (**arg).clone()))),
                    Func::Exp => Expr::func(Func::Exp, (**arg).clone()),
                    Func::Ln => Expr::Pow(arg.clone(), -1),
                };
                Expr::Mul(vec![outer, da])
            }
            Expr::Neg(inner) => Expr::Neg(Box::new(inner.derive(leaf_rule))),
        }
    }

    /// All jet variables appearing in the expression.
    pub fn jet_vars(&self) -> BTreeSet<(usize, MultiIndex)> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Jet(a, n) = e {
                out.insert((*a, n.clone()));
            }
        });
        out
    }

    /// Highest `|N|` among jet variables; 0 if none appear.
    pub fn jet_order(&self) -> u32 {
        let mut max = 0;
        self.visit(&mut |e| {
            if let Expr::Jet(_, n) = e {
                max = max.max(n.order());
            }
        });
        max
    }

    pub fn contains_jet(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Jet(_, _)) {
                found = true;
            }
        });
        found
    }

    pub fn contains_opaque(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Opaque(_)) {
                found = true;
            }
        });
        found
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.visit(f)),
            Expr::Pow(b, _) => b.visit(f),
            Expr::Func(_, a) => a.visit(f),
            Expr::Neg(x) => x.visit(f),
            _ => {}
        }
    }

    /// Double-precision evaluation at a numeric point.
    pub fn eval_numeric(&self, pt: &NumericPoint) -> Result<f64, EvalError> {
        match self {
            Expr::Num(r) => r
                .to_f64()
                .ok_or_else(|| EvalError::DomainError("rational out of f64 range".into())),
            Expr::Base(i) => pt
                .base
                .get(*i)
                .copied()
                .ok_or_else(|| EvalError::MissingAssignment(format!("base axis {i}"))),
            Expr::Jet(a, n) => pt
                .jets
                .get(&(*a, n.clone()))
                .copied()
                .ok_or_else(|| EvalError::MissingAssignment(format!("jet ({a}, {n})"))),
            Expr::Opaque(at) => Err(EvalError::OpaqueAtomPresent(at.name.clone())),
            Expr::Add(terms) => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.eval_numeric(pt)?;
                }
                Ok(acc)
            }
            Expr::Mul(factors) => {
                let mut acc = 1.0;
                for t in factors {
                    acc *= t.eval_numeric(pt)?;
                }
                Ok(acc)
            }
            Expr::Pow(base, k) => {
                let b = base.eval_numeric(pt)?;
                if *k < 0 && b == 0.0 {
                    return Err(EvalError::DomainError("zero raised to negative power".into()));
                }
                Ok(b.powi(*k))
            }
            Expr::Func(f, arg) => {
                let a = arg.eval_numeric(pt)?;
                match f {
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Exp => Ok(a.exp()),
                    Func::Ln => {
                        if a <= 0.0 {
                            Err(EvalError::DomainError(format!("ln of non-positive value {a}")))
                        } else {
                            Ok(a.ln())
                        }
                    }
                }
            }
            Expr::Neg(x) => Ok(-x.eval_numeric(pt)?),
        }
    }

    pub(crate) fn rational_value(&self) -> Option<&Rational> {
        match self {
            Expr::Num(r) => Some(r),
            _ => None,
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, Expr::Neg(Box::new(rhs))])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

// Rendering needs coordinate names; `Display` falls back to generic
// `x1..xp`, `u1..uq` names. The `render` module does the real work.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::render::expr_text_generic(self))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("missing assignment for {0}")]
    MissingAssignment(String),
    #[error("opaque atom `{0}` has no numeric value")]
    OpaqueAtomPresent(String),
    #[error("domain error: {0}")]
    DomainError(String),
}

/// Double-precision values for each base coordinate and each jet
/// coordinate needed by the expression under evaluation.
#[derive(Debug, Clone, Default)]
pub struct NumericPoint {
    pub base: Vec<f64>,
    pub jets: BTreeMap<(usize, MultiIndex), f64>,
}

impl NumericPoint {
    pub fn new(base: Vec<f64>) -> Self {
        NumericPoint {
            base,
            jets: BTreeMap::new(),
        }
    }

    pub fn set_jet(&mut self, field: usize, index: MultiIndex, value: f64) {
        self.jets.insert((field, index), value);
    }
}

/// A symbolic section `upsilon: Z -> Y`: one expression per field, each in
/// the base coordinates only (closed form) or an opaque atom.
#[derive(Debug, Clone)]
pub struct SectionSym {
    pub space: Arc<JetSpace>,
    components: Vec<Expr>,
}

impl SectionSym {
    /// Closed-form components; jet variables are rejected.
    pub fn closed(space: Arc<JetSpace>, components: Vec<Expr>) -> Result<Self, SpaceError> {
        assert_eq!(components.len(), space.num_fields());
        for c in &components {
            if c.contains_jet() {
                return Err(SpaceError::InvalidComponent(
                    "section component may not reference jet variables".into(),
                ));
            }
        }
        Ok(SectionSym { space, components })
    }

    /// Fully opaque section with one named atom per field.
    pub fn opaque(space: Arc<JetSpace>, names: &[&str]) -> Self {
        assert_eq!(names.len(), space.num_fields());
        let p = space.dim();
        let components = names
            .iter()
            .map(|n| Expr::Opaque(OpaqueAtom {
                name: n.to_string(),
                deriv: MultiIndex::zero(p),
            }))
            .collect();
        SectionSym { space, components }
    }

    pub fn component(&self, field: usize) -> &Expr {
        &self.components[field]
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn is_closed_form(&self) -> bool {
        self.components.iter().all(|c| !c.contains_opaque())
    }

    /// The formal `N`-th base derivative of component `field`.
    pub fn derivative(&self, field: usize, index: &MultiIndex) -> Expr {
        let mut e = self.components[field].clone();
        for (axis, &count) in index.counts().iter().enumerate() {
            for _ in 0..count {
                e = e.partial_base(axis);
            }
        }
        e
    }
}

/// An order-0 vertical field on Y: components in the base coordinates and
/// the order-0 jet variables only.
#[derive(Debug, Clone)]
pub struct VerticalFieldSym {
    pub space: Arc<JetSpace>,
    components: Vec<Expr>,
}

impl VerticalFieldSym {
    pub fn new(space: Arc<JetSpace>, components: Vec<Expr>) -> Result<Self, SpaceError> {
        assert_eq!(components.len(), space.num_fields());
        for c in &components {
            if c.jet_order() > 0 {
                return Err(SpaceError::InvalidComponent(
                    "vertical field component must be order 0".into(),
                ));
            }
        }
        Ok(VerticalFieldSym { space, components })
    }

    pub fn component(&self, field: usize) -> &Expr {
        &self.components[field]
    }
}

/// Pull-back of a function along the prolonged section: every `psi^a_N` is
/// replaced by the `N`-th formal base derivative of `upsilon^a`. The result
/// depends on the base coordinates (and opaque atoms) only.
pub fn subst_jets(f: &Expr, section: &SectionSym) -> Expr {
    let mut memo: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
    subst_rec(f, section, &mut memo)
}

fn subst_rec(
    f: &Expr,
    section: &SectionSym,
    memo: &mut BTreeMap<(usize, MultiIndex), Expr>,
) -> Expr {
    match f {
        Expr::Jet(a, n) => memo
            .entry((*a, n.clone()))
            .or_insert_with(|| section.derivative(*a, n))
            .clone(),
        Expr::Num(_) | Expr::Base(_) | Expr::Opaque(_) => f.clone(),
        Expr::Add(xs) => Expr::Add(xs.iter().map(|x| subst_rec(x, section, memo)).collect()),
        Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| subst_rec(x, section, memo)).collect()),
        Expr::Pow(b, k) => Expr::Pow(Box::new(subst_rec(b, section, memo)), *k),
        Expr::Func(func, a) => Expr::Func(*func, Box::new(subst_rec(a, section, memo))),
        Expr::Neg(x) => Expr::Neg(Box::new(subst_rec(x, section, memo))),
    }
}
