//! The variational layer: prolongation of vertical fields, the first
//! variation, the constructive decomposition of the fibre differential of
//! a Lagrangian into an Euler-Lagrange part and a total-differential part,
//! and the Green (boundary) operator.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::jetops::{
    prolong_base_variation, total_derivative_expr, total_derivative_expr_iterated,
};
use crate::multiindex::MultiIndex;
use crate::symexpr::{Expr, SectionSym, VerticalFieldSym};
use crate::vforms::{VForm, VFormError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VarcalcError {
    #[error(transparent)]
    Form(#[from] VFormError),
    #[error("decomposition identity check failed (internal inconsistency)")]
    IdentityCheckFailed,
}

/// Axis-selection rule for the integration-by-parts loop. Every strategy
/// yields the same Euler-Lagrange part; the boundary parts differ by a
/// d_t-closed term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Smallest axis with a positive count.
    #[default]
    MinAxis,
    /// Largest axis with a positive count.
    MaxAxis,
}

impl Strategy {
    fn pick(&self, index: &MultiIndex) -> usize {
        let counts = index.counts();
        match self {
            Strategy::MinAxis => counts.iter().position(|&c| c > 0).expect("|N| > 0"),
            Strategy::MaxAxis => {
                counts.len() - 1 - counts.iter().rev().position(|&c| c > 0).expect("|N| > 0")
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::MinAxis => "min-axis",
            Strategy::MaxAxis => "max-axis",
        }
    }
}

/// Coefficient family `{V^a_N = D_N(v^a)}` of the prolongation of a
/// vertical field to the order-r jet space.
#[derive(Debug, Clone)]
pub struct ProlongedField {
    pub order: usize,
    coeffs: BTreeMap<(usize, MultiIndex), Expr>,
}

impl ProlongedField {
    pub fn coeff(&self, field: usize, index: &MultiIndex) -> Option<&Expr> {
        self.coeffs.get(&(field, index.clone()))
    }

    pub fn coeffs(&self) -> &BTreeMap<(usize, MultiIndex), Expr> {
        &self.coeffs
    }
}

/// Prolongation of an order-0 vertical field: `V^a_N = D_N(v^a)` for all
/// `|N| <= order`.
pub fn prolong_vertical(v: &VerticalFieldSym, order: usize) -> ProlongedField {
    let p = v.space.dim();
    let mut coeffs = BTreeMap::new();
    for a in 0..v.space.num_fields() {
        for n in MultiIndex::enumerate(p, order as u32) {
            coeffs.insert(
                (a, n.clone()),
                total_derivative_expr_iterated(v.component(a), &n),
            );
        }
    }
    ProlongedField { order, coeffs }
}

/// Drop all coefficients of order above `order`.
pub fn prolong_truncate(field: &ProlongedField, order: usize) -> ProlongedField {
    assert!(order <= field.order, "truncation cannot raise the order");
    ProlongedField {
        order,
        coeffs: field
            .coeffs
            .iter()
            .filter(|((_, n), _)| n.order() as usize <= order)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    }
}

/// The pair of the decomposition `lift(d_pi lambda) = epsilon + d_t kappa`,
/// with the strategy that produced the boundary part.
#[derive(Debug, Clone)]
pub struct DecompResult {
    pub epsilon: VForm,
    pub kappa: VForm,
    pub strategy: Strategy,
}

/// Constructive integration by parts. Starting from
/// `d_pi lambda = sum c_{aN} dpsi^a_N (x) vol`, every term of positive
/// order sheds one derivative at a time: the reduced covector goes to the
/// boundary part with `vol` contracted along the chosen axis, and the
/// coefficient picks up a total derivative with flipped sign. The
/// decomposition identity is checked exactly before returning.
pub fn decompose(lagrangian: &VForm, strategy: Strategy) -> Result<DecompResult, VarcalcError> {
    let space = lagrangian.space().clone();
    let p = space.dim();
    if !lagrangian.is_lagrangian() {
        return Err(VFormError::NotLagrangian {
            p,
            d: lagrangian.horiz_degree(),
            l: lagrangian.contact_degree(),
        }
        .into());
    }
    let r = lagrangian.measured_coeff_order();
    let dpl = lagrangian.d_pi();
    let vol: Vec<usize> = (0..p).collect();

    // Worklist keyed by (field, N); highest order processed first.
    let mut work: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
    for (k, c) in dpl.terms() {
        debug_assert_eq!(k.dpsi.len(), 1);
        let (a, n) = k.dpsi[0].clone();
        work.insert((a, n), c.clone());
    }

    let two_r = 2 * r;
    let mut epsilon = VForm::zero(space.clone(), p, 1, two_r, 0);
    let mut kappa = VForm::zero(
        space.clone(),
        p.saturating_sub(1),
        1,
        two_r.saturating_sub(1),
        r.saturating_sub(1),
    );

    while let Some(entry) = work.keys().next().cloned() {
        let (a, n) = entry;
        let coeff = work.remove(&(a, n.clone())).expect("key just found");
        if n.is_zero() {
            epsilon.add_term(&vol, &[(a, n)], coeff);
            continue;
        }
        let axis = strategy.pick(&n);
        let reduced = n.shift(axis, -1).expect("picked axis has nu > 0");
        // kappa piece: coefficient on dpsi^a_{N-1_i} (x) (d_i _| vol).
        let horiz: Vec<usize> = (0..p).filter(|&i| i != axis).collect();
        let sign = if axis % 2 == 0 { 1 } else { -1 };
        let piece = if sign < 0 {
            Expr::Neg(Box::new(coeff.clone()))
        } else {
            coeff.clone()
        };
        kappa.add_term(&horiz, &[(a, reduced.clone())], piece);
        // Remaining bulk term: -D_i(coeff) on the reduced covector.
        let bulk = Expr::Neg(Box::new(total_derivative_expr(&coeff, axis))).canonicalize();
        if !bulk.is_zero() {
            use std::collections::btree_map::Entry;
            match work.entry((a, reduced)) {
                Entry::Vacant(v) => {
                    v.insert(bulk);
                }
                Entry::Occupied(mut o) => {
                    let merged = (o.get().clone() + bulk).canonicalize();
                    if merged.is_zero() {
                        o.remove();
                    } else {
                        *o.get_mut() = merged;
                    }
                }
            }
        }
    }

    // The invariant the construction promises: check it, do not trust it.
    let lhs = dpl
        .order_lift(two_r, dpl.contact_order())
        .map_err(VarcalcError::Form)?;
    let rhs = epsilon.add(&kappa.d_t());
    let lhs = lhs
        .order_lift(
            lhs.coeff_order().max(rhs.coeff_order()),
            lhs.contact_order().max(rhs.contact_order()),
        )
        .map_err(VarcalcError::Form)?;
    if !lhs.eq_exact(&rhs) {
        return Err(VarcalcError::IdentityCheckFailed);
    }

    Ok(DecompResult {
        epsilon,
        kappa,
        strategy,
    })
}

/// Euler-Lagrange form by the direct formula
/// `sum_a [ sum_N (-1)^|N| D_N (dL/dpsi^a_N) ] dpsi^a (x) vol`.
pub fn euler_lagrange(lagrangian: &VForm) -> Result<VForm, VarcalcError> {
    let space = lagrangian.space().clone();
    let p = space.dim();
    if !lagrangian.is_lagrangian() {
        return Err(VFormError::NotLagrangian {
            p,
            d: lagrangian.horiz_degree(),
            l: lagrangian.contact_degree(),
        }
        .into());
    }
    let r = lagrangian.measured_coeff_order();
    let vol: Vec<usize> = (0..p).collect();
    let density = lagrangian
        .terms()
        .values()
        .next()
        .cloned()
        .unwrap_or_else(Expr::zero);
    let mut out = VForm::zero(space.clone(), p, 1, 2 * r, 0);
    for a in 0..space.num_fields() {
        let mut acc = Expr::zero();
        for n in MultiIndex::enumerate(p, r as u32) {
            let partial = density.partial_jet(a, &n);
            if partial.is_zero() {
                continue;
            }
            let transported = total_derivative_expr_iterated(&partial, &n);
            let term = if n.order() % 2 == 0 {
                transported
            } else {
                Expr::Neg(Box::new(transported))
            };
            acc = acc + term;
        }
        let zero_index = MultiIndex::zero(p);
        out.add_term(&vol, &[(a, zero_index)], acc);
    }
    Ok(out)
}

/// The integrand of the Frechet derivative of the Action: the prolonged
/// variation contracted with the pulled-back fibre differential of the
/// Lagrangian.
pub fn first_variation(
    lagrangian: &VForm,
    upsilon: &SectionSym,
    y: &SectionSym,
) -> Result<VForm, VarcalcError> {
    let p = lagrangian.space().dim();
    if !lagrangian.is_lagrangian() {
        return Err(VFormError::NotLagrangian {
            p,
            d: lagrangian.horiz_degree(),
            l: lagrangian.contact_degree(),
        }
        .into());
    }
    let dpl = lagrangian.d_pi();
    let pulled = dpl.pull_back_section(upsilon);
    let coeffs = prolong_base_variation(y, pulled.measured_contact_order());
    Ok(pulled.contract(&coeffs)?)
}

/// Boundary momentum form: the order-(r-1) prolonged variation contracted
/// with the pulled-back boundary part.
pub fn green_operator(
    kappa: &VForm,
    upsilon: &SectionSym,
    y: &SectionSym,
) -> Result<VForm, VarcalcError> {
    let pulled = kappa.pull_back_section(upsilon);
    let coeffs = prolong_base_variation(y, pulled.measured_contact_order());
    Ok(pulled.contract(&coeffs)?)
}

/// Residual of the nonlinear Green formula:
/// `first_variation - <y, pulled-back epsilon> - d(green_operator)`.
/// Identically zero when every operator upstream is consistent.
pub fn green_identity_residual(
    lagrangian: &VForm,
    upsilon: &SectionSym,
    y: &SectionSym,
) -> Result<VForm, VarcalcError> {
    let fv = first_variation(lagrangian, upsilon, y)?;
    let el = euler_lagrange(lagrangian)?;
    let el_pulled = el.pull_back_section(upsilon);
    let y0 = prolong_base_variation(y, 0);
    let el_term = el_pulled.contract(&y0)?;
    let decomp = decompose(lagrangian, Strategy::default())?;
    let green = green_operator(&decomp.kappa, upsilon, y)?;
    let boundary = green.base_exterior_d()?;
    Ok(fv.sub(&el_term).sub(&boundary))
}

#[cfg(test)]
mod tests;
