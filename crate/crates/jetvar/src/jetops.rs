//! The differential operators on jet spaces: total derivatives `D_i` and
//! `D_N`, the fibre differential `d_pi`, the total differential `d_t`, the
//! order-reducing derivations `iota^i`, the Euler-Lagrange operator `E`,
//! and the Lie derivative of a semi-basic form along a vertical variation.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::BigInt;

use crate::multiindex::MultiIndex;
use crate::symexpr::{Expr, JetSpace, Rational, SectionSym};
use crate::vforms::{VForm, VFormError};

/// Reading of the order-reducing derivation `iota^i` on contact covectors.
///
/// `Literal` is the stated rule `iota^i dpsi^a_N = dpsi^a_{N-1_i}`;
/// `Weighted` multiplies by the component `nu_i`, the reading under which
/// the operator `E` reproduces the Euler-Lagrange form (the default used
/// by `operator_e` callers).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IotaMode {
    Literal,
    Weighted,
}

/// Total derivative `D_i = d/dxi^i + psi^a_{N+1_i} d/dpsi^a_N` on
/// expressions. Jet order grows as needed; the space's max_order is
/// advisory.
pub fn total_derivative_expr(f: &Expr, axis: usize) -> Expr {
    f.derive(&|leaf| match leaf {
        Expr::Base(i) if *i == axis => Expr::one(),
        Expr::Base(_) => Expr::zero(),
        Expr::Jet(a, n) => Expr::Jet(*a, n.incremented(axis)),
        Expr::Opaque(at) => Expr::Opaque(crate::symexpr::OpaqueAtom {
            name: at.name.clone(),
            deriv: at.deriv.incremented(axis),
        }),
        _ => Expr::zero(),
    })
}

/// Iterated total derivative `D_N`; the axis order is immaterial because
/// the `D_i` commute.
pub fn total_derivative_expr_iterated(f: &Expr, index: &MultiIndex) -> Expr {
    let mut out = f.clone();
    for (axis, &count) in index.counts().iter().enumerate() {
        for _ in 0..count {
            out = total_derivative_expr(&out, axis);
        }
    }
    out
}

impl VForm {
    /// `D_i` extended to fibre forms as a derivation: acts on coefficients
    /// by the expression rule and on contact covectors by
    /// `dpsi^a_N -> dpsi^a_{N+1_i}`; horizontal covectors are annihilated.
    pub fn total_derivative(&self, axis: usize) -> VForm {
        let mut out = VForm::zero(
            self.space().clone(),
            self.horiz_degree(),
            self.contact_degree(),
            self.coeff_order() + 1,
            self.contact_order() + 1,
        );
        for (k, c) in self.terms() {
            let dc = total_derivative_expr(c, axis);
            if !dc.is_zero() {
                out.add_term(&k.dx, &k.dpsi, dc);
            }
            for j in 0..k.dpsi.len() {
                let mut dpsi = k.dpsi.clone();
                dpsi[j].1 = dpsi[j].1.incremented(axis);
                out.add_term(&k.dx, &dpsi, c.clone());
            }
        }
        out
    }

    pub fn total_derivative_iterated(&self, index: &MultiIndex) -> VForm {
        let mut out = self.clone();
        for (axis, &count) in index.counts().iter().enumerate() {
            for _ in 0..count {
                out = out.total_derivative(axis);
            }
        }
        out
    }

    /// Fibre differential: raises the contact degree by one. Basis
    /// covectors are `d_pi`-closed, so only coefficients contribute.
    pub fn d_pi(&self) -> VForm {
        let r = self.contact_order().max(self.measured_coeff_order());
        let mut out = VForm::zero(
            self.space().clone(),
            self.horiz_degree(),
            self.contact_degree() + 1,
            self.coeff_order(),
            r,
        );
        for (k, c) in self.terms() {
            for (a, n) in c.jet_vars() {
                let dc = c.partial_jet(a, &n);
                if dc.is_zero() {
                    continue;
                }
                let mut dpsi = Vec::with_capacity(k.dpsi.len() + 1);
                dpsi.push((a, n));
                dpsi.extend_from_slice(&k.dpsi);
                out.add_term(&k.dx, &dpsi, dc);
            }
        }
        out
    }

    /// Total differential `d_t = sum_i dxi^i ^ D_i`: horizontal degree and
    /// both orders rise by one. At top horizontal degree the result is the
    /// zero form.
    pub fn d_t(&self) -> VForm {
        let p = self.space().dim();
        let mut out = VForm::zero(
            self.space().clone(),
            (self.horiz_degree() + 1).min(p),
            self.contact_degree(),
            self.coeff_order() + 1,
            self.contact_order() + 1,
        );
        if self.horiz_degree() == p {
            return out;
        }
        for axis in 0..p {
            let di = self.total_derivative(axis);
            for (k, c) in di.terms() {
                let mut dx = Vec::with_capacity(k.dx.len() + 1);
                dx.push(axis);
                dx.extend_from_slice(&k.dx);
                out.add_term(&dx, &k.dpsi, c.clone());
            }
        }
        out
    }

    /// Order-reducing derivation of degree 0 over the contact wedge;
    /// trivial on coefficients and horizontal covectors.
    pub fn iota(&self, axis: usize, mode: IotaMode) -> VForm {
        let mut out = VForm::zero(
            self.space().clone(),
            self.horiz_degree(),
            self.contact_degree(),
            self.coeff_order(),
            self.contact_order(),
        );
        for (k, c) in self.terms() {
            for j in 0..k.dpsi.len() {
                let nu = k.dpsi[j].1.get(axis);
                if nu == 0 {
                    continue;
                }
                let mut dpsi = k.dpsi.clone();
                dpsi[j].1 = dpsi[j].1.shift(axis, -1).expect("nu > 0");
                let coeff = match mode {
                    IotaMode::Literal => c.clone(),
                    IotaMode::Weighted => Expr::int(nu as i64) * c.clone(),
                };
                out.add_term(&k.dx, &dpsi, coeff);
            }
        }
        out
    }

    pub fn iota_iterated(&self, index: &MultiIndex, mode: IotaMode) -> VForm {
        let mut out = self.clone();
        for (axis, &count) in index.counts().iter().enumerate() {
            for _ in 0..count {
                if out.is_zero() {
                    return out;
                }
                out = out.iota(axis, mode);
            }
        }
        out
    }
}

/// Fibre differential of a function, as a `(0,1)`-form.
pub fn d_pi_expr(space: Arc<JetSpace>, f: &Expr) -> VForm {
    VForm::function(space, f.clone()).d_pi()
}

/// The operator `E = deg . d_pi + sum_{|N|>0} ((-1)^|N| / N!) D_N iota^N d_pi`
/// applied to a Lagrangian. `deg` multiplies by contact degree, and `D_N`
/// is the full derivation on fibre forms. In `Weighted` mode the result is
/// concentrated on contact order 0 and equals the Euler-Lagrange form.
pub fn operator_e(lagrangian: &VForm, mode: IotaMode) -> Result<VForm, VFormError> {
    let p = lagrangian.space().dim();
    if !lagrangian.is_lagrangian() {
        return Err(VFormError::NotLagrangian {
            p,
            d: lagrangian.horiz_degree(),
            l: lagrangian.contact_degree(),
        });
    }
    let dpl = lagrangian.d_pi();
    // deg . d_pi: d_pi of a Lagrangian is homogeneous of contact degree 1.
    let mut acc = dpl.scale(Expr::int(dpl.contact_degree() as i64));
    let r = dpl.measured_contact_order() as u32;
    for index in MultiIndex::enumerate(p, r) {
        if index.order() == 0 {
            continue;
        }
        let reduced = dpl.iota_iterated(&index, mode);
        if reduced.is_zero() {
            continue;
        }
        let transported = reduced.total_derivative_iterated(&index);
        let sign = if index.order() % 2 == 0 { 1 } else { -1 };
        let coeff = Rational::new(
            BigInt::from(sign),
            BigInt::from(index.factorial()),
        );
        acc = acc.add(&transported.scale(Expr::Num(coeff)));
    }
    Ok(acc)
}

/// Prolong a base-only variation `y` to the coefficient family
/// `{D_N y^a = d^N y^a}` for all `|N| <= order`.
pub fn prolong_base_variation(
    y: &SectionSym,
    order: usize,
) -> BTreeMap<(usize, MultiIndex), Expr> {
    let p = y.space.dim();
    let mut out = BTreeMap::new();
    for a in 0..y.space.num_fields() {
        for n in MultiIndex::enumerate(p, order as u32) {
            out.insert((a, n.clone()), y.derivative(a, &n));
        }
    }
    out
}

/// Lie derivative of a semi-basic form along a vertical variation `y`
/// restricted to the section `upsilon`: contract the prolonged variation
/// with the pulled-back fibre differential. The result is an ordinary form
/// on the base.
pub fn lie_derivative_section(
    y: &SectionSym,
    beta: &VForm,
    upsilon: &SectionSym,
) -> Result<VForm, VFormError> {
    assert_eq!(beta.contact_degree(), 0, "beta must be semi-basic");
    let dpb = beta.d_pi();
    let pulled = dpb.pull_back_section(upsilon);
    let coeffs = prolong_base_variation(y, pulled.measured_contact_order());
    pulled.contract(&coeffs)
}
