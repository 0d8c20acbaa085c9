//! Bigraded vector-valued semi-basic differential forms.
//!
//! A [`VForm`] of bidegree `(d, l)` has a horizontal factor spanned by
//! `dxi^I` (strictly increasing `I` of size `d`) and a contact/value factor
//! spanned by wedges of `l` contact covectors `dpsi^a_N`. Coefficients are
//! canonical [`Expr`]s. The two factors antisymmetrize independently with
//! no sign exchange between them (tensor-split convention); the Kolar
//! decomposition bookkeeping depends on exactly this.
//!
//! The order metadata `(coeff_order, contact_order)` may sit above the
//! measured orders; `order_lift` realizes the order projections by raising
//! it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::multiindex::MultiIndex;
use crate::symexpr::{subst_jets, Expr, JetSpace, SectionSym};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VFormError {
    #[error("contraction requires contact degree >= 1")]
    ZeroContactDegree,
    #[error("order lift cannot lower orders: ({from_s},{from_r}) -> ({to_s},{to_r})")]
    OrderLowering {
        from_s: usize,
        from_r: usize,
        to_s: usize,
        to_r: usize,
    },
    #[error("coefficient still references a jet variable: {0}")]
    JetVariablePresent(String),
    #[error("expected a Lagrangian of bidegree ({p},0), found ({d},{l})")]
    NotLagrangian { p: usize, d: usize, l: usize },
}

/// Basis element: horizontal axes `dx` (strictly increasing) and contact
/// covectors `dpsi` (strictly increasing by `(field, N)`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct VKey {
    pub dx: Vec<usize>,
    pub dpsi: Vec<(usize, MultiIndex)>,
}

/// Sort `items`, counting inversions; `None` if a duplicate appears.
fn sort_signed<T: Ord + Clone>(items: &[T]) -> Option<(Vec<T>, i32)> {
    let mut v = items.to_vec();
    let mut sign = 1;
    // Insertion sort; the slices here are tiny.
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((v, sign))
}

#[derive(Debug, Clone)]
pub struct VForm {
    space: Arc<JetSpace>,
    horiz_degree: usize,
    contact_degree: usize,
    coeff_order: usize,
    contact_order: usize,
    terms: BTreeMap<VKey, Expr>,
}

impl VForm {
    pub fn zero(
        space: Arc<JetSpace>,
        horiz_degree: usize,
        contact_degree: usize,
        coeff_order: usize,
        contact_order: usize,
    ) -> VForm {
        VForm {
            space,
            horiz_degree,
            contact_degree,
            coeff_order,
            contact_order,
            terms: BTreeMap::new(),
        }
    }

    /// A `(0,0)`-form: a plain function on the jet space.
    pub fn function(space: Arc<JetSpace>, f: Expr) -> VForm {
        let mut out = VForm::zero(space, 0, 0, f.jet_order() as usize, 0);
        out.add_term(&[], &[], f);
        out
    }

    /// A Lagrangian `(p,0)`-form `L dxi^1 ^ ... ^ dxi^p`.
    pub fn lagrangian(space: Arc<JetSpace>, density: Expr) -> VForm {
        let p = space.dim();
        let dx: Vec<usize> = (0..p).collect();
        let mut out = VForm::zero(space, p, 0, density.jet_order() as usize, 0);
        out.add_term(&dx, &[], density);
        out
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn horiz_degree(&self) -> usize {
        self.horiz_degree
    }

    pub fn contact_degree(&self) -> usize {
        self.contact_degree
    }

    pub fn coeff_order(&self) -> usize {
        self.coeff_order
    }

    pub fn contact_order(&self) -> usize {
        self.contact_order
    }

    pub fn terms(&self) -> &BTreeMap<VKey, Expr> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_lagrangian(&self) -> bool {
        self.horiz_degree == self.space.dim() && self.contact_degree == 0
    }

    /// Highest jet order appearing in any coefficient.
    pub fn measured_coeff_order(&self) -> usize {
        self.terms
            .values()
            .map(|c| c.jet_order() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Highest `|N|` among contact covectors actually present.
    pub fn measured_contact_order(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|k| k.dpsi.iter().map(|(_, n)| n.order() as usize))
            .max()
            .unwrap_or(0)
    }

    /// Insert `coeff` on the (possibly unsorted) basis element, absorbing
    /// antisymmetry into the sign and dropping exact zeros.
    pub fn add_term(&mut self, dx: &[usize], dpsi: &[(usize, MultiIndex)], coeff: Expr) {
        debug_assert_eq!(dx.len(), self.horiz_degree);
        debug_assert_eq!(dpsi.len(), self.contact_degree);
        let Some((dx_sorted, sign_h)) = sort_signed(dx) else {
            return;
        };
        let Some((dpsi_sorted, sign_c)) = sort_signed(dpsi) else {
            return;
        };
        let sign = sign_h * sign_c;
        let signed = if sign < 0 {
            Expr::Neg(Box::new(coeff))
        } else {
            coeff
        };
        let key = VKey {
            dx: dx_sorted,
            dpsi: dpsi_sorted,
        };
        let entry = match self.terms.remove(&key) {
            Some(prev) => (prev + signed).canonicalize(),
            None => signed.canonicalize(),
        };
        if !entry.is_zero() {
            self.terms.insert(key, entry);
        }
    }

    fn assert_same_space(&self, other: &VForm) {
        assert!(
            Arc::ptr_eq(&self.space, &other.space) || self.space == other.space,
            "forms live on different jet spaces"
        );
    }

    /// Sum; bidegrees must agree unless one side is the zero form.
    pub fn add(&self, other: &VForm) -> VForm {
        self.assert_same_space(other);
        if self.is_zero() {
            let mut out = other.clone();
            out.coeff_order = out.coeff_order.max(self.coeff_order);
            out.contact_order = out.contact_order.max(self.contact_order);
            return out;
        }
        if other.is_zero() {
            let mut out = self.clone();
            out.coeff_order = out.coeff_order.max(other.coeff_order);
            out.contact_order = out.contact_order.max(other.contact_order);
            return out;
        }
        assert_eq!(self.horiz_degree, other.horiz_degree, "bidegree mismatch");
        assert_eq!(self.contact_degree, other.contact_degree, "bidegree mismatch");
        let mut out = self.clone();
        out.coeff_order = out.coeff_order.max(other.coeff_order);
        out.contact_order = out.contact_order.max(other.contact_order);
        for (k, c) in &other.terms {
            out.add_term(&k.dx, &k.dpsi, c.clone());
        }
        out
    }

    pub fn neg(&self) -> VForm {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = Expr::Neg(Box::new(c.clone())).canonicalize();
        }
        out
    }

    pub fn sub(&self, other: &VForm) -> VForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, factor: Expr) -> VForm {
        let mut out = VForm::zero(
            self.space.clone(),
            self.horiz_degree,
            self.contact_degree,
            self.coeff_order,
            self.contact_order,
        );
        for (k, c) in &self.terms {
            out.add_term(&k.dx, &k.dpsi, factor.clone() * c.clone());
        }
        out
    }

    /// Wedge product. Horizontal and contact factors antisymmetrize
    /// independently; repeated covectors in either factor kill the term.
    pub fn wedge(&self, other: &VForm) -> VForm {
        self.assert_same_space(other);
        let mut out = VForm::zero(
            self.space.clone(),
            self.horiz_degree + other.horiz_degree,
            self.contact_degree + other.contact_degree,
            self.coeff_order.max(other.coeff_order),
            self.contact_order.max(other.contact_order),
        );
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let dx: Vec<usize> = k1.dx.iter().chain(&k2.dx).copied().collect();
                let dpsi: Vec<(usize, MultiIndex)> =
                    k1.dpsi.iter().chain(&k2.dpsi).cloned().collect();
                out.add_term(&dx, &dpsi, c1.clone() * c2.clone());
            }
        }
        out
    }

    /// Interior product in the contact slot with the coefficient family
    /// `{V^a_N}` of a prolonged vertical field; missing coefficients are
    /// zero.
    pub fn contract(
        &self,
        coeffs: &BTreeMap<(usize, MultiIndex), Expr>,
    ) -> Result<VForm, VFormError> {
        if self.contact_degree == 0 {
            return Err(VFormError::ZeroContactDegree);
        }
        let mut out = VForm::zero(
            self.space.clone(),
            self.horiz_degree,
            self.contact_degree - 1,
            self.coeff_order,
            self.contact_order,
        );
        for (k, c) in &self.terms {
            for (j, cov) in k.dpsi.iter().enumerate() {
                let Some(v) = coeffs.get(cov) else {
                    continue;
                };
                if v.is_zero() {
                    continue;
                }
                let mut rest = k.dpsi.clone();
                rest.remove(j);
                let sign = if j % 2 == 0 { 1 } else { -1 };
                let prod = v.clone() * c.clone();
                let signed = if sign < 0 {
                    Expr::Neg(Box::new(prod))
                } else {
                    prod
                };
                out.add_term(&k.dx, &rest, signed);
            }
        }
        out.coeff_order = out.coeff_order.max(out.measured_coeff_order());
        Ok(out)
    }

    /// Raise the order metadata; terms are untouched. Realizes the
    /// order-projection pull-backs in coordinates.
    pub fn order_lift(&self, coeff_order: usize, contact_order: usize) -> Result<VForm, VFormError> {
        if coeff_order < self.coeff_order || contact_order < self.contact_order {
            return Err(VFormError::OrderLowering {
                from_s: self.coeff_order,
                from_r: self.contact_order,
                to_s: coeff_order,
                to_r: contact_order,
            });
        }
        let mut out = self.clone();
        out.coeff_order = coeff_order;
        out.contact_order = contact_order;
        Ok(out)
    }

    /// Pull back along a prolonged section: coefficients undergo jet
    /// substitution, the horizontal part is unchanged, and the contact
    /// slot is retained verbatim as an inert value slot.
    pub fn pull_back_section(&self, section: &SectionSym) -> VForm {
        let mut out = VForm::zero(
            self.space.clone(),
            self.horiz_degree,
            self.contact_degree,
            0,
            self.contact_order,
        );
        for (k, c) in &self.terms {
            out.add_term(&k.dx, &k.dpsi, subst_jets(c, section));
        }
        out
    }

    /// Ordinary exterior differential on the horizontal factor, for forms
    /// whose coefficients no longer reference jet variables (post
    /// pull-back). The contact slot is treated as a constant value slot.
    pub fn base_exterior_d(&self) -> Result<VForm, VFormError> {
        let p = self.space.dim();
        let mut out = VForm::zero(
            self.space.clone(),
            (self.horiz_degree + 1).min(p),
            self.contact_degree,
            0,
            self.contact_order,
        );
        if self.horiz_degree == p {
            return Ok(out);
        }
        for (k, c) in &self.terms {
            if c.contains_jet() {
                return Err(VFormError::JetVariablePresent(format!("{c}")));
            }
            for axis in 0..p {
                let dc = c.partial_base(axis);
                if dc.is_zero() {
                    continue;
                }
                let mut dx = Vec::with_capacity(k.dx.len() + 1);
                dx.push(axis);
                dx.extend_from_slice(&k.dx);
                out.add_term(&dx, &k.dpsi, dc);
            }
        }
        Ok(out)
    }

    /// Exact equality of aligned coefficients after lifting to common
    /// orders. Zero forms compare equal regardless of bidegree.
    pub fn eq_exact(&self, other: &VForm) -> bool {
        self.assert_same_space(other);
        if self.is_zero() && other.is_zero() {
            return true;
        }
        if self.horiz_degree != other.horiz_degree
            || self.contact_degree != other.contact_degree
        {
            return false;
        }
        if self.terms.len() != other.terms.len() {
            return false;
        }
        self.terms.iter().zip(&other.terms).all(|((k1, c1), (k2, c2))| {
            k1 == k2 && (c1.clone() - c2.clone()).canonicalize().is_zero()
        })
    }
}

impl fmt::Display for VForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::render::vform_text(self))
    }
}

#[cfg(test)]
mod tests;
