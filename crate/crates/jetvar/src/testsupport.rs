//! Seeded random generators shared by the unit tests.

use std::sync::Arc;

use rand::Rng;

use crate::multiindex::MultiIndex;
use crate::symexpr::{Expr, JetSpace};
use crate::vforms::VForm;

pub fn space(p: usize, q: usize, max_order: usize) -> Arc<JetSpace> {
    let coords = ["x", "y", "z", "w"][..p]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let fields = ["u", "v", "wf", "g"][..q]
        .iter()
        .map(|s| s.to_string())
        .collect();
    JetSpace::new(coords, fields, max_order).unwrap()
}

/// Random polynomial in the base and jet variables: `num_terms` monomials
/// of total degree <= 3 with small integer coefficients.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    space: &JetSpace,
    max_jet_order: u32,
    num_terms: usize,
) -> Expr {
    let jets = MultiIndex::enumerate(space.dim(), max_jet_order);
    let mut terms = Vec::with_capacity(num_terms);
    for _ in 0..num_terms {
        let coeff = loop {
            let c = rng.gen_range(-3i64..=3);
            if c != 0 {
                break c;
            }
        };
        let mut factors = vec![Expr::int(coeff)];
        let degree = rng.gen_range(1..=3usize);
        for _ in 0..degree {
            if rng.gen_bool(0.3) {
                factors.push(Expr::base(rng.gen_range(0..space.dim())));
            } else {
                let n = &jets[rng.gen_range(0..jets.len())];
                factors.push(Expr::Jet(rng.gen_range(0..space.num_fields()), n.clone()));
            }
        }
        terms.push(Expr::Mul(factors));
    }
    Expr::Add(terms).canonicalize()
}

/// Random form of the given bidegree with polynomial coefficients.
pub fn random_vform<R: Rng>(
    rng: &mut R,
    space: &Arc<JetSpace>,
    horiz_degree: usize,
    contact_degree: usize,
    max_order: u32,
) -> VForm {
    let p = space.dim();
    let jets = MultiIndex::enumerate(p, max_order);
    let mut out = VForm::zero(
        space.clone(),
        horiz_degree,
        contact_degree,
        max_order as usize,
        max_order as usize,
    );
    let num_terms = rng.gen_range(1..=3usize);
    for _ in 0..num_terms {
        let mut axes: Vec<usize> = (0..p).collect();
        for i in (1..axes.len()).rev() {
            axes.swap(i, rng.gen_range(0..=i));
        }
        axes.truncate(horiz_degree);
        let mut dpsi = Vec::with_capacity(contact_degree);
        let mut guard = 0;
        while dpsi.len() < contact_degree && guard < 50 {
            guard += 1;
            let cand = (
                rng.gen_range(0..space.num_fields()),
                jets[rng.gen_range(0..jets.len())].clone(),
            );
            if !dpsi.contains(&cand) {
                dpsi.push(cand);
            }
        }
        if dpsi.len() < contact_degree {
            continue;
        }
        let nterms = rng.gen_range(1..=2);
        let coeff = random_poly(rng, space, max_order, nterms);
        out.add_term(&axes, &dpsi, coeff);
    }
    out
}

/// Random Lagrangian: a `(p,0)`-form whose density is a polynomial of jet
/// order <= r.
pub fn random_lagrangian<R: Rng>(rng: &mut R, space: &Arc<JetSpace>, r: u32) -> VForm {
    let nterms = rng.gen_range(2..=3);
    let density = random_poly(rng, space, r, nterms);
    VForm::lagrangian(space.clone(), density)
}

/// Random closed-form section: a small polynomial-and-trig expression in
/// the base coordinates.
pub fn random_closed_section<R: Rng>(rng: &mut R, space: &JetSpace) -> Expr {
    use crate::symexpr::Func;
    let mut terms = vec![Expr::int(rng.gen_range(-2i64..=2))];
    for axis in 0..space.dim() {
        let k = rng.gen_range(1..=2i64);
        let arg = Expr::int(k) * Expr::base(axis);
        let f = if rng.gen_bool(0.5) { Func::Sin } else { Func::Cos };
        terms.push(Expr::int(rng.gen_range(-2i64..=2)) * Expr::func(f, arg));
        if rng.gen_bool(0.4) {
            terms.push(Expr::base(axis).pow(rng.gen_range(1..=2)));
        }
    }
    Expr::Add(terms)
}
