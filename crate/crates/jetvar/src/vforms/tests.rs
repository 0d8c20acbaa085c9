use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::symexpr::{subst_jets, Expr, Func};
use crate::testsupport;

fn mi(counts: &[u32]) -> MultiIndex {
    MultiIndex::new(counts.to_vec())
}

/// dψ ⊗ dξ on the 1d space.
fn dpsi_dxi() -> VForm {
    let space = testsupport::space(1, 1, 3);
    let mut f = VForm::zero(space, 1, 1, 0, 0);
    f.add_term(&[0], &[(0, mi(&[0]))], Expr::one());
    f
}

#[test]
fn wedge_with_unit() {
    let a = dpsi_dxi();
    let unit = VForm::function(a.space().clone(), Expr::one());
    let w = a.wedge(&unit);
    assert!(w.eq_exact(&a));
}

#[test]
fn wedge_sign_from_canonical_reorder() {
    let space = testsupport::space(2, 1, 3);
    // dψ_1 ⊗ dξ^1
    let mut a = VForm::zero(space.clone(), 1, 1, 0, 1);
    a.add_term(&[0], &[(0, mi(&[1, 0]))], Expr::one());
    // dψ ⊗ dξ^2
    let mut b = VForm::zero(space.clone(), 1, 1, 0, 0);
    b.add_term(&[1], &[(0, mi(&[0, 0]))], Expr::one());
    let w = a.wedge(&b);
    // canonical key order is dψ ∧ dψ_1; the input order dψ_1 ∧ dψ flips sign
    let (key, coeff) = w.terms().iter().next().unwrap();
    assert_eq!(key.dx, vec![0, 1]);
    assert_eq!(key.dpsi, vec![(0, mi(&[0, 0])), (0, mi(&[1, 0]))]);
    assert!(coeff.eq_exact(&Expr::int(-1)));
}

#[test]
fn wedge_repeated_covector_vanishes() {
    let space = testsupport::space(2, 1, 3);
    let mut a = VForm::zero(space.clone(), 1, 1, 0, 0);
    a.add_term(&[0], &[(0, mi(&[0, 0]))], Expr::one());
    let mut b = VForm::zero(space.clone(), 1, 1, 0, 0);
    b.add_term(&[1], &[(0, mi(&[0, 0]))], Expr::one());
    assert!(a.wedge(&b).is_zero());
}

#[test]
fn contract_examples() {
    let space = testsupport::space(1, 1, 3);
    // V = ∂/∂ψ on dψ⊗dξ -> 1⊗dξ
    let mut coeffs = std::collections::BTreeMap::new();
    coeffs.insert((0usize, mi(&[0])), Expr::one());
    let c = dpsi_dxi().contract(&coeffs).unwrap();
    assert_eq!(c.contact_degree(), 0);
    let (key, val) = c.terms().iter().next().unwrap();
    assert_eq!(key.dx, vec![0]);
    assert!(val.eq_exact(&Expr::one()));

    // V = ψ∂/∂ψ on ψ_1 dψ⊗dξ -> ψψ_1 ⊗ dξ
    let mut f = VForm::zero(space.clone(), 1, 1, 1, 0);
    f.add_term(&[0], &[(0, mi(&[0]))], Expr::jet(0, &[1]));
    let mut coeffs = std::collections::BTreeMap::new();
    coeffs.insert((0usize, mi(&[0])), Expr::jet(0, &[0]));
    let c = f.contract(&coeffs).unwrap();
    let val = c.terms().values().next().unwrap();
    assert!(val.eq_exact(&(Expr::jet(0, &[0]) * Expr::jet(0, &[1]))));

    // mismatched covector -> 0
    let mut g = VForm::zero(space.clone(), 1, 1, 0, 1);
    g.add_term(&[0], &[(0, mi(&[1]))], Expr::one());
    let mut coeffs = std::collections::BTreeMap::new();
    coeffs.insert((0usize, mi(&[0])), Expr::one());
    assert!(g.contract(&coeffs).unwrap().is_zero());

    // zero contact degree errors
    let unit = VForm::function(space, Expr::one());
    assert!(matches!(
        unit.contract(&coeffs),
        Err(VFormError::ZeroContactDegree)
    ));
}

#[test]
fn order_lift_rules() {
    let space = testsupport::space(1, 1, 3);
    let mut f = VForm::zero(space, 1, 1, 1, 1);
    f.add_term(&[0], &[(0, mi(&[1]))], Expr::jet(0, &[1]));
    let lifted = f.order_lift(2, 1).unwrap();
    assert_eq!(lifted.coeff_order(), 2);
    assert!(lifted.eq_exact(&f));
    // lift then lift = single lift to the max orders
    let twice = lifted.order_lift(3, 2).unwrap();
    let once = f.order_lift(3, 2).unwrap();
    assert_eq!(twice.coeff_order(), once.coeff_order());
    assert_eq!(twice.contact_order(), once.contact_order());
    // identity case
    let same = f.order_lift(1, 1).unwrap();
    assert_eq!(same.coeff_order(), 1);
    // lowering errors
    assert!(matches!(
        f.order_lift(0, 1),
        Err(VFormError::OrderLowering { .. })
    ));
}

#[test]
fn pull_back_examples() {
    let space = testsupport::space(1, 1, 3);
    let upsilon =
        crate::symexpr::SectionSym::closed(space.clone(), vec![Expr::func(Func::Sin, Expr::base(0))])
            .unwrap();
    // ψ_1 dψ⊗dξ -> cos(ξ) dψ⊗dξ
    let mut f = VForm::zero(space.clone(), 1, 1, 1, 0);
    f.add_term(&[0], &[(0, mi(&[0]))], Expr::jet(0, &[1]));
    let pulled = f.pull_back_section(&upsilon);
    assert_eq!(pulled.coeff_order(), 0);
    let val = pulled.terms().values().next().unwrap();
    assert!(val.eq_exact(&Expr::func(Func::Cos, Expr::base(0))));

    // basic forms fixed
    let mut dxi = VForm::zero(space.clone(), 1, 0, 0, 0);
    dxi.add_term(&[0], &[], Expr::one());
    assert!(dxi.pull_back_section(&upsilon).eq_exact(&dxi));

    // opaque substitution
    let opaque = crate::symexpr::SectionSym::opaque(space.clone(), &["U"]);
    let mut g = VForm::zero(space, 1, 1, 0, 0);
    g.add_term(&[0], &[(0, mi(&[0]))], Expr::jet(0, &[0]));
    let val = g
        .pull_back_section(&opaque)
        .terms()
        .values()
        .next()
        .cloned()
        .unwrap();
    assert_eq!(val, Expr::opaque("U", &[0]));
}

#[test]
fn base_exterior_d_examples() {
    // d(sin ξ) = cos ξ dξ (p=1)
    let space = testsupport::space(1, 1, 3);
    let f = VForm::function(space, Expr::func(Func::Sin, Expr::base(0)));
    let df = f.base_exterior_d().unwrap();
    assert_eq!(df.horiz_degree(), 1);
    let val = df.terms().values().next().unwrap();
    assert!(val.eq_exact(&Expr::func(Func::Cos, Expr::base(0))));

    // d(ξ^1 dξ^1) = 0 (p=2)
    let space2 = testsupport::space(2, 1, 3);
    let mut g = VForm::zero(space2.clone(), 1, 0, 0, 0);
    g.add_term(&[0], &[], Expr::base(0));
    assert!(g.base_exterior_d().unwrap().is_zero());

    // jet variable in a coefficient is rejected
    let h = VForm::function(space2, Expr::jet(0, &[0, 0]));
    assert!(matches!(
        h.base_exterior_d(),
        Err(VFormError::JetVariablePresent(_))
    ));
}

#[test]
fn base_exterior_d_squares_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let space = testsupport::space(3, 1, 2);
    for _ in 0..30 {
        // coefficients in ξ only
        let mut f = VForm::zero(space.clone(), 1, 0, 0, 0);
        for axis in 0..3 {
            let c = testsupport::random_closed_section(&mut rng, &space);
            f.add_term(&[axis], &[], c);
        }
        let ddf = f.base_exterior_d().unwrap().base_exterior_d().unwrap();
        assert!(ddf.is_zero(), "d∘d ≠ 0 on {f}");
    }
}

#[test]
fn eq_exact_examples() {
    let a = dpsi_dxi();
    assert!(a.eq_exact(&a));

    let space = a.space().clone();
    let mut b = VForm::zero(space.clone(), 1, 1, 1, 0);
    b.add_term(
        &[0],
        &[(0, mi(&[0]))],
        Expr::jet(0, &[0]) * Expr::jet(0, &[1]),
    );
    let mut c = VForm::zero(space.clone(), 1, 1, 1, 0);
    c.add_term(
        &[0],
        &[(0, mi(&[0]))],
        Expr::jet(0, &[1]) * Expr::jet(0, &[0]),
    );
    assert!(b.eq_exact(&c));

    let mut d = VForm::zero(space, 1, 1, 0, 1);
    d.add_term(&[0], &[(0, mi(&[1]))], Expr::one());
    assert!(!a.eq_exact(&d));
}

#[test]
fn wedge_graded_commutativity_and_associativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let space = testsupport::space(2, 2, 2);
    for _ in 0..40 {
        let shapes = [(0usize, 0usize), (1, 0), (0, 1), (1, 1)];
        let (d1, l1) = shapes[rand::Rng::gen_range(&mut rng, 0..shapes.len())];
        let (d2, l2) = shapes[rand::Rng::gen_range(&mut rng, 0..shapes.len())];
        let (d3, l3) = shapes[rand::Rng::gen_range(&mut rng, 0..shapes.len())];
        let a = testsupport::random_vform(&mut rng, &space, d1, l1, 1);
        let b = testsupport::random_vform(&mut rng, &space, d2, l2, 1);
        let c = testsupport::random_vform(&mut rng, &space, d3, l3, 1);

        // graded commutativity within each factor, no cross sign
        let sign = if (d1 * d2 + l1 * l2) % 2 == 0 { 1 } else { -1 };
        let ab = a.wedge(&b);
        let ba = b.wedge(&a);
        let ba_signed = if sign < 0 { ba.neg() } else { ba };
        assert!(ab.eq_exact(&ba_signed), "commutativity failed");

        // associativity
        let left = a.wedge(&b).wedge(&c);
        let right = a.wedge(&b.wedge(&c));
        assert!(left.eq_exact(&right), "associativity failed");
    }
}

fn contract_or_zero(
    form: &VForm,
    coeffs: &std::collections::BTreeMap<(usize, MultiIndex), Expr>,
) -> VForm {
    if form.contact_degree() == 0 {
        VForm::zero(
            form.space().clone(),
            form.horiz_degree(),
            0,
            form.coeff_order(),
            form.contact_order(),
        )
    } else {
        form.contract(coeffs).unwrap()
    }
}

#[test]
fn contract_is_contact_antiderivation() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let space = testsupport::space(2, 2, 2);
    for _ in 0..40 {
        let l1 = rand::Rng::gen_range(&mut rng, 0..=2usize);
        let l2 = rand::Rng::gen_range(&mut rng, 0..=1usize);
        let a = testsupport::random_vform(&mut rng, &space, 0, l1, 1);
        let b = testsupport::random_vform(&mut rng, &space, 1, l2, 1);
        let mut coeffs = std::collections::BTreeMap::new();
        for field in 0..2usize {
            for n in MultiIndex::enumerate(2, 1) {
                coeffs.insert(
                    (field, n),
                    testsupport::random_poly(&mut rng, &space, 1, 1),
                );
            }
        }
        let lhs = contract_or_zero(&a.wedge(&b), &coeffs);
        let term1 = contract_or_zero(&a, &coeffs).wedge(&b);
        let term2 = a.wedge(&contract_or_zero(&b, &coeffs));
        let term2_signed = if l1 % 2 == 0 { term2 } else { term2.neg() };
        let rhs = term1.add(&term2_signed);
        assert!(lhs.eq_exact(&rhs), "antiderivation law failed");
    }
}

#[test]
fn pull_back_distributes_over_wedge_and_lift() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let space = testsupport::space(2, 1, 2);
    for _ in 0..30 {
        let upsilon = crate::symexpr::SectionSym::closed(
            space.clone(),
            vec![testsupport::random_closed_section(&mut rng, &space)],
        )
        .unwrap();
        let a = testsupport::random_vform(&mut rng, &space, 1, 1, 2);
        let b = testsupport::random_vform(&mut rng, &space, 0, 1, 2);

        let lhs = a.wedge(&b).pull_back_section(&upsilon);
        let rhs = a
            .pull_back_section(&upsilon)
            .wedge(&b.pull_back_section(&upsilon));
        assert!(lhs.eq_exact(&rhs), "pull-back is not multiplicative");

        // lifting first or pulling back first agree (order projections
        // commute with section pull-backs)
        let lifted_then_pulled = a.order_lift(4, 4).unwrap().pull_back_section(&upsilon);
        let pulled_then_lifted = a
            .pull_back_section(&upsilon)
            .order_lift(0, 4)
            .unwrap();
        assert!(lifted_then_pulled.eq_exact(&pulled_then_lifted));
    }
}

#[test]
fn pull_back_of_contraction_is_contraction_of_pull_backs() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let space = testsupport::space(2, 1, 2);
    for _ in 0..30 {
        let upsilon = crate::symexpr::SectionSym::closed(
            space.clone(),
            vec![testsupport::random_closed_section(&mut rng, &space)],
        )
        .unwrap();
        let form = testsupport::random_vform(&mut rng, &space, 1, 1, 2);
        let mut coeffs = std::collections::BTreeMap::new();
        for n in MultiIndex::enumerate(2, 2) {
            coeffs.insert(
                (0usize, n),
                testsupport::random_poly(&mut rng, &space, 1, 1),
            );
        }
        let lhs = form.contract(&coeffs).unwrap().pull_back_section(&upsilon);
        let pulled_coeffs: std::collections::BTreeMap<_, _> = coeffs
            .iter()
            .map(|(k, v)| (k.clone(), subst_jets(v, &upsilon)))
            .collect();
        let rhs = form
            .pull_back_section(&upsilon)
            .contract(&pulled_coeffs)
            .unwrap();
        assert!(lhs.eq_exact(&rhs), "contraction does not commute with pull-back");
    }
}
