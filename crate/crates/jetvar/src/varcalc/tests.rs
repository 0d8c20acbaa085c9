use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::jetops::{operator_e, IotaMode};
use crate::symexpr::{subst_jets, Expr, Func, SectionSym, VerticalFieldSym};
use crate::testsupport;

fn mi(counts: &[u32]) -> MultiIndex {
    MultiIndex::new(counts.to_vec())
}

fn oscillator() -> VForm {
    let space = testsupport::space(1, 1, 4);
    VForm::lagrangian(
        space,
        Expr::ratio(1, 2) * Expr::jet(0, &[1]).pow(2)
            - Expr::ratio(1, 2) * Expr::jet(0, &[0]).pow(2),
    )
}

fn biharmonic() -> VForm {
    let space = testsupport::space(1, 1, 4);
    VForm::lagrangian(space, Expr::ratio(1, 2) * Expr::jet(0, &[2]).pow(2))
}

#[test]
fn prolong_examples() {
    let space = testsupport::space(1, 1, 4);
    // v = ∂/∂ψ: coefficients (1, 0, 0)
    let v = VerticalFieldSym::new(space.clone(), vec![Expr::one()]).unwrap();
    let p = prolong_vertical(&v, 2);
    assert!(p.coeff(0, &mi(&[0])).unwrap().eq_exact(&Expr::one()));
    assert!(p.coeff(0, &mi(&[1])).unwrap().is_zero());
    assert!(p.coeff(0, &mi(&[2])).unwrap().is_zero());

    // v = ψ∂/∂ψ: (ψ, ψ_1)
    let v = VerticalFieldSym::new(space.clone(), vec![Expr::jet(0, &[0])]).unwrap();
    let p = prolong_vertical(&v, 1);
    assert!(p.coeff(0, &mi(&[0])).unwrap().eq_exact(&Expr::jet(0, &[0])));
    assert!(p.coeff(0, &mi(&[1])).unwrap().eq_exact(&Expr::jet(0, &[1])));

    // v = ξ∂/∂ψ: (ξ, 1)
    let v = VerticalFieldSym::new(space, vec![Expr::base(0)]).unwrap();
    let p = prolong_vertical(&v, 1);
    assert!(p.coeff(0, &mi(&[0])).unwrap().eq_exact(&Expr::base(0)));
    assert!(p.coeff(0, &mi(&[1])).unwrap().eq_exact(&Expr::one()));
}

#[test]
fn prolong_truncate_rules() {
    let space = testsupport::space(1, 1, 4);
    let v = VerticalFieldSym::new(space, vec![Expr::jet(0, &[0]) * Expr::base(0)]).unwrap();
    let p2 = prolong_vertical(&v, 2);
    let p1 = prolong_vertical(&v, 1);
    let t1 = prolong_truncate(&p2, 1);
    assert_eq!(t1.coeffs().len(), p1.coeffs().len());
    for (k, c) in t1.coeffs() {
        assert!(c.eq_exact(&p1.coeffs()[k]));
    }
    // identity truncation
    let same = prolong_truncate(&p2, 2);
    assert_eq!(same.coeffs().len(), p2.coeffs().len());
    // truncate twice = truncate once to the lower order
    let t0a = prolong_truncate(&prolong_truncate(&p2, 1), 0);
    let t0b = prolong_truncate(&p2, 0);
    assert_eq!(t0a.coeffs().len(), t0b.coeffs().len());
}

#[test]
fn prolongation_coefficients_are_consistent() {
    // V^a_{N+1_i} = D_i(V^a_N), for random order-0 fields
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let space = testsupport::space(2, 1, 3);
    for _ in 0..10 {
        let comp = testsupport::random_poly(&mut rng, &space, 0, 2);
        let v = VerticalFieldSym::new(space.clone(), vec![comp]).unwrap();
        let p = prolong_vertical(&v, 2);
        for (key, c) in p.coeffs() {
            let (a, n) = key;
            if n.order() as usize >= p.order {
                continue;
            }
            for axis in 0..2 {
                let up = p.coeff(*a, &n.incremented(axis)).unwrap();
                assert!(up.eq_exact(&total_derivative_expr(c, axis)));
            }
        }
    }
}

#[test]
fn prolongation_in_coordinates_matches_substitution() {
    // subst(D_N v^a, υ) = d^N (v^a ∘ j_0 υ) for closed-form υ
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let space = testsupport::space(2, 1, 3);
    for _ in 0..15 {
        let comp = testsupport::random_poly(&mut rng, &space, 0, 2);
        let v = VerticalFieldSym::new(space.clone(), vec![comp.clone()]).unwrap();
        let upsilon = SectionSym::closed(
            space.clone(),
            vec![testsupport::random_closed_section(&mut rng, &space)],
        )
        .unwrap();
        let restricted = subst_jets(&comp, &upsilon);
        let p = prolong_vertical(&v, 2);
        for (key, c) in p.coeffs() {
            let (_, n) = key;
            let lhs = subst_jets(c, &upsilon);
            let mut rhs = restricted.clone();
            for (axis, &count) in n.counts().iter().enumerate() {
                for _ in 0..count {
                    rhs = rhs.partial_base(axis);
                }
            }
            assert!(lhs.eq_exact(&rhs), "coordinate prolongation failed at {n}");
        }
    }
}

#[test]
fn first_variation_examples() {
    let space = testsupport::space(1, 1, 4);
    let upsilon = SectionSym::opaque(space.clone(), &["U"]);
    let y = SectionSym::opaque(space.clone(), &["Y"]);

    // λ = ½ψ_1² dξ → U_x · Y_x dξ
    let lam = VForm::lagrangian(space.clone(), Expr::ratio(1, 2) * Expr::jet(0, &[1]).pow(2));
    let fv = first_variation(&lam, &upsilon, &y).unwrap();
    let coeff = fv.terms().values().next().unwrap();
    let expected = Expr::opaque("U", &[1]) * Expr::opaque("Y", &[1]);
    assert!(coeff.eq_exact(&expected));

    // λ = dξ → 0
    let unit = VForm::lagrangian(space, Expr::one());
    assert!(first_variation(&unit, &upsilon, &y).unwrap().is_zero());
}

#[test]
fn decompose_oscillator() {
    let lam = oscillator();
    let space = lam.space().clone();
    let d = decompose(&lam, Strategy::MinAxis).unwrap();

    let mut eps = VForm::zero(space.clone(), 1, 1, 2, 0);
    eps.add_term(
        &[0],
        &[(0, mi(&[0]))],
        Expr::Neg(Box::new(Expr::jet(0, &[2]) + Expr::jet(0, &[0]))),
    );
    assert!(d.epsilon.eq_exact(&eps));

    let mut kap = VForm::zero(space.clone(), 0, 1, 1, 0);
    kap.add_term(&[], &[(0, mi(&[0]))], Expr::jet(0, &[1]));
    assert!(d.kappa.eq_exact(&kap));

    // d_t κ = (ψ_2 dψ + ψ_1 dψ_1) ⊗ dξ, symbolically
    let mut dtk = VForm::zero(space, 1, 1, 2, 1);
    dtk.add_term(&[0], &[(0, mi(&[0]))], Expr::jet(0, &[2]));
    dtk.add_term(&[0], &[(0, mi(&[1]))], Expr::jet(0, &[1]));
    assert!(d.kappa.d_t().eq_exact(&dtk));
}

#[test]
fn decompose_constant_lagrangian() {
    let space = testsupport::space(1, 1, 2);
    let lam = VForm::lagrangian(space, Expr::int(5));
    let d = decompose(&lam, Strategy::MinAxis).unwrap();
    assert!(d.epsilon.is_zero());
    assert!(d.kappa.is_zero());
}

#[test]
fn decompose_biharmonic() {
    let lam = biharmonic();
    let space = lam.space().clone();
    let d = decompose(&lam, Strategy::MinAxis).unwrap();

    let mut eps = VForm::zero(space.clone(), 1, 1, 4, 0);
    eps.add_term(&[0], &[(0, mi(&[0]))], Expr::jet(0, &[4]));
    assert!(d.epsilon.eq_exact(&eps));

    // κ = ψ_2 dψ_1 ⊗ 1 − ψ_3 dψ ⊗ 1
    let mut kap = VForm::zero(space, 0, 1, 3, 1);
    kap.add_term(&[], &[(0, mi(&[1]))], Expr::jet(0, &[2]));
    kap.add_term(
        &[],
        &[(0, mi(&[0]))],
        Expr::Neg(Box::new(Expr::jet(0, &[3]))),
    );
    assert!(d.kappa.eq_exact(&kap));
}

#[test]
fn euler_lagrange_examples() {
    // oscillator: −(ψ_2 + ψ) dψ ⊗ dξ
    let el = euler_lagrange(&oscillator()).unwrap();
    let coeff = el.terms().values().next().unwrap();
    let expected = Expr::Neg(Box::new(Expr::jet(0, &[2]) + Expr::jet(0, &[0])));
    assert!(coeff.eq_exact(&expected));

    // Laplace (p=2): −(ψ_(2,0) + ψ_(0,2)) dψ ⊗ vol
    let space2 = testsupport::space(2, 1, 4);
    let laplace = VForm::lagrangian(
        space2,
        Expr::ratio(1, 2) * Expr::jet(0, &[1, 0]).pow(2)
            + Expr::ratio(1, 2) * Expr::jet(0, &[0, 1]).pow(2),
    );
    let el = euler_lagrange(&laplace).unwrap();
    let coeff = el.terms().values().next().unwrap();
    let expected = Expr::Neg(Box::new(Expr::jet(0, &[2, 0]) + Expr::jet(0, &[0, 2])));
    assert!(coeff.eq_exact(&expected));

    // L = ψ_1·ξ: ∂L/∂ψ_1 = ξ, D(ξ) = 1 → ε = −1 dψ ⊗ dξ
    let space1 = testsupport::space(1, 1, 2);
    let lam = VForm::lagrangian(space1, Expr::jet(0, &[1]) * Expr::base(0));
    let el = euler_lagrange(&lam).unwrap();
    let coeff = el.terms().values().next().unwrap();
    assert!(coeff.eq_exact(&Expr::int(-1)));
}

#[test]
fn green_operator_examples() {
    let space = testsupport::space(1, 1, 4);
    let upsilon = SectionSym::opaque(space.clone(), &["U"]);
    let y = SectionSym::opaque(space.clone(), &["Y"]);

    // oscillator boundary momentum: U_x · Y
    let d = decompose(&oscillator(), Strategy::MinAxis).unwrap();
    let g = green_operator(&d.kappa, &upsilon, &y).unwrap();
    let coeff = g.terms().values().next().unwrap();
    let expected = Expr::opaque("U", &[1]) * Expr::opaque("Y", &[0]);
    assert!(coeff.eq_exact(&expected));

    // zero boundary part
    let zero = VForm::zero(space.clone(), 0, 1, 0, 0);
    assert!(green_operator(&zero, &upsilon, &y).unwrap().is_zero());

    // biharmonic: U_xx Y_x − U_xxx Y
    let d = decompose(&biharmonic(), Strategy::MinAxis).unwrap();
    let g = green_operator(&d.kappa, &upsilon, &y).unwrap();
    let coeff = g.terms().values().next().unwrap();
    let expected = Expr::opaque("U", &[2]) * Expr::opaque("Y", &[1])
        - Expr::opaque("U", &[3]) * Expr::opaque("Y", &[0]);
    assert!(coeff.eq_exact(&expected));
}

#[test]
fn green_identity_residual_examples() {
    let space = testsupport::space(1, 1, 4);
    let upsilon = SectionSym::opaque(space.clone(), &["U"]);
    let y = SectionSym::opaque(space.clone(), &["Y"]);

    let r = green_identity_residual(&oscillator(), &upsilon, &y).unwrap();
    assert!(r.is_zero(), "oscillator residual: {r}");

    let unit = VForm::lagrangian(space, Expr::int(2));
    let r = green_identity_residual(&unit, &upsilon, &y).unwrap();
    assert!(r.is_zero());

    let r = green_identity_residual(&biharmonic(), &upsilon, &y).unwrap();
    assert!(r.is_zero(), "biharmonic residual: {r}");
}

#[test]
fn decomposition_identity_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    for p in 1..=2usize {
        for r in 1..=2u32 {
            let space = testsupport::space(p, 1, 3);
            for _ in 0..5 {
                let lam = testsupport::random_lagrangian(&mut rng, &space, r);
                // decompose re-checks the identity internally
                let d = decompose(&lam, Strategy::MinAxis).unwrap();
                let lhs = lam.d_pi();
                let rhs = d.epsilon.add(&d.kappa.d_t());
                assert!(lhs.eq_exact(&rhs));
            }
        }
    }
}

#[test]
fn epsilon_unique_kappa_ambiguous() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    for p in 2..=3usize {
        let space = testsupport::space(p, 1, 2);
        for _ in 0..5 {
            let lam = testsupport::random_lagrangian(&mut rng, &space, 2);
            let d1 = decompose(&lam, Strategy::MinAxis).unwrap();
            let d2 = decompose(&lam, Strategy::MaxAxis).unwrap();
            assert!(d1.epsilon.eq_exact(&d2.epsilon), "ε differs by strategy");
            let diff = d1.kappa.sub(&d2.kappa);
            assert!(diff.d_t().is_zero(), "κ difference is not d_t-closed");
        }
    }
}

#[test]
fn triple_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    for p in 1..=2usize {
        for r in 1..=2u32 {
            let space = testsupport::space(p, 1, 3);
            for _ in 0..5 {
                let lam = testsupport::random_lagrangian(&mut rng, &space, r);
                let el = euler_lagrange(&lam).unwrap();
                let dec = decompose(&lam, Strategy::MinAxis).unwrap();
                let e_op = operator_e(&lam, IotaMode::Weighted).unwrap();
                assert!(el.eq_exact(&dec.epsilon));
                assert!(el.eq_exact(&e_op));
            }
        }
    }
}

#[test]
fn euler_lagrange_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(89);
    let space = testsupport::space(2, 1, 2);
    for _ in 0..10 {
        let l1 = testsupport::random_lagrangian(&mut rng, &space, 2);
        let l2 = testsupport::random_lagrangian(&mut rng, &space, 2);
        let a = Expr::ratio(3, 2);
        let b = Expr::int(-2);
        let combo = l1.scale(a.clone()).add(&l2.scale(b.clone()));
        let lhs = euler_lagrange(&combo).unwrap();
        let rhs = euler_lagrange(&l1)
            .unwrap()
            .scale(a)
            .add(&euler_lagrange(&l2).unwrap().scale(b));
        assert!(lhs.eq_exact(&rhs));
    }
}

#[test]
fn null_lagrangians_have_zero_el() {
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    for p in 1..=3usize {
        let space = testsupport::space(p, 1, 2);
        for _ in 0..7 {
            let mu = testsupport::random_vform(&mut rng, &space, p - 1, 0, 2);
            let lam = mu.d_t();
            if lam.is_zero() {
                continue;
            }
            let el = euler_lagrange(&lam).unwrap();
            assert!(el.is_zero(), "EL of a total differential is not zero");
        }
    }
}

#[test]
fn green_identity_residual_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for p in 1..=2usize {
        for r in 1..=2u32 {
            let space = testsupport::space(p, 1, 3);
            let upsilon = SectionSym::opaque(space.clone(), &["U"]);
            let y = SectionSym::opaque(space.clone(), &["Y"]);
            for _ in 0..4 {
                let lam = testsupport::random_lagrangian(&mut rng, &space, r);
                let res = green_identity_residual(&lam, &upsilon, &y).unwrap();
                assert!(res.is_zero(), "nonzero residual for {lam}");
            }
        }
    }
}

#[test]
fn total_differential_of_contraction_with_prolonged_field() {
    // d_t⟨J_r(v), ω⟩ = ⟨J_{r+1}(v), d_t ω⟩
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let space = testsupport::space(2, 1, 3);
    for _ in 0..15 {
        let comp = testsupport::random_poly(&mut rng, &space, 0, 2);
        let v = VerticalFieldSym::new(space.clone(), vec![comp]).unwrap();
        let omega = testsupport::random_vform(&mut rng, &space, 1, 1, 2);
        let r = omega.measured_contact_order();
        let lhs = omega
            .contract(prolong_vertical(&v, r).coeffs())
            .unwrap()
            .d_t();
        let rhs = omega
            .d_t()
            .contract(prolong_vertical(&v, r + 1).coeffs())
            .unwrap();
        assert!(lhs.eq_exact(&rhs), "prolongation/d_t exchange failed");
    }
}
