use hartogs::exact::{int, rat_to_f64, GaussRat};
use hartogs::monomial_engine::*;
use hartogs::symbolic::{Monomial, SymbolicFunction};
use num_traits::Zero;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Midpoint rule for `(2π)² ∫_0^1 r₂^{2t+1} ∫_0^{r₂} r₁^{2s+1} dr₁ dr₂`.
fn polar_oracle(s: f64, t: f64) -> f64 {
    let n = 4000;
    let h = 1.0 / n as f64;
    let mut outer = 0.0;
    for i in 0..n {
        let r2 = (i as f64 + 0.5) * h;
        // inner integral is elementary once the outer radius is fixed
        let inner = r2.powf(2.0 * s + 2.0) / (2.0 * s + 2.0);
        outer += r2.powf(2.0 * t + 1.0) * inner * h;
    }
    4.0 * PI * PI * outer
}

#[test]
fn hartogs_moments_match_polar_oracle() {
    for (s, t) in [(0, 0), (1, 0), (0, 1), (2, 3), (3, -1), (1, -2)] {
        let exact = monomial_integral_hartogs(&int(s), &int(t)).unwrap().to_f64();
        let oracle = polar_oracle(s as f64, t as f64);
        assert!((exact - oracle).abs() < 1e-5 * exact.abs(), "({s},{t}): {exact} vs {oracle}");
    }
}

#[test]
fn weighted_punctured_moment_matches_radial_oracle() {
    for s in [-1i64, 0, 1, 4] {
        let n = 20000;
        let h = 1.0 / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                2.0 * PI * r.powf(2.0 * s as f64 + 3.0) * h
            })
            .sum();
        let exact = monomial_integral_weighted_punctured(&int(s)).unwrap().to_f64();
        assert!((exact - oracle).abs() < 1e-6, "s={s}");
    }
}

fn arb_l2_monomial() -> impl Strategy<Value = Monomial> {
    (0i32..5, -3i32..5, 0i32..5, 0i32..5)
        .prop_filter("square integrable", |&(a, b, c, d)| a + b + c + d + 2 > 0 && a + c >= 0)
        .prop_map(|(a, b, c, d)| Monomial::unit(a, b, c, d))
}

fn gain(m: &Monomial) -> f64 {
    let t = project_monomial_hartogs(m).unwrap();
    rat_to_f64(&t.coeff.c.re)
}

proptest! {
    #[test]
    fn projection_is_idempotent(m in arb_l2_monomial()) {
        let p = project_monomial_hartogs(&m).unwrap();
        if !p.is_zero() {
            let pp = project_monomial_hartogs(&p.to_monomial()).unwrap();
            prop_assert_eq!(pp, p);
        }
    }

    #[test]
    fn projection_is_self_adjoint(m1 in arb_l2_monomial(), m2 in arb_l2_monomial()) {
        let p1 = project_monomial_hartogs(&m1).unwrap();
        let p2 = project_monomial_hartogs(&m2).unwrap();
        let lhs = if p1.is_zero() { GaussRat::zero() } else { inner_product_hartogs(&p1.to_monomial(), &m2).unwrap().c };
        let rhs = if p2.is_zero() { GaussRat::zero() } else { inner_product_hartogs(&m1, &p2.to_monomial()).unwrap().c };
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn projection_does_not_increase_norm(m in arb_l2_monomial()) {
        let f = SymbolicFunction::from_monomial(m.clone());
        let p = project_hartogs(&f, None).unwrap();
        let nf = weighted_l2_norm_sq(&f, &int(0)).unwrap().q;
        let np = weighted_l2_norm_sq(&p, &int(0)).unwrap().q;
        prop_assert!(np <= nf);
        prop_assert!(gain(&m) >= 0.0);
    }

    #[test]
    fn truncation_shrinks_the_gain(m in arb_l2_monomial(), k in 1i64..20) {
        let eps = hartogs::exact::rat(1, k + 1);
        let full = project_monomial_hartogs(&m).unwrap();
        let cut = project_monomial_hartogs_truncated(&m, &eps).unwrap();
        if full.is_zero() {
            prop_assert!(cut.is_zero());
        } else {
            prop_assert!(cut.coeff.c.re < full.coeff.c.re);
            prop_assert!(cut.coeff.c.re > num_rational::BigRational::zero());
        }
    }

    #[test]
    fn product_model_factorises_moments(s in 0i64..8, t in -1i64..8) {
        // under Ψ the Hartogs moment splits into a disc moment and a
        // |w₂|²-weighted punctured-disc moment
        let h = monomial_integral_hartogs(&int(s), &int(t)).unwrap();
        let disc = int(1) / int(s + 1);
        let punct = monomial_integral_weighted_punctured(&int(s + t)).unwrap();
        prop_assert_eq!(h.q, disc * punct.q);
    }

    #[test]
    fn b3_fixes_holomorphic_monomials(m in -1i32..12) {
        let t = project_monomial_b3(m, 0).unwrap();
        prop_assert_eq!(t.exponent, m);
        prop_assert_eq!(t.coeff.c, GaussRat::one());
    }
}
