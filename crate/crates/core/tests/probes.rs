//! Behaviour of the boundedness and divergence probes on small grids.

use hartogs::exact::GaussRat;
use hartogs::experiments::*;
use hartogs::quadrature::{Domain, GridParams, QuadGrid};
use hartogs::symbolic::{Monomial, SymbolicFunction};

fn probe_params() -> GridParams {
    GridParams { inner_radial_cells: Some(2), inner_angular_count: Some(16), ..GridParams::new(10, 16, 1e-3, 0.5) }
}

fn family(members: Vec<SymbolicFunction>) -> TestFamily {
    TestFamily { spec: FamilySpec::hartogs(members.len(), 0), members }
}

const CUTOFFS: [f64; 3] = [1e-1, 1e-2, 1e-3];

#[test]
fn counterexample_ratio_at_k1_p2() {
    // ‖(1/2)/z₂‖²_{1,2,2} = π²/8 + π²/4, ‖z̄₂‖²_{1,2} = π²/3 + π²/2
    let zb2 = SymbolicFunction::from_monomial(Monomial::unit(0, 0, 0, 1));
    let g = QuadGrid::new(Domain::Hartogs, probe_params()).unwrap();
    let r = probe_main_estimate(1, 2.0, &family(vec![zb2]), &g).unwrap();
    assert!(r.exact);
    assert!((r.ratios[0] - (9.0f64 / 20.0).sqrt()).abs() < 1e-14);
}

#[test]
fn holomorphic_members_contract() {
    let members = vec![
        SymbolicFunction::from_monomial(Monomial::unit(1, 0, 0, 0)),
        SymbolicFunction::from_monomial(Monomial::unit(0, 2, 0, 0)),
        SymbolicFunction::from_monomials([
            Monomial::unit(2, 1, 0, 0),
            Monomial::new(0, 0, 0, 0, GaussRat::from_ratio(-1, 3)),
        ]),
    ];
    let fam = family(members);
    let g = QuadGrid::new(Domain::Hartogs, probe_params()).unwrap();
    for r in probe_main_estimate_multi(&[0, 1, 2], &[1.5, 2.0, 3.0], &fam, &g).unwrap() {
        assert!(r.max <= 1.0 + 1e-9, "k={} p={} max={}", r.k, r.p, r.max);
    }
}

#[test]
fn endpoint_sensitivity_of_the_main_estimate() {
    let fam = TestFamily::standard(0);
    let g = QuadGrid::new(Domain::Hartogs, probe_params()).unwrap();
    let r = probe_main_estimate_multi(&[1], &[3.0, 3.9], &fam, &g).unwrap();
    assert!(r[0].max.is_finite() && r[1].max.is_finite());
    assert!(r[1].max >= r[0].max);
}

#[test]
fn counterexample_k0_p2_is_bounded() {
    let r = probe_counterexample(0, 2.0, &CUTOFFS, &probe_params()).unwrap();
    assert_eq!(r.fit.verdict, Verdict::Bounded);
}

#[test]
fn window_verdicts() {
    let fam = TestFamily::generate(FamilySpec::hartogs(10, 3));
    let w = probe_lp_window(&[2.0, 3.0, 4.0], &fam, &CUTOFFS, &probe_params()).unwrap();
    assert!(w[0].family.max <= 1.0 + 1e-6);
    assert_eq!(w[0].verdict, Verdict::Bounded);
    assert_eq!(w[1].verdict, Verdict::Bounded);
    assert_eq!(w[2].verdict, Verdict::LogDivergent);
    assert!(w[2].truncation_ratios.windows(2).all(|r| r[1] > r[0]));
}

#[test]
fn window_p3_is_stable_under_refinement() {
    let fam = TestFamily::generate(FamilySpec::hartogs(10, 3));
    let a = probe_lp_window(&[3.0], &fam, &CUTOFFS, &probe_params()).unwrap();
    let b = probe_lp_window(&[3.0], &fam, &CUTOFFS, &probe_params().refined()).unwrap();
    assert_eq!(b[0].verdict, Verdict::Bounded);
    assert!((b[0].family.max / a[0].family.max - 1.0).abs() < 0.05);
}

#[test]
fn b2_window() {
    let fam = TestFamily::generate(FamilySpec::planar(20, 0));
    let grid = probe_params();
    let r2 = verify_lemma_b2(2.0, &fam, &CUTOFFS, &grid).unwrap();
    let r39 = verify_lemma_b2(3.9, &fam, &CUTOFFS, &grid).unwrap();
    let r4 = verify_lemma_b2(4.0, &fam, &CUTOFFS, &grid).unwrap();
    assert_eq!(r2.verdict, Verdict::Bounded);
    // B₂ carries no 1/π, so at p = 2 it is π times a contraction
    assert!(r2.family.max <= std::f64::consts::PI * (1.0 + 1e-6));
    assert!(r39.family.max >= r2.family.max);
    assert!(r4.verdict.is_divergent());
}
