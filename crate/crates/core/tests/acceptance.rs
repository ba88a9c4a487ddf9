//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use hartogs::exact::{int, rat, GaussRat};
use hartogs::experiments::*;
use hartogs::kernels::KernelId;
use hartogs::monomial_engine::{monomial_integral_hartogs, project_monomial_hartogs};
use hartogs::quadrature::{bergman_apply, integrate_value, Domain, Evaluable, GridParams, QuadGrid};
use hartogs::symbolic::{Monomial, SymbolicFunction};
use num_complex::Complex64;

const SEED: u64 = 0;

type Criterion = fn() -> (bool, String);

fn default_grid(domain: Domain) -> QuadGrid {
    QuadGrid::new(domain, GridParams::default()).unwrap()
}

fn probe_grid() -> GridParams {
    GridParams { inner_radial_cells: Some(2), inner_angular_count: Some(16), ..GridParams::new(10, 16, 1e-3, 0.5) }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn criterion_1() -> (bool, String) {
    let t = project_monomial_hartogs(&Monomial::unit(0, 0, 0, 1)).unwrap();
    let exact_ok = (t.alpha, t.beta) == (0, -1) && t.coeff.c == GaussRat::from_ratio(1, 2) && t.coeff.pi_power == 0;
    let g = default_grid(Domain::Hartogs);
    let f = SymbolicFunction::from_monomial(Monomial::unit(0, 0, 0, 1));
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let r2 = 0.2 + 0.06 * i as f64;
        let z2 = Complex64::from_polar(r2, 0.7 * i as f64);
        let z1 = z2 * Complex64::from_polar(0.05 * i as f64, 1.3 * i as f64 + 0.4);
        let v = bergman_apply(KernelId::Hartogs, Evaluable::Symbolic(&f), &[z1, z2], &g).unwrap();
        let want = 0.5 / z2;
        worst = worst.max((v - want).norm() / want.norm());
    }
    (exact_ok && worst <= 1e-4, format!("exact coefficient 1/2: {exact_ok}; max rel err {worst:.3e} (≤ 1e-4)"))
}

fn criterion_2() -> (bool, String) {
    let r = verify_lemma_transfer(4, 20, 20, SEED).unwrap();
    (r.mismatches == 0, format!("{} exact comparisons, {} mismatches", r.comparisons, r.mismatches))
}

fn criterion_3() -> (bool, String) {
    let r = verify_tangential(8, 12);
    (r.exact_zero, format!("{} identities for b ≤ 8, m ≤ 12; exact zero residual: {}", r.checks, r.exact_zero))
}

fn criterion_4() -> (bool, String) {
    let e = verify_kernel_identity(4, 100, SEED, None).unwrap();
    (e <= 1e-10, format!("max rel err {e:.3e} (≤ 1e-10)"))
}

fn criterion_5() -> (bool, String) {
    let e = verify_transformation(100, SEED).unwrap();
    (e <= 1e-12, format!("max rel err {e:.3e} (≤ 1e-12)"))
}

fn criterion_6() -> (bool, String) {
    let g = default_grid(Domain::Hartogs);
    let mut worst: f64 = 0.0;
    let mut cases = vec![(0, 0)];
    for s in 0..=2 {
        for t in -1..=1 {
            cases.push((s, t));
        }
    }
    for (s, t) in cases {
        let f = SymbolicFunction::from_monomial(Monomial::unit(s, t, s, t));
        let v = integrate_value(Evaluable::Symbolic(&f), &g).unwrap().re;
        let want = monomial_integral_hartogs(&int(s as i64), &int(t as i64)).unwrap().to_f64();
        worst = worst.max((v - want).abs() / want);
    }
    let vol_exact = monomial_integral_hartogs(&int(0), &int(0)).unwrap().to_f64();
    let vol_ok = (vol_exact - PI * PI / 2.0).abs() < 1e-15;
    (worst <= 1e-6 && vol_ok, format!("volume and 9 moments, max rel err {worst:.3e} (≤ 1e-6)"))
}

fn criterion_7() -> (bool, String) {
    let fam = TestFamily::standard(SEED);
    let ks = [0, 1, 2];
    let ps = [1.5, 2.0, 3.0, 3.9];
    let base = QuadGrid::new(Domain::Hartogs, probe_grid()).unwrap();
    let fine = QuadGrid::new(Domain::Hartogs, probe_grid().refined()).unwrap();
    let a = probe_main_estimate_multi(&ks, &ps, &fam, &base).unwrap();
    let b = probe_main_estimate_multi(&ks, &ps, &fam, &fine).unwrap();
    let mut worst: f64 = 0.0;
    let mut finite = true;
    for (x, y) in a.iter().zip(&b) {
        finite &= x.max.is_finite() && y.max.is_finite() && x.max > 0.0;
        worst = worst.max((y.max / x.max - 1.0).abs());
    }
    let maxes: Vec<String> = a.iter().map(|r| format!("(k={},p={}):{:.4}", r.k, r.p, r.max)).collect();
    (
        finite && worst <= 0.05,
        format!("max change under doubling {:.3}% (≤ 5%); maxima {}", 100.0 * worst, maxes.join(" ")),
    )
}

fn criterion_8() -> (bool, String) {
    let cut = [1e-1, 1e-2, 1e-3];
    let grid = GridParams::new(24, 32, 1e-3, 0.5);
    let r4 = probe_counterexample(1, 4.0, &cut, &grid).unwrap();
    let step = 2.0 * PI * PI * 0.5f64.powi(4) * 10f64.ln();
    let devs: Vec<f64> = r4.values.windows(2).map(|w| ((w[1] - w[0]) / step - 1.0).abs()).collect();
    let log_ok = devs.iter().all(|d| *d <= 0.10) && r4.fit.verdict == Verdict::LogDivergent;
    let r35 = probe_counterexample(1, 3.5, &cut, &grid).unwrap();
    let d: Vec<f64> = r35.values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let cauchy = d.windows(2).all(|w| w[1] <= w[0] / 2.0) && r35.fit.verdict == Verdict::Bounded;
    (
        log_ok && cauchy,
        format!(
            "p=4 difference deviations {:?} (≤ 10%), verdict {:?}; p=3.5 differences {:?}, verdict {:?}",
            devs.iter().map(|x| format!("{:.2e}", x)).collect::<Vec<_>>(),
            r4.fit.verdict,
            d.iter().map(|x| format!("{:.2e}", x)).collect::<Vec<_>>(),
            r35.fit.verdict
        ),
    )
}

fn criterion_9() -> (bool, String) {
    let g = default_grid(Domain::PuncturedDisc);
    let fs = [
        SymbolicFunction::from_monomial(Monomial::unit(0, 0, 1, 0)),
        SymbolicFunction::from_monomial(Monomial::unit(1, 0, 2, 0)),
        SymbolicFunction::from_monomials([
            Monomial::new(2, 0, 1, 0, GaussRat::new(rat(1, 3), rat(-1, 2))),
            Monomial::unit(0, 0, 3, 0),
            Monomial::new(1, 0, 0, 0, GaussRat::from_int(2)),
        ]),
    ];
    let ws = [c(0.5, 0.0), c(0.3, 0.2), c(-0.2, 0.6)];
    let mut worst: f64 = 0.0;
    for b in 0..=2 {
        for f in &fs {
            for &w in &ws {
                worst = worst.max(verify_ibp(b, f, w, &g).unwrap().relative_error);
            }
        }
    }
    (worst <= 1e-5, format!("b ≤ 2, 3 functions, 3 points: max rel err {worst:.3e} (≤ 1e-5)"))
}

fn criterion_10() -> (bool, String) {
    let fam = TestFamily::standard(SEED);
    let g = QuadGrid::new(Domain::Hartogs, probe_grid()).unwrap();
    let r = probe_main_estimate(0, 2.0, &fam, &g).unwrap();
    (r.max <= 1.0 + 1e-6, format!("max ratio {:.12} (≤ 1 + 1e-6), median {:.6}", r.max, r.median))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("exact counterexample and quadrature projection", criterion_1),
        ("operator-transfer equivalence", criterion_2),
        ("tangential constants", criterion_3),
        ("kernel identity", criterion_4),
        ("transformation formula", criterion_5),
        ("volume and moments", criterion_6),
        ("main-estimate boundedness probe", criterion_7),
        ("sharpness at p = 4", criterion_8),
        ("integration by parts", criterion_9),
        ("L² contraction", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = run();
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] criterion {:>2} ({name}): {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
