//! Subcommand implementations.

use std::f64::consts::PI;

use hartogs::exact::{parse_decimal, rat_to_f64, ExactScalar, ExactScalarJson, GaussRat, Rational};
use hartogs::experiments::*;
use hartogs::kernels::{eval_kernel, KernelId};
use hartogs::monomial_engine::{
    monomial_integral_hartogs, project_hartogs, project_monomial_hartogs, project_monomial_hartogs_truncated,
    sobolev_norm_sq_exact,
};
use hartogs::quadrature::{
    bergman_apply, bergman_apply_with_error, integrate_value, sobolev_norm, Domain, Evaluable, FnBundle, GridParams,
    QuadGrid, SobolevParams,
};
use hartogs::symbolic::{Monomial, SymbolicFunction};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::expr::parse_expr;
use crate::output::{cell, float, to_value, Report, Table};
use crate::{Cmd, Failure, KernelCmd, NormArgs, ProbeCmd, ProjectCmd, VerifyCmd};

type Out = Result<(&'static str, Report), Failure>;

pub(crate) fn dispatch(cmd: Cmd, cfg: &RunConfig) -> Out {
    match cmd {
        Cmd::Kernel(KernelCmd::Eval { id, z, zeta }) => kernel_eval(&id, &z, &zeta),
        Cmd::Project(ProjectCmd::Monomial { a, b, c, d, eps }) => project_monomial(a, b, c, d, eps.as_deref()),
        Cmd::Project(ProjectCmd::Numeric { id, f, at }) => project_numeric(cfg, &id, &f, &at),
        Cmd::Norm(args) => norm(cfg, &args),
        Cmd::Verify(v) => verify(cfg, v),
        Cmd::Probe(p) => probe(cfg, p),
        Cmd::Report => report(cfg),
    }
}

fn parse_point(s: &str, dim: usize) -> Result<Vec<Complex64>, Failure> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("point {s:?} is not a comma-separated list of numbers")))?;
    if parts.len() != 2 * dim {
        return Err(Failure::usage(format!("point {s:?} needs {} numbers, got {}", 2 * dim, parts.len())));
    }
    Ok(parts.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    let v: Vec<T> = s
        .split(',')
        .map(|t| t.trim().parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("{what} {s:?} is not a comma-separated list")))?;
    if v.is_empty() {
        return Err(Failure::usage(format!("{what} is empty")));
    }
    Ok(v)
}

fn parse_kernel(id: &str) -> Result<KernelId, Failure> {
    id.parse::<KernelId>().map_err(Failure::from)
}

fn parse_f(s: &str) -> Result<SymbolicFunction, Failure> {
    parse_expr(s).map_err(|e| Failure::usage(format!("expression {s:?}: {e}")))
}

fn exact_rational(q: &Rational, pi_power: i32) -> Value {
    to_value(&ExactScalarJson::from(&ExactScalar::new(q.clone(), pi_power)))
}

fn grid_for(params: GridParams, domain: Domain) -> Result<QuadGrid, Failure> {
    Ok(QuadGrid::new(domain, params)?)
}

fn kernel_eval(id: &str, z: &str, zeta: &str) -> Out {
    let id = parse_kernel(id)?;
    let z = parse_point(z, id.dim())?;
    let zeta = parse_point(zeta, id.dim())?;
    let v = eval_kernel(id, &z, &zeta)?;
    let mut r = Report::new();
    r.set("id", json!(id.tag())).set_f("value_re", v.re).set_f("value_im", v.im);
    Ok(("kernel eval", r))
}

fn project_monomial(a: i32, b: i32, c: i32, d: i32, eps: Option<&str>) -> Out {
    let m = Monomial::unit(a, b, c, d);
    let t = match eps {
        None => project_monomial_hartogs(&m)?,
        Some(s) => {
            let q = parse_decimal(s).ok_or_else(|| Failure::usage(format!("eps {s:?} is not a decimal")))?;
            project_monomial_hartogs_truncated(&m, &q)?
        }
    };
    let v = t.coeff.to_complex();
    let mut r = Report::new();
    r.set("input", json!([a, b, c, d]))
        .set("coeff", exact_rational(&t.coeff.c.re, t.coeff.pi_power))
        .set("coeff_im", exact_rational(&t.coeff.c.im, t.coeff.pi_power))
        .set_f("coeff_value_re", v.re)
        .set_f("coeff_value_im", v.im)
        .set("alpha", json!(t.alpha))
        .set("beta", json!(t.beta));
    if let Some(s) = eps {
        r.set("eps", json!(s));
    }
    Ok(("project monomial", r))
}

fn domain_of(id: KernelId) -> Domain {
    match id {
        KernelId::Hartogs | KernelId::ProductModel => Domain::Hartogs,
        KernelId::Disc => Domain::Disc,
        KernelId::PuncturedDisc | KernelId::WeightedPuncturedDisc => Domain::PuncturedDisc,
    }
}

fn project_numeric(cfg: &RunConfig, id: &str, f: &str, at: &str) -> Out {
    let id = parse_kernel(id)?;
    let f = parse_f(f)?;
    let z = parse_point(at, id.dim())?;
    let g = grid_for(cfg.grid.params(), domain_of(id))?;
    let est = bergman_apply_with_error(id, Evaluable::Symbolic(&f), &z, &g)?;
    let mut r = Report::new();
    r.set("id", json!(id.tag()))
        .set_f("value_re", est.value.re)
        .set_f("value_im", est.value.im)
        .set_f("error_estimate", est.error_estimate)
        .set("grid_fingerprint", json!(g.fingerprint()));
    if id == KernelId::Hartogs {
        // exact image when f is square integrable
        if let Ok(img) = project_hartogs(&f, None) {
            let e = img.eval([z[0], z[1]])?;
            r.set_f("exact_re", e.re).set_f("exact_im", e.im);
        }
    }
    Ok(("project numeric", r))
}

fn norm(cfg: &RunConfig, a: &NormArgs) -> Out {
    let f = parse_f(&a.f)?;
    let s_q = parse_decimal(&a.s).ok_or_else(|| Failure::usage(format!("s {:?} is not a decimal", a.s)))?;
    let params = SobolevParams::new(a.k, a.p, rat_to_f64(&s_q))?;
    let g = grid_for(cfg.grid.params(), Domain::Hartogs)?;
    let bundle = FnBundle::new(&f, a.k);
    let value = sobolev_norm(&bundle, params, &g)?;
    let coarse = grid_for(coarsened(&cfg.grid.params()), Domain::Hartogs)?;
    let rough = sobolev_norm(&bundle, params, &coarse)?;
    let mut r = Report::new();
    r.set("k", json!(a.k))
        .set_f("p", a.p)
        .set_f("s", params.s)
        .set_f("value", value)
        .set_f("error_estimate", (value - rough).abs())
        .set("grid_fingerprint", json!(g.fingerprint()));
    if a.p == 2.0 {
        let h = s_q / Rational::from_integer(2.into());
        if let Ok(x) = sobolev_norm_sq_exact(&f, a.k, &h) {
            r.set("exact_norm_sq", to_value(&ExactScalarJson::from(&x))).set_f("exact_value", x.to_f64().sqrt());
        }
    }
    Ok(("norm", r))
}

/// Half the cells and angles of `g`: the reference for error estimates
/// where a refined grid would be too costly.
fn coarsened(g: &GridParams) -> GridParams {
    GridParams {
        radial_cells: (g.radial_cells / 2).max(1),
        angular_count: (g.angular_count / 2).max(1),
        inner_radial_cells: Some((g.inner_cells() / 2).max(1)),
        inner_angular_count: Some((g.inner_angles() / 2).max(1)),
        ..g.clone()
    }
}

fn divergence_table(rep: &DivergenceReport, tag: &[(&str, String)]) -> Table {
    let mut header: Vec<&str> = tag.iter().map(|(k, _)| *k).collect();
    header.extend(["cutoff", "value", "norm", "grid_fingerprint"]);
    let mut t = Table::new(&header);
    for i in 0..rep.cutoffs.len() {
        let mut row: Vec<String> = tag.iter().map(|(_, v)| v.clone()).collect();
        row.extend([cell(rep.cutoffs[i]), cell(rep.values[i]), cell(rep.norms[i]), rep.grid_fingerprints[i].clone()]);
        t.push(row);
    }
    t
}

fn verify(cfg: &RunConfig, v: VerifyCmd) -> Out {
    let mut r = Report::new();
    match v {
        VerifyCmd::LemmaTransfer { beta_max, monomials, points } => {
            let rep = verify_lemma_transfer(beta_max, monomials, points, cfg.seed)?;
            let passed = rep.mismatches == 0;
            r.failed = !passed;
            r.set("report", to_value(&rep)).set("passed", json!(passed));
            Ok(("verify lemma-transfer", r))
        }
        VerifyCmd::Tangential { b, m_max } => {
            let rep = verify_tangential(b, m_max);
            r.failed = !rep.exact_zero;
            r.set("b_max", json!(rep.b_max))
                .set("m_max", json!(rep.m_max))
                .set("checks", json!(rep.checks))
                .set("max_abs_residual", if rep.exact_zero { json!(0) } else { float(rep.max_abs_residual) })
                .set("exact_zero", json!(rep.exact_zero));
            Ok(("verify tangential", r))
        }
        VerifyCmd::KernelIdentity { b_max, samples, modulus } => {
            if let Some(m) = modulus {
                if !(m > 0.0 && m < 1.0) {
                    return Err(Failure::usage(format!("modulus {m} must lie in (0, 1)")));
                }
            }
            let e = verify_kernel_identity(b_max, samples, cfg.seed, modulus)?;
            let tol = if modulus.is_some() { 1e-8 } else { 1e-10 };
            let passed = e <= tol;
            r.failed = !passed;
            r.set("b_max", json!(b_max))
                .set("samples", json!(samples))
                .set_f("max_relative_error", e)
                .set_f("tolerance", tol)
                .set("passed", json!(passed));
            Ok(("verify kernel-identity", r))
        }
        VerifyCmd::Ibp { b, f, w2 } => {
            let f = parse_f(&f)?;
            let w = parse_point(&w2, 1)?[0];
            let g = grid_for(cfg.grid.params(), Domain::PuncturedDisc)?;
            let rep = verify_ibp(b, &f, w, &g)?;
            r.set("report", to_value(&rep));
            Ok(("verify ibp", r))
        }
        VerifyCmd::B2 { p, cutoffs, family_size } => {
            let cut = parse_list::<f64>(&cutoffs, "cutoffs")?;
            let fam = TestFamily::generate(FamilySpec::planar(family_size, cfg.seed));
            let rep = verify_lemma_b2(p, &fam, &cut, &cfg.probe.params())?;
            r.divergent = rep.verdict.is_divergent();
            r.table = Some(divergence_table(&rep.truncations, &[("p", cell(p))]));
            r.set("report", to_value(&rep));
            Ok(("verify b2", r))
        }
    }
}

fn probe(cfg: &RunConfig, p: ProbeCmd) -> Out {
    let mut r = Report::new();
    match p {
        ProbeCmd::Estimate { k, p, family_size } => {
            let ks = parse_list::<u32>(&k, "k")?;
            let ps = parse_list::<f64>(&p, "p")?;
            if let Some(bad) = ps.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
                return Err(Failure::usage(format!("p = {bad} must lie in (1, ∞)")));
            }
            let fam = TestFamily::generate(FamilySpec::hartogs(family_size, cfg.seed));
            let g = grid_for(cfg.probe.params(), Domain::Hartogs)?;
            let reps = probe_main_estimate_multi(&ks, &ps, &fam, &g)?;
            let mut t = Table::new(&["k", "p", "member", "ratio"]);
            for rep in &reps {
                for (i, x) in rep.ratios.iter().enumerate() {
                    t.push(vec![rep.k.to_string(), cell(rep.p), i.to_string(), cell(*x)]);
                }
            }
            r.table = Some(t);
            r.set("reports", to_value(&reps));
            Ok(("probe estimate", r))
        }
        ProbeCmd::Window { p, cutoffs, family_size } => {
            let ps = parse_list::<f64>(&p, "p")?;
            let cut = parse_list::<f64>(&cutoffs, "cutoffs")?;
            if let Some(bad) = ps.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
                return Err(Failure::usage(format!("p = {bad} must lie in (1, ∞)")));
            }
            let fam = TestFamily::generate(FamilySpec::hartogs(family_size, cfg.seed));
            let entries = probe_lp_window(&ps, &fam, &cut, &cfg.probe.params())?;
            let mut t = Table::new(&["p", "cutoff", "value", "ratio", "verdict", "grid_fingerprint"]);
            for e in &entries {
                for i in 0..e.truncations.cutoffs.len() {
                    t.push(vec![
                        cell(e.p),
                        cell(e.truncations.cutoffs[i]),
                        cell(e.truncations.values[i]),
                        cell(e.truncation_ratios[i]),
                        to_value(&e.verdict).as_str().unwrap_or_default().to_string(),
                        e.truncations.grid_fingerprints[i].clone(),
                    ]);
                }
            }
            r.divergent = entries.iter().any(|e| e.verdict.is_divergent());
            r.table = Some(t);
            r.set("entries", to_value(&entries));
            Ok(("probe window", r))
        }
        ProbeCmd::Counterexample { k, p, cutoffs } => {
            let cut = parse_list::<f64>(&cutoffs, "cutoffs")?;
            if !(p > 1.0 && p.is_finite()) {
                return Err(Failure::usage(format!("p = {p} must lie in (1, ∞)")));
            }
            let rep = probe_counterexample(k, p, &cut, &cfg.probe.params())?;
            r.divergent = rep.fit.verdict.is_divergent();
            r.table = Some(divergence_table(&rep, &[("k", k.to_string()), ("p", cell(p))]));
            r.set("k", json!(k)).set_f("p", p).set("report", to_value(&rep));
            Ok(("probe counterexample", r))
        }
    }
}

/// One line of the full report.
struct Check {
    name: &'static str,
    passed: bool,
    detail: Value,
}

fn report(cfg: &RunConfig) -> Out {
    let seed = cfg.seed;
    let hartogs = grid_for(cfg.grid.params(), Domain::Hartogs)?;
    let punctured = grid_for(cfg.grid.params(), Domain::PuncturedDisc)?;
    let probe_base = grid_for(cfg.probe.params(), Domain::Hartogs)?;
    let probe_fine = grid_for(cfg.probe.params().refined(), Domain::Hartogs)?;
    let mut checks = Vec::new();

    let t = project_monomial_hartogs(&Monomial::unit(0, 0, 0, 1))?;
    let exact_ok = (t.alpha, t.beta) == (0, -1) && t.coeff.c == GaussRat::from_ratio(1, 2) && t.coeff.pi_power == 0;
    let zb2 = SymbolicFunction::from_monomial(Monomial::unit(0, 0, 0, 1));
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let z2 = Complex64::from_polar(0.2 + 0.06 * i as f64, 0.7 * i as f64);
        let z1 = z2 * Complex64::from_polar(0.05 * i as f64, 1.3 * i as f64 + 0.4);
        let v = bergman_apply(KernelId::Hartogs, Evaluable::Symbolic(&zb2), &[z1, z2], &hartogs)?;
        worst = worst.max((v - 0.5 / z2).norm() / (0.5 / z2).norm());
    }
    checks.push(Check {
        name: "counterexample projection",
        passed: exact_ok && worst <= 1e-4,
        detail: json!({"exact_coefficient_half": exact_ok, "max_relative_error": float(worst)}),
    });

    let tr = verify_lemma_transfer(4, 20, 20, seed)?;
    checks.push(Check { name: "operator transfer", passed: tr.mismatches == 0, detail: to_value(&tr) });

    let tg = verify_tangential(8, 12);
    checks.push(Check { name: "tangential constants", passed: tg.exact_zero, detail: to_value(&tg) });

    let ki = verify_kernel_identity(4, 100, seed, None)?;
    checks.push(Check {
        name: "kernel identity",
        passed: ki <= 1e-10,
        detail: json!({"max_relative_error": float(ki)}),
    });

    let tf = verify_transformation(100, seed)?;
    checks.push(Check {
        name: "transformation formula",
        passed: tf <= 1e-12,
        detail: json!({"max_relative_error": float(tf)}),
    });

    let mut worst: f64 = 0.0;
    for s in 0..=2 {
        for t in -1..=1 {
            let f = SymbolicFunction::from_monomial(Monomial::unit(s, t, s, t));
            let v = integrate_value(Evaluable::Symbolic(&f), &hartogs)?.re;
            let want = monomial_integral_hartogs(&Rational::from_integer(s.into()), &Rational::from_integer(t.into()))?
                .to_f64();
            worst = worst.max((v - want).abs() / want);
        }
    }
    let vol = integrate_value(Evaluable::Symbolic(&SymbolicFunction::constant(GaussRat::one())), &hartogs)?.re;
    worst = worst.max((vol / (PI * PI / 2.0) - 1.0).abs());
    checks.push(Check {
        name: "volume and moments",
        passed: worst <= 1e-6,
        detail: json!({"max_relative_error": float(worst)}),
    });

    let fam = TestFamily::standard(seed);
    let ks = [0, 1, 2];
    let ps = [1.5, 2.0, 3.0, 3.9];
    let a = probe_main_estimate_multi(&ks, &ps, &fam, &probe_base)?;
    let b = probe_main_estimate_multi(&ks, &ps, &fam, &probe_fine)?;
    let mut change: f64 = 0.0;
    let mut finite = true;
    for (x, y) in a.iter().zip(&b) {
        finite &= x.max.is_finite() && y.max.is_finite() && x.max > 0.0;
        change = change.max((y.max / x.max - 1.0).abs());
    }
    let maxima: Vec<Value> = a.iter().map(|r| json!({"k": r.k, "p": float(r.p), "max": float(r.max)})).collect();
    checks.push(Check {
        name: "main-estimate probe",
        passed: finite && change <= 0.05,
        detail: json!({"max_change_under_refinement": float(change), "maxima": maxima}),
    });

    let cut = [1e-1, 1e-2, 1e-3];
    let r4 = probe_counterexample(1, 4.0, &cut, &cfg.probe.params())?;
    let step = 2.0 * PI * PI * 0.5f64.powi(4) * 10f64.ln();
    let devs: Vec<f64> = r4.values.windows(2).map(|w| ((w[1] - w[0]) / step - 1.0).abs()).collect();
    let r35 = probe_counterexample(1, 3.5, &cut, &cfg.probe.params())?;
    let d: Vec<f64> = r35.values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let sharp = devs.iter().all(|x| *x <= 0.10)
        && r4.fit.verdict == Verdict::LogDivergent
        && d.windows(2).all(|w| w[1] <= w[0] / 2.0)
        && r35.fit.verdict == Verdict::Bounded;
    checks.push(Check {
        name: "sharpness at p = 4",
        passed: sharp,
        detail: json!({"p4": to_value(&r4), "p4_difference_deviations": to_value(&devs), "p3_5": to_value(&r35)}),
    });

    let fs = [parse_f("wb")?, parse_f("w*wb^2")?, parse_f("(1/3 - 0.5*i)*w^2*wb + wb^3 + 2*w")?];
    let ws = [Complex64::new(0.5, 0.0), Complex64::new(0.3, 0.2), Complex64::new(-0.2, 0.6)];
    let mut worst: f64 = 0.0;
    for b in 0..=2 {
        for f in &fs {
            for &w in &ws {
                worst = worst.max(verify_ibp(b, f, w, &punctured)?.relative_error);
            }
        }
    }
    checks.push(Check {
        name: "integration by parts",
        passed: worst <= 1e-5,
        detail: json!({"max_relative_error": float(worst)}),
    });

    let l2 = a.iter().find(|r| r.k == 0 && r.p == 2.0).expect("k = 0, p = 2 is probed");
    checks.push(Check {
        name: "L2 contraction",
        passed: l2.max <= 1.0 + 1e-6,
        detail: json!({"max_ratio": float(l2.max), "median": float(l2.median)}),
    });

    let mut r = Report::new();
    let mut t = Table::new(&["check", "passed"]);
    for c in &checks {
        t.push(vec![c.name.to_string(), c.passed.to_string()]);
    }
    r.failed = checks.iter().any(|c| !c.passed);
    r.table = Some(t);
    r.set("all_passed", json!(!r.failed)).set(
        "checks",
        Value::Array(
            checks.into_iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect(),
        ),
    );
    Ok(("report", r))
}
