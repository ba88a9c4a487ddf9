//! Probes and verifications built on the exact engine and the quadrature.
//!
//! Every driver is deterministic given its seed and grid parameters, and
//! returns a serializable report.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exact::{int, rat, GaussRat, Rational};
use crate::kernels::{eval_kernel, jacobian_det_psi, map_psi, KernelExpr, KernelId};
use crate::monomial_engine::{apply_b2_monomial, project_hartogs, sobolev_norm_sq_exact};
use crate::operator_calculus::{
    apply_tangential_raw, apply_woperator_exact, euler_to_tangential, tangential_power, transfer_dz, MultiIndex2,
};
use crate::quadrature::{
    op_apply, planar_lp_power, sobolev_order_powers, Domain, Evaluable, FnBundle, GridParams, NormRequest, PlanarOp,
    QuadGrid,
};
use crate::symbolic::{Monomial, Slot, SymbolicFunction};
use crate::{Error, Result};

/// Generator parameters of a [`TestFamily`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySpec {
    pub size: usize,
    pub degree_cap: i32,
    pub max_terms: usize,
    pub seed: u64,
    /// Polynomials in `z₁, z̄₁` only (planar families).
    pub planar: bool,
}

impl FamilySpec {
    pub fn hartogs(size: usize, seed: u64) -> Self {
        Self { size, degree_cap: 3, max_terms: 4, seed, planar: false }
    }

    pub fn planar(size: usize, seed: u64) -> Self {
        Self { size, degree_cap: 3, max_terms: 4, seed, planar: true }
    }
}

/// Seeded random polynomials with small Gaussian-rational coefficients.
#[derive(Clone, Debug)]
pub struct TestFamily {
    pub spec: FamilySpec,
    pub members: Vec<SymbolicFunction>,
}

fn random_coeff(rng: &mut ChaCha8Rng) -> GaussRat {
    loop {
        let re = rat(rng.gen_range(-4..=4), rng.gen_range(1..=4));
        let im = rat(rng.gen_range(-4..=4), rng.gen_range(1..=4));
        let c = GaussRat::new(re, im);
        if !c.is_zero() {
            return c;
        }
    }
}

fn random_exponents(rng: &mut ChaCha8Rng, cap: i32, planar: bool) -> [i32; 4] {
    loop {
        let e = if planar {
            [rng.gen_range(0..=cap), 0, rng.gen_range(0..=cap), 0]
        } else {
            [rng.gen_range(0..=cap), rng.gen_range(0..=cap), rng.gen_range(0..=cap), rng.gen_range(0..=cap)]
        };
        if e.iter().sum::<i32>() <= cap {
            return e;
        }
    }
}

impl TestFamily {
    pub fn generate(spec: FamilySpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut members = Vec::with_capacity(spec.size);
        while members.len() < spec.size {
            let n = rng.gen_range(1..=spec.max_terms);
            let mut f = SymbolicFunction::zero();
            for _ in 0..n {
                let e = random_exponents(&mut rng, spec.degree_cap, spec.planar);
                f.add_term(e, &random_coeff(&mut rng));
            }
            if !f.is_zero() {
                members.push(f);
            }
        }
        Self { spec, members }
    }

    /// The default 50-member family over `H`.
    pub fn standard(seed: u64) -> Self {
        Self::generate(FamilySpec::hartogs(50, seed))
    }
}

/// Ratios `‖B f‖_{k,p,kp} / ‖f‖_{k,p}` over a family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub k: u32,
    pub p: f64,
    pub ratios: Vec<f64>,
    pub max: f64,
    pub median: f64,
    /// Whether the norms were evaluated exactly (`p = 2`).
    pub exact: bool,
    pub grid_fingerprints: Vec<String>,
}

impl RatioReport {
    fn new(k: u32, p: f64, ratios: Vec<f64>, exact: bool, fingerprints: Vec<String>) -> Self {
        let mut sorted = ratios.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = match n {
            0 => f64::NAN,
            _ if n % 2 == 1 => sorted[n / 2],
            _ => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
        };
        let max = sorted.last().copied().unwrap_or(f64::NAN);
        Self { k, p, ratios, max, median, exact, grid_fingerprints: fingerprints }
    }
}

fn membership(v: f64, i: usize) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::FamilyMembership(format!("member {i} has source norm {v}")))
    }
}

/// Main-estimate probe for all `(k, p)` pairs at once: one bundle and one
/// grid pass per family member. `p = 2` uses the exact engine.
pub fn probe_main_estimate_multi(
    ks: &[u32],
    ps: &[f64],
    family: &TestFamily,
    grid: &QuadGrid,
) -> Result<Vec<RatioReport>> {
    if grid.domain != Domain::Hartogs {
        return Err(Error::Config("the main estimate needs a hartogs grid".into()));
    }
    for &p in ps {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("p = {p} must lie in (1, ∞)")));
        }
    }
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let numeric_ps: Vec<f64> = ps.iter().copied().filter(|&p| p != 2.0).collect();
    let mut ratios = vec![vec![0.0; family.members.len()]; ks.len() * ps.len()];

    for (i, f) in family.members.iter().enumerate() {
        let bf = project_hartogs(f, None)?;
        let src = FnBundle::new(f, kmax);
        let tgt = FnBundle::new(&bf, kmax);
        let src_req: Vec<NormRequest> = numeric_ps.iter().map(|&p| NormRequest { p, s: 0.0 }).collect();
        let mut tgt_req = Vec::new();
        for &k in ks {
            for &p in &numeric_ps {
                tgt_req.push(NormRequest { p, s: k as f64 * p });
            }
        }
        let (sp, tp) = if numeric_ps.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            (sobolev_order_powers(&src, &src_req, grid)?, sobolev_order_powers(&tgt, &tgt_req, grid)?)
        };
        for (ki, &k) in ks.iter().enumerate() {
            for (pi, &p) in ps.iter().enumerate() {
                let r = if p == 2.0 {
                    let num = sobolev_norm_sq_exact(&bf, k, &int(k as i64))?.to_f64();
                    let den = membership(sobolev_norm_sq_exact(f, k, &Rational::zero())?.to_f64(), i)?;
                    (num / den).sqrt()
                } else {
                    let npi = numeric_ps.iter().position(|&q| q == p).unwrap();
                    let den: f64 = sp[npi][..=k as usize].iter().sum();
                    let num: f64 = tp[ki * numeric_ps.len() + npi][..=k as usize].iter().sum();
                    (num / membership(den, i)?).powf(1.0 / p)
                };
                ratios[ki * ps.len() + pi][i] = r;
            }
        }
    }
    let fp = vec![grid.fingerprint()];
    let mut out = Vec::new();
    for (ki, &k) in ks.iter().enumerate() {
        for (pi, &p) in ps.iter().enumerate() {
            let r = std::mem::take(&mut ratios[ki * ps.len() + pi]);
            out.push(RatioReport::new(k, p, r, p == 2.0, fp.clone()));
        }
    }
    Ok(out)
}

/// `‖B f‖_{k,p,kp} / ‖f‖_{k,p}` over a family.
pub fn probe_main_estimate(k: u32, p: f64, family: &TestFamily, grid: &QuadGrid) -> Result<RatioReport> {
    Ok(probe_main_estimate_multi(&[k], &[p], family, grid)?.remove(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Bounded,
    LogDivergent,
    PowerDivergent,
}

impl Verdict {
    pub fn is_divergent(self) -> bool {
        self != Verdict::Bounded
    }
}

/// Least-squares fit `v ≈ a + b·log(1/ε)` with the trend diagnostics used
/// for the verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceFit {
    pub intercept: f64,
    pub slope: f64,
    pub residual: f64,
    pub relative_slope: f64,
    /// Growth of successive differences per unit of `log(1/ε)`.
    pub difference_ratio: f64,
    pub verdict: Verdict,
}

/// Classify a sequence of values along decreasing cutoffs.
///
/// Bounded if the relative log-slope is below 0.05 or the differences
/// shrink by more than 2× per step; log-divergent if they stay within a
/// factor 2; power-divergent if they grow by 2× or more.
pub fn divergence_fit(cutoffs: &[f64], values: &[f64]) -> DivergenceFit {
    let x: Vec<f64> = cutoffs.iter().map(|e| (1.0 / e).ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, values.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = x.iter().zip(values).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>().sqrt();
    let last = values.last().copied().unwrap_or(0.0).abs();
    let relative_slope = if last > 0.0 { slope / last } else { 0.0 };

    let rates: Vec<f64> = (1..values.len()).map(|i| (values[i] - values[i - 1]) / (x[i] - x[i - 1])).collect();
    let mut logs = Vec::new();
    for w in rates.windows(2) {
        if w[0] == 0.0 {
            logs.push(if w[1] == 0.0 { 0.0 } else { f64::INFINITY });
        } else {
            logs.push((w[1] / w[0]).abs().ln());
        }
    }
    let difference_ratio = if logs.is_empty() { 0.0 } else { (logs.iter().sum::<f64>() / logs.len() as f64).exp() };

    let verdict = if relative_slope.abs() < 0.05 || difference_ratio < 0.5 {
        Verdict::Bounded
    } else if difference_ratio < 2.0 {
        Verdict::LogDivergent
    } else {
        Verdict::PowerDivergent
    };
    DivergenceFit { intercept, slope, residual, relative_slope, difference_ratio, verdict }
}

/// Norm values along a cutoff sequence with the fitted trend.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub cutoffs: Vec<f64>,
    /// `p`-th powers of the probed (semi)norm.
    pub values: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit: DivergenceFit,
    pub grid_fingerprints: Vec<String>,
}

fn check_cutoffs(cutoffs: &[f64]) -> Result<()> {
    if cutoffs.len() < 2 {
        return Err(Error::Config("need at least two cutoffs".into()));
    }
    if cutoffs.iter().any(|&e| !(e > 0.0 && e < 1.0)) || cutoffs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("cutoffs must lie in (0,1) and decrease strictly".into()));
    }
    Ok(())
}

fn divergence_report(cutoffs: &[f64], values: Vec<f64>, p: f64, fps: Vec<String>) -> DivergenceReport {
    let norms = values.iter().map(|v| v.powf(1.0 / p)).collect();
    let fit = divergence_fit(cutoffs, &values);
    DivergenceReport { cutoffs: cutoffs.to_vec(), values, norms, fit, grid_fingerprints: fps }
}

/// The projection of `z̄₂`, computed by the exact engine.
pub fn counterexample_image() -> Result<SymbolicFunction> {
    project_hartogs(&SymbolicFunction::from_monomial(Monomial::unit(0, 0, 0, 1)), None)
}

/// Top weighted seminorm `Σ_{|α|=k} ∫_{|z₂|>ε} |D^α B(z̄₂)|^p |z₂|^{kp}` for
/// each cutoff.
pub fn probe_counterexample(k: u32, p: f64, cutoffs: &[f64], grid: &GridParams) -> Result<DivergenceReport> {
    check_cutoffs(cutoffs)?;
    let bundle = FnBundle::new(&counterexample_image()?, k);
    let mut values = Vec::new();
    let mut fps = Vec::new();
    for &eps in cutoffs {
        let g = QuadGrid::new(Domain::Hartogs, grid.with_eps(eps))?;
        let pw = sobolev_order_powers(&bundle, &[NormRequest { p, s: k as f64 * p }], &g)?;
        values.push(pw[0][k as usize]);
        fps.push(g.fingerprint());
    }
    Ok(divergence_report(cutoffs, values, p, fps))
}

/// One exponent of the `L^p` window probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowEntry {
    pub p: f64,
    /// Ratios `‖B f‖_p / ‖f‖_p` over the polynomial family on the base grid.
    pub family: RatioReport,
    /// `‖B f_ε‖_p^p` for `f_ε = z̄₂·χ_{|z₂|>ε}`, norms over `|z₂| > ε`.
    pub truncations: DivergenceReport,
    pub truncation_ratios: Vec<f64>,
    pub verdict: Verdict,
}

/// `L^p` boundedness probe on `H` for each `p`.
pub fn probe_lp_window(
    p_list: &[f64],
    family: &TestFamily,
    cutoffs: &[f64],
    grid: &GridParams,
) -> Result<Vec<WindowEntry>> {
    check_cutoffs(cutoffs)?;
    let base = QuadGrid::new(Domain::Hartogs, grid.clone())?;
    let reports = probe_main_estimate_multi(&[0], p_list, family, &base)?;
    let zb2 = SymbolicFunction::from_monomial(Monomial::unit(0, 0, 0, 1));
    let src = FnBundle::new(&zb2, 0);
    let mut out = Vec::new();
    for (p, family_report) in p_list.iter().copied().zip(reports) {
        let mut values = Vec::new();
        let mut ratios = Vec::new();
        let mut fps = Vec::new();
        for &eps in cutoffs {
            let g = QuadGrid::new(Domain::Hartogs, grid.with_eps(eps))?;
            let q = Rational::from_float(eps).ok_or_else(|| Error::Config("cutoff is not finite".into()))?;
            let image = project_hartogs(&zb2, Some(&q))?;
            let req = [NormRequest { p, s: 0.0 }];
            let num = sobolev_order_powers(&FnBundle::new(&image, 0), &req, &g)?[0][0];
            let den = sobolev_order_powers(&src, &req, &g)?[0][0];
            values.push(num);
            ratios.push((num / den).powf(1.0 / p));
            fps.push(g.fingerprint());
        }
        let truncations = divergence_report(cutoffs, values, p, fps);
        let verdict = truncations.fit.verdict;
        out.push(WindowEntry { p, family: family_report, truncations, truncation_ratios: ratios, verdict });
    }
    Ok(out)
}

fn sample_annulus(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(rng.gen_range(lo..hi), rng.gen_range(0.0..2.0 * PI))
}

/// Maximum relative difference between `∂^b_w K_W(w, η)` and
/// `(η̄^b / w^b) ∂^b_{η̄} K_W(w, η)` for `b ≤ b_max` at seeded samples with
/// `|w|, |η| ∈ (0.1, 0.9)`; with `product_modulus = Some(ρ)` the samples
/// instead satisfy `|wη̄| = ρ`.
pub fn verify_kernel_identity(b_max: u32, sample_count: usize, seed: u64, product_modulus: Option<f64>) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let pairs: Vec<(Complex64, Complex64)> = (0..sample_count)
        .map(|_| match product_modulus {
            None => (sample_annulus(&mut rng, 0.1, 0.9), sample_annulus(&mut rng, 0.1, 0.9)),
            Some(rho) => {
                let w = sample_annulus(&mut rng, rho, 1.0);
                let eta = Complex64::from_polar(rho / w.norm(), rng.gen_range(0.0..2.0 * PI));
                (w, eta)
            }
        })
        .collect();
    for b in 0..=b_max {
        let dw = KernelExpr::weighted_punctured().diff_x_n(b);
        let deta = KernelExpr::weighted_punctured().diff_y_n(b);
        for &(w, eta) in &pairs {
            let y = eta.conj();
            let lhs = dw.eval(w, y)?;
            let rhs = y.powi(b as i32) / w.powi(b as i32) * deta.eval(w, y)?;
            let rel = (lhs - rhs).norm() / lhs.norm();
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

/// Maximum relative difference between the product-model kernel and
/// `B_H(Ψ(w), Ψ(η)) · det JΨ(w) · conj(det JΨ(η))` at seeded points.
pub fn verify_transformation(sample_count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..sample_count {
        let w = [sample_annulus(&mut rng, 0.0, 0.95), sample_annulus(&mut rng, 0.05, 0.95)];
        let eta = [sample_annulus(&mut rng, 0.0, 0.95), sample_annulus(&mut rng, 0.05, 0.95)];
        let prod = eval_kernel(KernelId::ProductModel, &w, &eta)?;
        let h = eval_kernel(KernelId::Hartogs, &map_psi(w), &map_psi(eta))?;
        let moved = h * jacobian_det_psi(w) * jacobian_det_psi(eta).conj();
        worst = worst.max((prod - moved).norm() / prod.norm());
    }
    Ok(worst)
}

/// Outcome of the exact derivative-transfer check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    pub beta_max: u32,
    pub operators: usize,
    pub monomials: usize,
    pub points: usize,
    pub comparisons: usize,
    pub mismatches: usize,
}

fn random_gauss_point(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> GaussRat {
    // a rational point of modulus in (lo/10, hi/10) along a rational direction
    loop {
        let re = rat(rng.gen_range(-hi..=hi), 10);
        let im = rat(rng.gen_range(-hi..=hi), 10);
        let g = GaussRat::new(re, im);
        let n = g.norm_sqr();
        if n > rat(lo * lo, 100) && n < rat(hi * hi, 100) {
            return g;
        }
    }
}

/// Check `transfer_dz(β)(g∘Ψ) = (D^β g)∘Ψ` exactly for all `|β| ≤ beta_max`
/// on seeded monomials and rational points of `D × D*`.
pub fn verify_lemma_transfer(beta_max: u32, monomials: usize, points: usize, seed: u64) -> Result<TransferReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gs: Vec<SymbolicFunction> = (0..monomials)
        .map(|_| {
            let e = [rng.gen_range(0..=4), rng.gen_range(-2..=4), rng.gen_range(0..=2), rng.gen_range(0..=2)];
            SymbolicFunction::from_monomial(Monomial::new(e[0], e[1], e[2], e[3], random_coeff(&mut rng)))
        })
        .collect();
    let pts: Vec<[GaussRat; 2]> =
        (0..points).map(|_| [random_gauss_point(&mut rng, 0, 9), random_gauss_point(&mut rng, 1, 9)]).collect();
    let betas = MultiIndex2::up_to(beta_max);
    let mut report =
        TransferReport { beta_max, operators: betas.len(), monomials, points, comparisons: 0, mismatches: 0 };
    for beta in betas {
        let op = transfer_dz(beta);
        for g in &gs {
            let pulled = g.pullback_psi();
            let direct = g.diff_multi([beta.0, beta.1, 0, 0]).pullback_psi();
            for w in &pts {
                let lhs = apply_woperator_exact(&op, &pulled, w)?;
                let rhs = direct.eval_exact(w)?;
                report.comparisons += 1;
                if lhs != rhs {
                    report.mismatches += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Exact residuals of `Σ_j c_j m^{(j)} = (−m/(2i))^b` for the tangential
/// power coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TangentialReport {
    pub b_max: usize,
    pub m_max: i64,
    pub checks: usize,
    pub max_abs_residual: f64,
    pub exact_zero: bool,
}

pub fn verify_tangential(b_max: usize, m_max: i64) -> TangentialReport {
    let mut worst: f64 = 0.0;
    let mut exact_zero = true;
    let mut checks = 0;
    let lambda_unit = GaussRat::i() * GaussRat::from_ratio(1, 2); // −1/(2i) = i/2
    for b in 0..=b_max {
        let form = tangential_power(b);
        for m in 0..=m_max {
            let mut lhs = GaussRat::zero();
            let mut falling = Rational::one();
            for (j, c) in form.coeffs().iter().enumerate() {
                if j > 0 {
                    falling *= int(m - j as i64 + 1);
                }
                lhs += &(c * &falling);
            }
            let mut rhs = GaussRat::one();
            let lam = &lambda_unit * &int(m);
            for _ in 0..b {
                rhs *= &lam;
            }
            let r = &lhs - &rhs;
            checks += 1;
            if !r.is_zero() {
                exact_zero = false;
                worst = worst.max(r.abs_f64());
            }
        }
    }
    TangentialReport { b_max, m_max, checks, max_abs_residual: worst, exact_zero }
}

/// Both sides of the integration-by-parts identity on `D*`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IbpReport {
    pub b: u32,
    pub w2: [f64; 2],
    pub direct: [f64; 2],
    pub by_parts: [f64; 2],
    pub relative_error: f64,
    pub grid_fingerprint: String,
}

/// Compare `∫ ∂^b_w K_W(w, η) f(η) |η|² dA` with
/// `w^{−b} Σ_j (−1)^j d_j ∫ K_W(w, η) T^j f(η) |η|² dA`, where
/// `η̄^b ∂^b_{η̄} = Σ_j d_j T^j` on antiholomorphic functions. `f` is a
/// polynomial in the first variable slot. Where the identity's value is
/// zero by symmetry, the error is taken relative to `∫ |integrand|`.
pub fn verify_ibp(b: u32, f: &SymbolicFunction, w2: Complex64, grid: &QuadGrid) -> Result<IbpReport> {
    if !grid.domain.is_planar() {
        return Err(Error::Config("verify_ibp needs a planar grid".into()));
    }
    if !grid.contains(&[w2]) || w2.norm() <= grid.eps_min() {
        return Err(Error::Domain(format!("w₂ = {w2} is outside the truncated punctured disc")));
    }
    let kernel =
        |expr: &KernelExpr, eta: Complex64| expr.eval(w2, eta.conj()).unwrap_or(Complex64::new(f64::NAN, 0.0)) / PI;
    let dk = KernelExpr::weighted_punctured().diff_x_n(b);
    let direct_integrand = |p: &[Complex64]| kernel(&dk, p[0]) * Evaluable::Symbolic(f).eval(p) * p[0].norm_sqr();
    let direct = planar_integral(&direct_integrand, grid)?;
    let mass = planar_integral(&|p: &[Complex64]| Complex64::new(direct_integrand(p).norm(), 0.0), grid)?.re;
    let k0 = KernelExpr::weighted_punctured();
    let d = euler_to_tangential(b as usize);
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, dj) in d.iter().enumerate() {
        if dj.is_zero() {
            continue;
        }
        let tf = apply_tangential_raw(f, Slot::First, j as u32);
        let g = |p: &[Complex64]| kernel(&k0, p[0]) * Evaluable::Symbolic(&tf).eval(p) * p[0].norm_sqr();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += planar_integral(&g, grid)? * dj.to_complex() * sign;
    }
    let by_parts = acc / w2.powi(b as i32);
    // when the value cancels to roundoff, measure against the integrand's
    // absolute mass instead
    let mut scale = direct.norm().max(by_parts.norm());
    if scale <= 1e-10 * mass {
        scale = mass;
    }
    let relative_error = if scale == 0.0 { 0.0 } else { (direct - by_parts).norm() / scale };
    Ok(IbpReport {
        b,
        w2: [w2.re, w2.im],
        direct: [direct.re, direct.im],
        by_parts: [by_parts.re, by_parts.im],
        relative_error,
        grid_fingerprint: grid.fingerprint(),
    })
}

fn planar_integral(g: &(dyn Fn(&[Complex64]) -> Complex64 + Sync), grid: &QuadGrid) -> Result<Complex64> {
    crate::quadrature::integrate_value(Evaluable::Func(g), grid)
}

/// `B₂` of a planar polynomial, exactly: a polynomial times `π`.
pub fn apply_b2_exact(h: &SymbolicFunction) -> Result<SymbolicFunction> {
    let mut out = SymbolicFunction::zero();
    for m in h.monomials() {
        if m.b() != 0 || m.d() != 0 {
            return Err(Error::Domain("B₂ acts on functions of one variable".into()));
        }
        let t = apply_b2_monomial(m.a(), m.c())?;
        if !t.is_zero() {
            out.add_term([t.exponent, 0, 0, 0], &(&m.coeff * &t.coeff.c));
        }
    }
    Ok(out)
}

/// Boundedness of `B₂` on `L^p(D*, |w|^{2−p})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct B2Report {
    pub p: f64,
    pub family: RatioReport,
    /// `∫_{|w|>ε} |B₂ g_ε|^p |w|^{2−p}` for `g_ε = |w|² χ_{|w|>ε}`.
    pub truncations: DivergenceReport,
    pub verdict: Verdict,
}

pub fn verify_lemma_b2(p: f64, family: &TestFamily, cutoffs: &[f64], grid: &GridParams) -> Result<B2Report> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Config(format!("p = {p} must lie in (1, ∞)")));
    }
    check_cutoffs(cutoffs)?;
    let base = QuadGrid::new(Domain::PuncturedDisc, grid.clone())?;
    let weight = 2.0 - p;
    let mut ratios = Vec::new();
    for (i, h) in family.members.iter().enumerate() {
        let img = apply_b2_exact(h)?.scale(&GaussRat::from_complex(Complex64::new(PI, 0.0)).unwrap());
        let num = planar_lp_power(Evaluable::Symbolic(&img), p, weight, &base)?;
        let den = membership(planar_lp_power(Evaluable::Symbolic(h), p, weight, &base)?, i)?;
        ratios.push((num / den).powf(1.0 / p));
    }
    let family_report = RatioReport::new(0, p, ratios, false, vec![base.fingerprint()]);

    let mut values = Vec::new();
    let mut fps = Vec::new();
    for &eps in cutoffs {
        let g = QuadGrid::new(Domain::PuncturedDisc, grid.with_eps(eps))?;
        // B₂(|w|² χ_{|w|>ε}) = ∫_{ε<|η|<1} |η|² dA = π(1 − ε⁴)/2
        let c = PI * (1.0 - eps.powi(4)) / 2.0;
        let img = move |_: &[Complex64]| Complex64::new(c, 0.0);
        values.push(planar_lp_power(Evaluable::Func(&img), p, weight, &g)?);
        fps.push(g.fingerprint());
    }
    let truncations = divergence_report(cutoffs, values, p, fps);
    let verdict = truncations.fit.verdict;
    Ok(B2Report { p, family: family_report, truncations, verdict })
}

/// Quadrature of `B₂(|w|²χ_{|w|>ε})` against its closed form, at `w`.
pub fn b2_truncated_check(eps: f64, w: Complex64, grid: &GridParams) -> Result<(Complex64, f64)> {
    let g = QuadGrid::new(Domain::PuncturedDisc, grid.with_eps(eps))?;
    let h = |p: &[Complex64]| Complex64::new(p[0].norm_sqr(), 0.0);
    let v = op_apply(PlanarOp::B2, Evaluable::Func(&h), w, &g)?;
    Ok((v, PI * (1.0 - eps.powi(4)) / 2.0))
}

/// Exact `B₃` coefficient check for the transported counterexample:
/// `B(z̄₂)` through `Φ` and `B₃(w̄)` both carry the coefficient `1/2`.
pub fn product_model_constant() -> Result<(Rational, Rational)> {
    let h = project_hartogs(&SymbolicFunction::from_monomial(Monomial::unit(0, 0, 0, 1)), None)?;
    let ch = h.coeff(&[0, -1, 0, 0]).re;
    let b3 = crate::monomial_engine::project_monomial_b3(0, 1)?;
    Ok((ch, b3.coeff.c.re))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> QuadGrid {
        QuadGrid::new(Domain::Hartogs, GridParams::new(10, 16, 1e-3, 0.5)).unwrap()
    }

    #[test]
    fn family_is_reproducible() {
        let a = TestFamily::standard(7);
        let b = TestFamily::standard(7);
        assert_eq!(a.members, b.members);
        assert_ne!(a.members, TestFamily::standard(8).members);
        assert!(a.members.iter().all(|f| f.max_abs_degree() <= 3));
    }

    #[test]
    fn l2_contraction_is_exact() {
        let fam = TestFamily::generate(FamilySpec::hartogs(10, 1));
        let r = probe_main_estimate(0, 2.0, &fam, &small_grid()).unwrap();
        assert!(r.exact && r.max <= 1.0);
    }

    #[test]
    fn counterexample_seminorm_k1_p2() {
        // ‖(1/2)/z₂‖ top seminorm squared with weight |z₂|² is π²/4
        let b = FnBundle::new(&counterexample_image().unwrap(), 1);
        let g = QuadGrid::new(Domain::Hartogs, GridParams::new(24, 32, 1e-6, 0.5)).unwrap();
        let v = sobolev_order_powers(&b, &[NormRequest { p: 2.0, s: 2.0 }], &g).unwrap()[0][1];
        assert!((v - PI * PI / 4.0).abs() < 1e-9);
    }

    #[test]
    fn holomorphic_members_contract_under_weight() {
        let fam = TestFamily {
            spec: FamilySpec::hartogs(2, 0),
            members: vec![
                SymbolicFunction::from_monomial(Monomial::unit(1, 1, 0, 0)),
                SymbolicFunction::from_monomials([Monomial::unit(0, 2, 0, 0), Monomial::unit(2, 0, 0, 0)]),
            ],
        };
        for r in probe_main_estimate_multi(&[0, 1], &[1.5, 3.0], &fam, &small_grid()).unwrap() {
            assert!(r.max <= 1.0, "{r:?}");
        }
    }

    #[test]
    fn verdicts() {
        let eps = [1e-1, 1e-2, 1e-3];
        let log: Vec<f64> = eps.iter().map(|e: &f64| 3.0 + (1.0 / e).ln()).collect();
        assert_eq!(divergence_fit(&eps, &log).verdict, Verdict::LogDivergent);
        let conv: Vec<f64> = eps.iter().map(|e: &f64| 5.0 - e.sqrt()).collect();
        assert_eq!(divergence_fit(&eps, &conv).verdict, Verdict::Bounded);
        let pow: Vec<f64> = eps.iter().map(|e: &f64| 1.0 / e).collect();
        assert_eq!(divergence_fit(&eps, &pow).verdict, Verdict::PowerDivergent);
    }

    #[test]
    fn tangential_identity_is_exact() {
        let r = verify_tangential(8, 12);
        assert!(r.exact_zero && r.max_abs_residual == 0.0);
    }

    #[test]
    fn transfer_identity_small() {
        let r = verify_lemma_transfer(2, 4, 3, 1).unwrap();
        assert_eq!(r.mismatches, 0);
        assert_eq!(r.comparisons, 6 * 4 * 3);
    }

    #[test]
    fn kernel_identity_trivial_and_small() {
        assert_eq!(verify_kernel_identity(0, 10, 0, None).unwrap(), 0.0);
        assert!(verify_kernel_identity(3, 20, 0, None).unwrap() < 1e-10);
        assert!(verify_kernel_identity(4, 20, 0, Some(0.99)).unwrap() < 1e-8);
    }

    #[test]
    fn ibp_b0_is_identical() {
        let g = QuadGrid::new(Domain::PuncturedDisc, GridParams::new(16, 32, 1e-4, 0.5)).unwrap();
        let f = SymbolicFunction::from_monomial(Monomial::unit(0, 0, 1, 0));
        let r = verify_ibp(0, &f, Complex64::new(0.5, 0.0), &g).unwrap();
        assert_eq!(r.relative_error, 0.0);
    }

    #[test]
    fn ibp_first_order() {
        let g = QuadGrid::new(Domain::PuncturedDisc, GridParams::new(32, 64, 1e-5, 0.5)).unwrap();
        let f = SymbolicFunction::from_monomial(Monomial::unit(0, 0, 1, 0));
        let r = verify_ibp(1, &f, Complex64::new(0.5, 0.0), &g).unwrap();
        assert!(r.relative_error < 1e-6, "{r:?}");
        assert!((r.direct[0] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn b2_constant_image() {
        let (v, exact) =
            b2_truncated_check(1e-2, Complex64::new(0.3, 0.1), &GridParams::new(32, 64, 1e-2, 0.5)).unwrap();
        assert!((v.re - exact).abs() < 1e-9 && v.im.abs() < 1e-9);
    }

    #[test]
    fn product_model_constants_agree() {
        let (a, b) = product_model_constant().unwrap();
        assert_eq!(a, rat(1, 2));
        assert_eq!(b, rat(1, 2));
    }
}
