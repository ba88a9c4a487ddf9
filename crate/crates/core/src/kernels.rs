//! Closed-form Bergman kernels and their derivatives.
//!
//! All kernels are normalized for Lebesgue area measure `dA` (and `dV` in
//! two variables), so they reproduce: `∫ K(w, η) dA(η) = 1` on the disc.
//!
//! | id | kernel |
//! |----|--------|
//! | `Disc`, `PuncturedDisc` | `1 / (π (1 − wη̄)²)` |
//! | `WeightedPuncturedDisc` (weight `\|w\|²`) | `1 / (π wη̄ (1 − wη̄)²)` |
//! | `ProductModel` (`D × D*`) | `1 / (π² (1 − w₁η̄₁)² (1 − w₂η̄₂)²)` |
//! | `Hartogs` | `z₂ζ̄₂ / (π² (z₂ζ̄₂ − z₁ζ̄₁)² (1 − z₂ζ̄₂)²)` |

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::operator_calculus::{transfer_dz, MultiIndex2};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelId {
    Disc,
    PuncturedDisc,
    /// Punctured disc with the weight `|w|²`.
    WeightedPuncturedDisc,
    ProductModel,
    Hartogs,
}

impl KernelId {
    pub const ALL: [KernelId; 5] = [
        KernelId::Disc,
        KernelId::PuncturedDisc,
        KernelId::WeightedPuncturedDisc,
        KernelId::ProductModel,
        KernelId::Hartogs,
    ];

    /// Number of complex coordinates of a point.
    pub fn dim(self) -> usize {
        match self {
            KernelId::Disc | KernelId::PuncturedDisc | KernelId::WeightedPuncturedDisc => 1,
            KernelId::ProductModel | KernelId::Hartogs => 2,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            KernelId::Disc => "disc",
            KernelId::PuncturedDisc => "punctured-disc",
            KernelId::WeightedPuncturedDisc => "weighted-punctured-disc",
            KernelId::ProductModel => "product-model",
            KernelId::Hartogs => "hartogs",
        }
    }

    /// Membership of `p` in the (open) domain.
    pub fn contains(self, p: &[Complex64]) -> bool {
        if p.len() != self.dim() || p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return false;
        }
        match self {
            KernelId::Disc => p[0].norm() < 1.0,
            KernelId::PuncturedDisc | KernelId::WeightedPuncturedDisc => {
                let r = p[0].norm();
                r > 0.0 && r < 1.0
            }
            KernelId::ProductModel => {
                let r2 = p[1].norm();
                p[0].norm() < 1.0 && r2 > 0.0 && r2 < 1.0
            }
            KernelId::Hartogs => p[0].norm() < p[1].norm() && p[1].norm() < 1.0,
        }
    }

    fn check(self, p: &[Complex64], name: &str) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Domain(format!(
                "{} kernel expects {} coordinate(s) for {name}, got {}",
                self.tag(),
                self.dim(),
                p.len()
            )));
        }
        if !self.contains(p) {
            return Err(Error::Domain(format!("{name} = {p:?} is outside the {} domain", self.tag())));
        }
        Ok(())
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for KernelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        KernelId::ALL
            .into_iter()
            .find(|k| k.tag() == norm)
            .ok_or_else(|| Error::Config(format!("unknown kernel id {s:?}")))
    }
}

fn nonzero(x: Complex64, what: &str) -> Result<Complex64> {
    if x == Complex64::new(0.0, 0.0) || !x.re.is_finite() || !x.im.is_finite() {
        Err(Error::Domain(format!("singular denominator: {what}")))
    } else {
        Ok(x)
    }
}

/// `1 / (π (1 − wη̄)²)` without domain checks.
fn disc_kernel(w: Complex64, eta: Complex64) -> Result<Complex64> {
    let d = nonzero(Complex64::new(1.0, 0.0) - w * eta.conj(), "1 − wη̄")?;
    Ok(1.0 / (PI * d * d))
}

fn weighted_kernel(w: Complex64, eta: Complex64) -> Result<Complex64> {
    let x = nonzero(w * eta.conj(), "wη̄")?;
    let d = nonzero(Complex64::new(1.0, 0.0) - x, "1 − wη̄")?;
    Ok(1.0 / (PI * x * d * d))
}

/// Evaluate a Bergman kernel; points use one coordinate for the planar
/// kernels and two for the product model and the Hartogs triangle.
pub fn eval_kernel(id: KernelId, w: &[Complex64], eta: &[Complex64]) -> Result<Complex64> {
    id.check(w, "w")?;
    id.check(eta, "η")?;
    eval_kernel_unchecked(id, w, eta)
}

/// [`eval_kernel`] without the domain membership checks; denominators are
/// still checked.
pub fn eval_kernel_unchecked(id: KernelId, w: &[Complex64], eta: &[Complex64]) -> Result<Complex64> {
    match id {
        KernelId::Disc | KernelId::PuncturedDisc => disc_kernel(w[0], eta[0]),
        KernelId::WeightedPuncturedDisc => weighted_kernel(w[0], eta[0]),
        KernelId::ProductModel => Ok(disc_kernel(w[0], eta[0])? * disc_kernel(w[1], eta[1])?),
        KernelId::Hartogs => {
            let s = w[1] * eta[1].conj();
            let t = nonzero(s - w[0] * eta[0].conj(), "z₂ζ̄₂ − z₁ζ̄₁")?;
            let u = nonzero(Complex64::new(1.0, 0.0) - s, "1 − z₂ζ̄₂")?;
            Ok(s / (PI * PI * t * t * u * u))
        }
    }
}

/// `Φ(z) = (z₁/z₂, z₂)`.
pub fn map_phi(z: [Complex64; 2]) -> Result<[Complex64; 2]> {
    if z[1] == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularPoint("Φ is undefined at z₂ = 0".into()));
    }
    Ok([z[0] / z[1], z[1]])
}

/// `Ψ(w) = (w₁w₂, w₂)`.
pub fn map_psi(w: [Complex64; 2]) -> [Complex64; 2] {
    [w[0] * w[1], w[1]]
}

/// `det J_ℂ Ψ(w) = w₂`.
pub fn jacobian_det_psi(w: [Complex64; 2]) -> Complex64 {
    w[1]
}

/// Sum of terms `coeff · x^i · y^j · (1 − xy)^{−k}`, closed under `∂_x`
/// and `∂_y`. With `x = w` and `y = η̄` this represents the planar kernels
/// and all of their derivatives exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelExpr {
    terms: Vec<KernelTermXY>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct KernelTermXY {
    coeff: i128,
    i: i32,
    j: i32,
    k: u32,
}

impl KernelExpr {
    /// `(1 − xy)^{−2}`, the unnormalized disc kernel.
    pub fn disc() -> Self {
        Self { terms: vec![KernelTermXY { coeff: 1, i: 0, j: 0, k: 2 }] }
    }

    /// `x^{−1} y^{−1} (1 − xy)^{−2}`, the unnormalized `|w|²`-weighted kernel.
    pub fn weighted_punctured() -> Self {
        Self { terms: vec![KernelTermXY { coeff: 1, i: -1, j: -1, k: 2 }] }
    }

    fn collect(mut terms: Vec<KernelTermXY>) -> Self {
        terms.sort_by_key(|t| (t.i, t.j, t.k));
        let mut out: Vec<KernelTermXY> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if (last.i, last.j, last.k) == (t.i, t.j, t.k) => last.coeff += t.coeff,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coeff != 0);
        Self { terms: out }
    }

    /// `∂/∂x`
    pub fn diff_x(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.i != 0 {
                out.push(KernelTermXY { coeff: t.coeff * t.i as i128, i: t.i - 1, ..*t });
            }
            if t.k != 0 {
                out.push(KernelTermXY { coeff: t.coeff * t.k as i128, j: t.j + 1, k: t.k + 1, ..*t });
            }
        }
        Self::collect(out)
    }

    /// `∂/∂y`
    pub fn diff_y(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.j != 0 {
                out.push(KernelTermXY { coeff: t.coeff * t.j as i128, j: t.j - 1, ..*t });
            }
            if t.k != 0 {
                out.push(KernelTermXY { coeff: t.coeff * t.k as i128, i: t.i + 1, k: t.k + 1, ..*t });
            }
        }
        Self::collect(out)
    }

    pub fn diff_x_n(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |e, _| e.diff_x())
    }

    pub fn diff_y_n(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |e, _| e.diff_y())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Result<Complex64> {
        let u = Complex64::new(1.0, 0.0) - x * y;
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            if (t.i < 0 && x == Complex64::new(0.0, 0.0)) || (t.j < 0 && y == Complex64::new(0.0, 0.0)) {
                return Err(Error::Domain("singular denominator: wη̄ = 0".into()));
            }
            if t.k > 0 && u == Complex64::new(0.0, 0.0) {
                return Err(Error::Domain("singular denominator: 1 − wη̄ = 0".into()));
            }
            acc += t.coeff as f64 * x.powi(t.i) * y.powi(t.j) * u.powi(-(t.k as i32));
        }
        Ok(acc)
    }
}

fn check_punctured_pair(w2: Complex64, eta2: Complex64) -> Result<()> {
    for (z, n) in [(w2, "w₂"), (eta2, "η₂")] {
        if !KernelId::WeightedPuncturedDisc.contains(&[z]) {
            return Err(Error::Domain(format!("{n} = {z} is outside D*")));
        }
    }
    Ok(())
}

/// `∂^b/∂w₂^b` of the `|w|²`-weighted punctured-disc kernel (with its `1/π`).
pub fn kernel_w2_derivative(b: u32, w2: Complex64, eta2: Complex64) -> Result<Complex64> {
    check_punctured_pair(w2, eta2)?;
    Ok(KernelExpr::weighted_punctured().diff_x_n(b).eval(w2, eta2.conj())? / PI)
}

/// `∂^b/∂η̄₂^b` of the `|w|²`-weighted punctured-disc kernel (with its `1/π`).
pub fn kernel_etabar_derivative(b: u32, w2: Complex64, eta2: Complex64) -> Result<Complex64> {
    check_punctured_pair(w2, eta2)?;
    Ok(KernelExpr::weighted_punctured().diff_y_n(b).eval(w2, eta2.conj())? / PI)
}

/// `∂^a/∂w₁^a` of the normalized disc kernel.
pub fn disc_kernel_w_derivative(a: u32, w1: Complex64, eta1: Complex64) -> Result<Complex64> {
    Ok(KernelExpr::disc().diff_x_n(a).eval(w1, eta1.conj())? / PI)
}

/// One summand `K_{a,b,β}` of `D_z^β` applied to the Hartogs kernel in
/// product-model coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelTerm {
    pub a: u32,
    pub b: u32,
    pub beta: MultiIndex2,
}

impl KernelTerm {
    pub fn new(a: u32, b: u32, beta: MultiIndex2) -> Result<Self> {
        if a + b > beta.order() {
            return Err(Error::Domain(format!("a + b = {} exceeds |β| = {}", a + b, beta.order())));
        }
        Ok(Self { a, b, beta })
    }

    /// All terms of `D_z^β` with a nonzero coefficient polynomial.
    pub fn all_for(beta: MultiIndex2) -> Vec<KernelTerm> {
        transfer_dz(beta).terms().map(|(&(a, b), _)| KernelTerm { a, b, beta }).collect()
    }
}

/// `p_{a,b,β}(w₁) · w₂^{−(|β|−b)} · ∂^a_{w₁}K_D(w₁,η₁) · ∂^b_{w₂}K_W(w₂,η₂)`,
/// with `K_D`, `K_W` normalized so the overall factor is `1/π²`.
pub fn eval_kernel_term(term: KernelTerm, w: [Complex64; 2], eta: [Complex64; 2]) -> Result<Complex64> {
    KernelId::ProductModel.check(&w, "w")?;
    KernelId::ProductModel.check(&eta, "η")?;
    let op = transfer_dz(term.beta);
    let p = match op.term(term.a, term.b) {
        Some(p) => p.eval(w[0]),
        None => return Ok(Complex64::new(0.0, 0.0)),
    };
    let w2_pow = w[1].powi(op.w2_exponent(term.b));
    let disc = disc_kernel_w_derivative(term.a, w[0], eta[0])?;
    let weighted = kernel_w2_derivative(term.b, w[1], eta[1])?;
    Ok(p * w2_pow * disc * weighted)
}

/// Partial sum `Σ_{j<n} (j+1)(w₂η̄₂)^{j−1} / π` of the weighted kernel's series.
pub fn weighted_kernel_partial_sum(n: usize, w2: Complex64, eta2: Complex64) -> Complex64 {
    let x = w2 * eta2.conj();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pw = 1.0 / x;
    for j in 0..n {
        acc += (j as f64 + 1.0) * pw;
        pw *= x;
    }
    acc / PI
}
