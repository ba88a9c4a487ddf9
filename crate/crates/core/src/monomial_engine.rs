//! Exact inner products, norms and Bergman projections of monomials.
//!
//! The Hartogs triangle, the disc and the punctured disc are Reinhardt
//! domains: they are invariant under independent rotations of each
//! coordinate. Two monomials are therefore orthogonal unless their
//! "rotation charges" `a − c` and `b − d` agree, and every surviving
//! integral reduces to
//!
//! ```text
//! ∫_H |z₁|^{2s} |z₂|^{2t} dV = π² / ((s+1)(s+t+2)),   s > −1, s+t > −2.
//! ```
//!
//! The holomorphic monomials `z₁^α z₂^β` with `α ≥ 0` and `α + β ≥ −1` form
//! an orthogonal basis of the Bergman space of `H`, which makes the
//! projection of any monomial a single rescaled monomial.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exact::{int, ExactComplex, ExactScalar, GaussRat, Rational};
use crate::operator_calculus::MultiIndex4;
use crate::symbolic::{Monomial, SymbolicFunction};
use crate::{Error, Result};

/// `∫_H |z₁|^{2s}|z₂|^{2t} dV = π²/((s+1)(s+t+2))`.
pub fn monomial_integral_hartogs(s: &Rational, t: &Rational) -> Result<ExactScalar> {
    let s1 = s + int(1);
    let st2 = s + t + int(2);
    if !s1.is_positive() {
        return Err(Error::Divergence(format!("s = {s} must exceed −1")));
    }
    if !st2.is_positive() {
        return Err(Error::Divergence(format!("s + t = {} must exceed −2", s + t)));
    }
    Ok(ExactScalar::new(Rational::one() / (s1 * st2), 2))
}

/// `∫_{D*} |w|^{2s} · |w|² dA = π/(s+2)`.
pub fn monomial_integral_weighted_punctured(s: &Rational) -> Result<ExactScalar> {
    let s2 = s + int(2);
    if !s2.is_positive() {
        return Err(Error::Divergence(format!("s = {s} must exceed −2")));
    }
    Ok(ExactScalar::new(Rational::one() / s2, 1))
}

/// `1 − ε^n` for a rational cutoff and integer `n ≥ 0`: the fraction of a
/// radial integral `∫_0^1 r^{n−1} dr` that lies in `(ε, 1)`.
pub fn truncation_factor(eps: &Rational, n: i32) -> Rational {
    if n <= 0 {
        // only used with n > 0; n = 0 would be a log and is never exact
        return Rational::one();
    }
    Rational::one() - num_traits::pow(eps.clone(), n as usize)
}

/// A projection output `coeff · z₁^α z₂^β`; zero when `coeff` is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactTerm {
    pub coeff: ExactComplex,
    pub alpha: i32,
    pub beta: i32,
}

impl ExactTerm {
    pub fn zero(alpha: i32, beta: i32) -> Self {
        Self { coeff: ExactComplex::zero(), alpha, beta }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// Holomorphic basis membership: `α ≥ 0` and `α + β ≥ −1`.
    pub fn admissible(alpha: i32, beta: i32) -> bool {
        alpha >= 0 && alpha + beta >= -1
    }

    /// As a monomial `z₁^α z₂^β` (π powers must be zero).
    pub fn to_monomial(&self) -> Monomial {
        assert_eq!(self.coeff.pi_power, 0, "projection coefficients are rational");
        Monomial::new(self.alpha, self.beta, 0, 0, self.coeff.c.clone())
    }
}

/// A one-variable output `coeff · w^exponent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanarTerm {
    pub coeff: ExactComplex,
    pub exponent: i32,
}

impl PlanarTerm {
    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }
}

fn rational_coeff(c: GaussRat) -> ExactComplex {
    ExactComplex { c, pi_power: 0 }
}

/// `γ = ⟨m, e⟩/‖e‖²` for the basis element `e` with matching charges, or
/// `None` when that element is not admissible.
fn hartogs_gain(m: &Monomial) -> Result<Option<(Rational, i32, i32)>> {
    if m.a() < 0 || m.c() < 0 {
        return Err(Error::Domain(format!("z₁ exponents must be non-negative, got {:?}", m.exps)));
    }
    if !m.in_l2_hartogs() {
        return Err(Error::Domain(format!("{:?} is not square integrable on H", m.exps)));
    }
    let alpha = m.a() - m.c();
    let beta = m.b() - m.d();
    if !ExactTerm::admissible(alpha, beta) {
        return Ok(None);
    }
    let (a, b) = (int(m.a() as i64), int(m.b() as i64));
    // pairing ⟨m, z₁^α z₂^β⟩ = ∫ |z₁|^{2a} |z₂|^{2b}
    let pairing = monomial_integral_hartogs(&a, &b)?;
    let norm = monomial_integral_hartogs(&int(alpha as i64), &int(beta as i64))?;
    Ok(Some((pairing.q / norm.q, alpha, beta)))
}

/// Bergman projection of a monomial on `H`.
pub fn project_monomial_hartogs(m: &Monomial) -> Result<ExactTerm> {
    let alpha = m.a() - m.c();
    let beta = m.b() - m.d();
    match hartogs_gain(m)? {
        None => Ok(ExactTerm::zero(alpha, beta)),
        Some((gamma, alpha, beta)) => Ok(ExactTerm { coeff: rational_coeff(&m.coeff * &gamma), alpha, beta }),
    }
}

/// Projection of `m · χ_{|z₂|>ε}`; the gain picks up `1 − ε^{2(a+b+2)}`.
pub fn project_monomial_hartogs_truncated(m: &Monomial, eps: &Rational) -> Result<ExactTerm> {
    if eps.is_negative() || *eps >= Rational::one() {
        return Err(Error::Domain(format!("cutoff ε = {eps} must lie in [0, 1)")));
    }
    let alpha = m.a() - m.c();
    let beta = m.b() - m.d();
    match hartogs_gain(m)? {
        None => Ok(ExactTerm::zero(alpha, beta)),
        Some((gamma, alpha, beta)) => {
            let f = truncation_factor(eps, 2 * (m.a() + m.b() + 2));
            Ok(ExactTerm { coeff: rational_coeff(&m.coeff * &(gamma * f)), alpha, beta })
        }
    }
}

/// Bergman projection of a finite monomial sum, by linearity; `cutoff`
/// truncates the input to `|z₂| > ε` first.
pub fn project_hartogs(f: &SymbolicFunction, cutoff: Option<&Rational>) -> Result<SymbolicFunction> {
    let mut out = SymbolicFunction::zero();
    for m in f.monomials() {
        let t = match cutoff {
            Some(eps) => project_monomial_hartogs_truncated(&m, eps)?,
            None => project_monomial_hartogs(&m)?,
        };
        if !t.is_zero() {
            let tm = t.to_monomial();
            out.add_term(tm.exps, &tm.coeff);
        }
    }
    Ok(out)
}

/// `|w|²`-weighted Bergman projection on `D*` of `w^a w̄^b`.
pub fn project_monomial_b3(a: i32, b: i32) -> Result<PlanarTerm> {
    if a + b <= -2 {
        return Err(Error::Domain(format!("w^{a} w̄^{b} is not in L²(D*, |w|²)")));
    }
    let j = a - b;
    if j < -1 {
        return Ok(PlanarTerm { coeff: ExactComplex::zero(), exponent: j });
    }
    let pairing = monomial_integral_weighted_punctured(&int(a as i64))?;
    let norm = monomial_integral_weighted_punctured(&int(j as i64))?;
    Ok(PlanarTerm { coeff: rational_coeff(GaussRat::from_rational(pairing.q / norm.q)), exponent: j })
}

/// Bergman projection on the unit disc of `w^a w̄^c` (`a, c ≥ 0`).
pub fn project_monomial_disc(a: i32, c: i32) -> Result<PlanarTerm> {
    if a < 0 || c < 0 {
        return Err(Error::Domain("disc monomials need non-negative exponents".into()));
    }
    let j = a - c;
    if j < 0 {
        return Ok(PlanarTerm { coeff: ExactComplex::zero(), exponent: j });
    }
    let gain = Rational::new(BigInt::from(j + 1), BigInt::from(a + 1));
    Ok(PlanarTerm { coeff: rational_coeff(GaussRat::from_rational(gain)), exponent: j })
}

/// The unnormalized operator `h ↦ ∫_{D*} h(η)(1 − wη̄)^{−2} dA(η)` on
/// `w^a w̄^c`: `π` times the disc projection.
pub fn apply_b2_monomial(a: i32, c: i32) -> Result<PlanarTerm> {
    let mut t = project_monomial_disc(a, c)?;
    if !t.is_zero() {
        t.coeff.pi_power = 1;
    }
    Ok(t)
}

/// `∫_H m₁ · conj(m₂) · |z₂|^{2h} dV`, exact.
pub fn inner_product_hartogs_weighted(m1: &Monomial, m2: &Monomial, h: &Rational) -> Result<ExactComplex> {
    if m1.a() - m1.c() != m2.a() - m2.c() || m1.b() - m1.d() != m2.b() - m2.d() {
        return Ok(ExactComplex::zero());
    }
    let s = int((m1.a() + m2.c()) as i64);
    let t = int((m1.b() + m2.d()) as i64) + h;
    let base = monomial_integral_hartogs(&s, &t)?;
    let c = &(&m1.coeff * &m2.coeff.conj()) * &base.q;
    Ok(ExactComplex { c, pi_power: base.pi_power })
}

/// `⟨m₁, m₂⟩ = ∫_H m₁ · conj(m₂) dV`.
pub fn inner_product_hartogs(m1: &Monomial, m2: &Monomial) -> Result<ExactComplex> {
    inner_product_hartogs_weighted(m1, m2, &Rational::zero())
}

/// `∫_H |f|² |z₂|^{2h} dV` for a monomial sum (a `π²` multiple).
pub fn weighted_l2_norm_sq(f: &SymbolicFunction, h: &Rational) -> Result<ExactScalar> {
    let ms: Vec<Monomial> = f.monomials().collect();
    let mut acc = GaussRat::zero();
    for m1 in &ms {
        for m2 in &ms {
            let v = inner_product_hartogs_weighted(m1, m2, h)?;
            if !v.is_zero() {
                debug_assert_eq!(v.pi_power, 2);
                acc += &v.c;
            }
        }
    }
    debug_assert!(acc.im.is_zero(), "a squared norm is real");
    Ok(ExactScalar::new(acc.re, 2))
}

/// `‖f‖²_{k,2,2h} = Σ_{|α|≤k} ∫_H |D^α f|² |z₂|^{2h} dV`, exact.
pub fn sobolev_norm_sq_exact(f: &SymbolicFunction, k: u32, h: &Rational) -> Result<ExactScalar> {
    let mut total = Rational::zero();
    for alpha in MultiIndex4::up_to(k) {
        let d = f.diff_multi(alpha.0);
        if d.is_zero() {
            continue;
        }
        total += weighted_l2_norm_sq(&d, h)?.q;
    }
    Ok(ExactScalar::new(total, 2))
}
