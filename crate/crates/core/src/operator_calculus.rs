//! Derivative transfer under `Φ(z) = (z₁/z₂, z₂)` and powers of the
//! tangential operator `T_w = (1/2i)(w∂_w − w̄∂_w̄)`.
//!
//! In `w`-coordinates every `D_z^β` with `|β| = m` takes the shape
//!
//! ```text
//! D_z^β = Σ_{a+b≤m} p_{a,b}(w₁) · w₂^{-(m-b)} · ∂^a_{w₁} ∂^b_{w₂}
//! ```
//!
//! with polynomial coefficients `p_{a,b}` of degree at most `m`. The
//! coefficients are built by left-composing the first-order rules
//! `∂_{z₁} = w₂⁻¹ ∂_{w₁}` and `∂_{z₂} = −w₁ w₂⁻¹ ∂_{w₁} + ∂_{w₂}`.
//!
//! On antiholomorphic functions, `T_w^b` agrees with
//! `Σ_j c_j w̄^j ∂^j_{w̄}`; [`tangential_power`] produces the `c_j`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exact::{bigint_from_json, bigint_to_json, rat_from_f64, GaussRat};
use crate::symbolic::{Slot, SymbolicFunction, Var};
use crate::{Error, Result};

/// Orders `(β₁, β₂)` of holomorphic derivatives in `(z₁, z₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex2(pub u32, pub u32);

impl MultiIndex2 {
    pub fn order(self) -> u32 {
        self.0 + self.1
    }

    /// All multi-indices with `|β| ≤ k`, ordered by total order then `β₁`.
    pub fn up_to(k: u32) -> Vec<MultiIndex2> {
        let mut out = Vec::new();
        for m in 0..=k {
            for b1 in (0..=m).rev() {
                out.push(MultiIndex2(b1, m - b1));
            }
        }
        out
    }
}

/// Orders `(α₁..α₄)` in `(z₁, z₂, z̄₁, z̄₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex4(pub [u32; 4]);

impl MultiIndex4 {
    pub fn order(self) -> u32 {
        self.0.iter().sum()
    }

    /// Every `α` with `|α| ≤ k`, grouped by increasing order.
    pub fn up_to(k: u32) -> Vec<MultiIndex4> {
        let mut out = Vec::new();
        for m in 0..=k {
            for a in (0..=m).rev() {
                for b in (0..=m - a).rev() {
                    for c in (0..=m - a - b).rev() {
                        out.push(MultiIndex4([a, b, c, m - a - b - c]));
                    }
                }
            }
        }
        out
    }
}

/// Dense polynomial in `w₁` with Gaussian-rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly(Vec<GaussRat>);

impl Poly {
    pub fn constant(c: GaussRat) -> Self {
        let mut p = Poly(vec![c]);
        p.trim();
        p
    }

    pub fn from_coeffs(c: Vec<GaussRat>) -> Self {
        let mut p = Poly(c);
        p.trim();
        p
    }

    pub fn coeffs(&self) -> &[GaussRat] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    fn add_assign(&mut self, other: &Poly) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), GaussRat::zero());
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
        self.trim();
    }

    fn scale(&self, s: &GaussRat) -> Poly {
        Poly::from_coeffs(self.0.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_coeffs(self.0.iter().enumerate().skip(1).map(|(k, c)| c * &GaussRat::from_int(k as i64)).collect())
    }

    /// `w₁ · p(w₁)`
    fn times_w(&self) -> Poly {
        if self.is_zero() {
            return Poly::default();
        }
        let mut c = Vec::with_capacity(self.0.len() + 1);
        c.push(GaussRat::zero());
        c.extend(self.0.iter().cloned());
        Poly(c)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c.to_complex())
    }

    pub fn eval_exact(&self, x: &GaussRat) -> GaussRat {
        self.0.iter().rev().fold(GaussRat::zero(), |acc, c| &(&acc * x) + c)
    }

    /// `Σ |coefficient|`, which bounds `sup_{|w₁|≤1} |p(w₁)|`.
    pub fn coeff_abs_sum(&self) -> f64 {
        self.0.iter().map(GaussRat::abs_f64).sum()
    }

    /// As a [`SymbolicFunction`] in the first slot.
    pub fn to_symbolic(&self) -> SymbolicFunction {
        let mut f = SymbolicFunction::zero();
        for (k, c) in self.0.iter().enumerate() {
            f.add_term([k as i32, 0, 0, 0], c);
        }
        f
    }
}

/// `D_z^β` rewritten in `w`-coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WOperator {
    order: u32,
    terms: BTreeMap<(u32, u32), Poly>,
}

impl WOperator {
    pub fn identity() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0), Poly::constant(GaussRat::one()));
        Self { order: 0, terms }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Terms `((a, b), p_{a,b})`; the `w₂` exponent of each is [`Self::w2_exponent`].
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Poly)> {
        self.terms.iter()
    }

    pub fn term(&self, a: u32, b: u32) -> Option<&Poly> {
        self.terms.get(&(a, b))
    }

    pub fn w2_exponent(&self, b: u32) -> i32 {
        -(self.order as i32 - b as i32)
    }

    fn insert(&mut self, key: (u32, u32), p: Poly) {
        if p.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_default();
        slot.add_assign(&p);
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// `∂_{z₁} ∘ self`.
    pub fn compose_dz1(&self) -> WOperator {
        let mut out = WOperator { order: self.order + 1, terms: BTreeMap::new() };
        for (&(a, b), p) in &self.terms {
            out.insert((a, b), p.derivative());
            out.insert((a + 1, b), p.clone());
        }
        out
    }

    /// `∂_{z₂} ∘ self`.
    pub fn compose_dz2(&self) -> WOperator {
        let m = self.order as i64;
        let mut out = WOperator { order: self.order + 1, terms: BTreeMap::new() };
        let minus_one = -GaussRat::one();
        for (&(a, b), p) in &self.terms {
            out.insert((a, b), p.derivative().times_w().scale(&minus_one));
            out.insert((a + 1, b), p.times_w().scale(&minus_one));
            out.insert((a, b), p.scale(&GaussRat::from_int(b as i64 - m)));
            out.insert((a, b + 1), p.clone());
        }
        out
    }

    /// Apply to a function of `w = (w₁, w₂)`, symbolically.
    pub fn apply_symbolic(&self, f: &SymbolicFunction) -> SymbolicFunction {
        let mut out = SymbolicFunction::zero();
        for (&(a, b), p) in &self.terms {
            let df = f.diff_n(Var::Z1, a).diff_n(Var::Z2, b);
            if df.is_zero() {
                continue;
            }
            let coeff = p.to_symbolic().shift([0, self.w2_exponent(b), 0, 0]);
            out = out.add(&coeff.mul(&df));
        }
        out
    }

    /// Largest coefficient-magnitude sum over the terms.
    pub fn max_coeff_abs_sum(&self) -> f64 {
        self.terms.values().map(Poly::coeff_abs_sum).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> WOperatorJson {
        let terms = self
            .terms
            .iter()
            .map(|(&(a, b), p)| {
                let coefficients =
                    p.coeffs().iter().map(|c| c.to_parts().iter().map(bigint_to_json).collect()).collect();
                (format!("{a},{b}"), WTermJson { coefficients, w2_exponent: self.w2_exponent(b) })
            })
            .collect();
        WOperatorJson { order: self.order, terms }
    }

    pub fn from_json(j: &WOperatorJson) -> Result<Self> {
        let bad = |msg: &str| Error::Config(format!("malformed operator table: {msg}"));
        let mut op = WOperator { order: j.order, terms: BTreeMap::new() };
        for (key, t) in &j.terms {
            let (a, b) = key.split_once(',').ok_or_else(|| bad("key is not \"a,b\""))?;
            let a: u32 = a.trim().parse().map_err(|_| bad("bad a"))?;
            let b: u32 = b.trim().parse().map_err(|_| bad("bad b"))?;
            if a + b > j.order || op.w2_exponent(b) != t.w2_exponent {
                return Err(bad("inconsistent key and exponent"));
            }
            let mut coeffs = Vec::with_capacity(t.coefficients.len());
            for c in &t.coefficients {
                if c.len() != 4 {
                    return Err(bad("coefficient needs [num,den,num_i,den_i]"));
                }
                let parts: Vec<BigInt> = c
                    .iter()
                    .map(|v| bigint_from_json(v).ok_or_else(|| bad("non-integer entry")))
                    .collect::<Result<_>>()?;
                let parts: [BigInt; 4] = parts.try_into().expect("length checked");
                coeffs.push(GaussRat::from_parts(&parts).ok_or_else(|| bad("zero denominator"))?);
            }
            op.insert((a, b), Poly::from_coeffs(coeffs));
        }
        Ok(op)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WTermJson {
    pub coefficients: Vec<Vec<serde_json::Value>>,
    pub w2_exponent: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WOperatorJson {
    pub order: u32,
    pub terms: BTreeMap<String, WTermJson>,
}

/// `D_z^β` in `w`-coordinates, built as `∂_{z₁}^{β₁} ∘ ∂_{z₂}^{β₂}`.
pub fn transfer_dz(beta: MultiIndex2) -> WOperator {
    let mut op = WOperator::identity();
    for _ in 0..beta.1 {
        op = op.compose_dz2();
    }
    for _ in 0..beta.0 {
        op = op.compose_dz1();
    }
    op
}

/// Same operator with the opposite composition order, `∂_{z₂}^{β₂} ∘ ∂_{z₁}^{β₁}`.
pub fn transfer_dz_reversed(beta: MultiIndex2) -> WOperator {
    let mut op = WOperator::identity();
    for _ in 0..beta.0 {
        op = op.compose_dz1();
    }
    for _ in 0..beta.1 {
        op = op.compose_dz2();
    }
    op
}

/// Evaluate `op(f)` at `w`; `f` is a function of `(w₁, w₂)`.
pub fn apply_woperator(op: &WOperator, f: &SymbolicFunction, w: [Complex64; 2]) -> Result<Complex64> {
    if w[1] == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularPoint("w₂ = 0".into()));
    }
    op.apply_symbolic(f).eval(w)
}

/// Exact variant of [`apply_woperator`].
pub fn apply_woperator_exact(op: &WOperator, f: &SymbolicFunction, w: &[GaussRat; 2]) -> Result<GaussRat> {
    if w[1].is_zero() {
        return Err(Error::SingularPoint("w₂ = 0".into()));
    }
    op.apply_symbolic(f).eval_exact(w)
}

/// Certified bound on `sup_{|w₁|≤1} |p_{a,b,β}(w₁)|` over all `|β| ≤ k`.
pub fn coeff_sup_bound(k: u32) -> f64 {
    MultiIndex2::up_to(k).into_iter().map(|beta| transfer_dz(beta).max_coeff_abs_sum()).fold(0.0, f64::max)
}

/// `Σ_{j≤b} c_j w̄^j ∂^j_{w̄}`, the part of `T_w^b` that survives on
/// antiholomorphic functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentialForm {
    coeffs: Vec<GaussRat>,
}

impl TangentialForm {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[GaussRat] {
        &self.coeffs
    }

    /// Apply in `slot`, symbolically.
    pub fn apply_symbolic(&self, f: &SymbolicFunction, slot: Slot) -> SymbolicFunction {
        let (_, anti) = Var::slot(slot);
        let mut out = SymbolicFunction::zero();
        let mut shift = [0; 4];
        let mut deriv = f.clone();
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                deriv = deriv.diff(anti);
                shift[anti.index()] += 1;
            }
            if !c.is_zero() && !deriv.is_zero() {
                out = out.add(&deriv.shift(shift).scale(c));
            }
        }
        out
    }
}

/// `1/(2i)`
fn one_over_two_i() -> GaussRat {
    GaussRat::new(num_traits::Zero::zero(), crate::exact::rat(-1, 2))
}

/// Coefficients of `T_w^b` modulo `∂_w`, from the recursion
/// `c'_j = −(1/2i)(j·c_j + c_{j−1})` seeded by `c_0 = 1` at `b = 0`.
pub fn tangential_power(b: usize) -> TangentialForm {
    let k = -one_over_two_i();
    let mut c = vec![GaussRat::one()];
    for _ in 0..b {
        let mut next = vec![GaussRat::zero(); c.len() + 1];
        for (j, slot) in next.iter_mut().enumerate() {
            let mut acc = GaussRat::zero();
            if j < c.len() {
                acc += &(&c[j] * &GaussRat::from_int(j as i64));
            }
            if j >= 1 {
                acc += &c[j - 1];
            }
            *slot = &k * &acc;
        }
        c = next;
    }
    TangentialForm { coeffs: c }
}

/// Raw `T_w = (1/2i)(w∂_w − w̄∂_w̄)` applied `power` times in `slot`.
///
/// Each monomial is an eigenfunction: `T(w^h w̄^a) = (h − a)/(2i) · w^h w̄^a`.
pub fn apply_tangential_raw(f: &SymbolicFunction, slot: Slot, power: u32) -> SymbolicFunction {
    let (h, a) = Var::slot(slot);
    let k = one_over_two_i();
    let mut out = SymbolicFunction::zero();
    for (e, c) in f.terms() {
        let lambda = &k * &GaussRat::from_int((e[h.index()] - e[a.index()]) as i64);
        let factor = lambda.powi(power as i32).expect("non-negative power");
        out.add_term(*e, &(c * &factor));
    }
    out
}

/// Which version of the tangential operator to apply.
#[derive(Clone, Debug)]
pub enum TangentialMode<'a> {
    /// `T_w^power` as a differential operator.
    Raw { power: u32 },
    /// A reduced form `Σ c_j w̄^j ∂^j_{w̄}`.
    Form(&'a TangentialForm),
}

/// Evaluate the tangential operator applied to `f` in `slot` at `point`.
pub fn apply_tangential(
    mode: TangentialMode<'_>,
    f: &SymbolicFunction,
    slot: Slot,
    point: [Complex64; 2],
) -> Result<Complex64> {
    let g = match mode {
        TangentialMode::Raw { power } => apply_tangential_raw(f, slot, power),
        TangentialMode::Form(form) => form.apply_symbolic(f, slot),
    };
    g.eval(point)
}

/// `T_w(|w|² − ρ²)` at `w = ρe^{iθ}`.
pub fn check_tangency(rho: f64, theta: f64) -> Result<Complex64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("ρ = {rho} is not in (0, 1)")));
    }
    let rho_sq = rat_from_f64(rho * rho).ok_or_else(|| Error::Domain("non-finite ρ".into()))?;
    let defining = SymbolicFunction::from_monomial(crate::symbolic::Monomial::unit(1, 0, 1, 0))
        .sub(&SymbolicFunction::constant(GaussRat::from_rational(rho_sq)));
    let w = Complex64::from_polar(rho, theta);
    apply_tangential_raw(&defining, Slot::First, 1).eval([w, Complex64::new(0.0, 0.0)])
}

/// Coefficients `d_j` with `w̄^b ∂^b_{w̄} = Σ_{j≤b} d_j T_w^j` on
/// antiholomorphic functions.
///
/// This is the inverse of the triangular relation produced by
/// [`tangential_power`]; it is what the integration-by-parts rewrite of the
/// `η̄₂`-derivative actually needs.
pub fn euler_to_tangential(b: usize) -> Vec<GaussRat> {
    // Row j of M holds the coefficients of T^j in the basis E_i = w̄^i ∂^i_w̄.
    let rows: Vec<Vec<GaussRat>> = (0..=b).map(|j| tangential_power(j).coeffs().to_vec()).collect();
    // Solve Σ_j d_j M[j][i] = δ_{ib} for d by back substitution from i = b down.
    let mut d = vec![GaussRat::zero(); b + 1];
    for i in (0..=b).rev() {
        let mut rhs = if i == b { GaussRat::one() } else { GaussRat::zero() };
        for (j, dj) in d.iter().enumerate().skip(i + 1) {
            rhs -= &(dj * &rows[j][i]);
        }
        d[i] = &rhs / &rows[i][i];
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use crate::symbolic::Monomial;

    fn poly_of(op: &WOperator, a: u32, b: u32) -> Vec<GaussRat> {
        op.term(a, b).map(|p| p.coeffs().to_vec()).unwrap_or_default()
    }

    #[test]
    fn first_order_rules() {
        let d1 = transfer_dz(MultiIndex2(1, 0));
        assert_eq!(d1.terms().count(), 1);
        assert_eq!(poly_of(&d1, 1, 0), vec![GaussRat::one()]);
        assert_eq!(d1.w2_exponent(0), -1);

        let d2 = transfer_dz(MultiIndex2(0, 1));
        assert_eq!(d2.terms().count(), 2);
        assert_eq!(poly_of(&d2, 1, 0), vec![GaussRat::zero(), GaussRat::from_int(-1)]);
        assert_eq!(d2.w2_exponent(0), -1);
        assert_eq!(poly_of(&d2, 0, 1), vec![GaussRat::one()]);
        assert_eq!(d2.w2_exponent(1), 0);
    }

    #[test]
    fn second_order_in_z1_is_a_single_term() {
        let op = transfer_dz(MultiIndex2(2, 0));
        assert_eq!(op.terms().count(), 1);
        assert_eq!(poly_of(&op, 2, 0), vec![GaussRat::one()]);
        assert_eq!(op.w2_exponent(0), -2);
    }

    #[test]
    fn composition_order_does_not_matter() {
        for beta in MultiIndex2::up_to(6) {
            assert_eq!(transfer_dz(beta), transfer_dz_reversed(beta), "{beta:?}");
        }
    }

    #[test]
    fn degree_and_key_bounds() {
        for beta in MultiIndex2::up_to(6) {
            let m = beta.order();
            let op = transfer_dz(beta);
            assert_eq!(op.order(), m);
            for (&(a, b), p) in op.terms() {
                assert!(a + b <= m);
                assert!(p.degree().unwrap() as u32 <= m);
            }
        }
    }

    #[test]
    fn apply_examples() {
        let z1 = SymbolicFunction::from_monomial(Monomial::unit(1, 1, 0, 0)); // w₁w₂ = z₁∘Ψ
        let w = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5)];
        let v = apply_woperator(&transfer_dz(MultiIndex2(1, 0)), &z1, w).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let v = apply_woperator(&transfer_dz(MultiIndex2(0, 1)), &z1, w).unwrap();
        assert!(v.norm() < 1e-15);

        // (w₁w₂)²w₂ = z₁²z₂ ∘ Ψ ; ∂²/∂z₁∂z₂ = 2z₁ = 1/2 at Ψ(1/2, 1/2)
        let g = SymbolicFunction::from_monomial(Monomial::unit(2, 3, 0, 0));
        let half = GaussRat::from_ratio(1, 2);
        let v = apply_woperator_exact(&transfer_dz(MultiIndex2(1, 1)), &g, &[half.clone(), half.clone()]).unwrap();
        assert_eq!(v, half);
    }

    #[test]
    fn apply_rejects_w2_zero() {
        let f = SymbolicFunction::constant(GaussRat::one());
        let err = apply_woperator(&WOperator::identity(), &f, [Complex64::new(0.1, 0.0), Complex64::new(0.0, 0.0)]);
        assert!(matches!(err, Err(Error::SingularPoint(_))));
    }

    #[test]
    fn sup_bound_small_orders() {
        assert_eq!(coeff_sup_bound(0), 1.0);
        assert_eq!(coeff_sup_bound(1), 1.0);
        let mut prev = 0.0;
        for k in 0..=5 {
            let c = coeff_sup_bound(k);
            assert!(c.is_finite() && c >= prev);
            prev = c;
        }
    }

    #[test]
    fn tangential_power_small_cases() {
        assert_eq!(tangential_power(0).coeffs(), &[GaussRat::one()]);
        assert_eq!(tangential_power(1).coeffs(), &[GaussRat::zero(), GaussRat::new(int(0), rat(1, 2))]);
        let quarter = GaussRat::from_ratio(-1, 4);
        assert_eq!(tangential_power(2).coeffs(), &[GaussRat::zero(), quarter.clone(), quarter]);
    }

    #[test]
    fn raw_and_form_agree_on_antiholomorphic() {
        let f = SymbolicFunction::from_monomial(Monomial::unit(0, 0, 1, 0)); // w̄
        let p = [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)];
        let form = tangential_power(1);
        let a = apply_tangential(TangentialMode::Form(&form), &f, Slot::First, p).unwrap();
        let b = apply_tangential(TangentialMode::Raw { power: 1 }, &f, Slot::First, p).unwrap();
        assert!((a - Complex64::new(0.0, 0.25)).norm() < 1e-15);
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn raw_tangential_kills_modulus_squared() {
        let f = SymbolicFunction::from_monomial(Monomial::unit(0, 1, 0, 1)); // |w₂|²
        assert!(apply_tangential_raw(&f, Slot::Second, 1).is_zero());
    }

    #[test]
    fn tangency_is_exact_zero() {
        for (rho, theta) in [(0.5, 0.0), (0.9, std::f64::consts::FRAC_PI_3), (0.25, 7.0)] {
            assert_eq!(check_tangency(rho, theta).unwrap(), Complex64::new(0.0, 0.0));
        }
        assert!(check_tangency(1.0, 0.0).is_err());
        assert!(check_tangency(0.0, 0.0).is_err());
    }

    #[test]
    fn euler_to_tangential_first_order() {
        // w̄∂_w̄ = −2i·T on antiholomorphic functions.
        let d = euler_to_tangential(1);
        assert_eq!(d, vec![GaussRat::zero(), GaussRat::new(int(0), int(-2))]);
    }

    #[test]
    fn operator_json_round_trip() {
        let op = transfer_dz(MultiIndex2(2, 3));
        let j = op.to_json();
        for (key, t) in &j.terms {
            let b: i32 = key.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(t.w2_exponent, b - 5);
        }
        let text = serde_json::to_string(&j).unwrap();
        let back: WOperatorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(WOperator::from_json(&back).unwrap(), op);
    }
}
