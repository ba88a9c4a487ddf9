//! Finite sums of monomials `c · z₁^a z₂^b z̄₁^c z̄₂^d` in two complex
//! variables, closed under Wirtinger differentiation.
//!
//! The same type serves for functions of `z` on the Hartogs triangle and of
//! `w` on the product model; only the interpretation of the slots changes.
//! Exponents of `z₂`/`z̄₂` may be negative, which is what makes `1/z₂` and the
//! transported functions `g∘Ψ` representable.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::exact::GaussRat;
use crate::{Error, Result};

/// One of the four Wirtinger directions, in the order `(z₁, z₂, z̄₁, z̄₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Z1 = 0,
    Z2 = 1,
    Z1Bar = 2,
    Z2Bar = 3,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::Z1, Var::Z2, Var::Z1Bar, Var::Z2Bar];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Holomorphic and antiholomorphic directions of one complex slot.
    pub fn slot(slot: Slot) -> (Var, Var) {
        match slot {
            Slot::First => (Var::Z1, Var::Z1Bar),
            Slot::Second => (Var::Z2, Var::Z2Bar),
        }
    }
}

/// A complex coordinate slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

/// Exponents `[a, b, c, d]` of `z₁^a z₂^b z̄₁^c z̄₂^d`.
pub type Exponents = [i32; 4];

/// A single coefficient-bearing monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub exps: Exponents,
    pub coeff: GaussRat,
}

impl Monomial {
    /// `coeff · z₁^a z₂^b z̄₁^c z̄₂^d`.
    pub fn new(a: i32, b: i32, c: i32, d: i32, coeff: GaussRat) -> Self {
        Self { exps: [a, b, c, d], coeff }
    }

    pub fn unit(a: i32, b: i32, c: i32, d: i32) -> Self {
        Self::new(a, b, c, d, GaussRat::one())
    }

    pub fn a(&self) -> i32 {
        self.exps[0]
    }
    pub fn b(&self) -> i32 {
        self.exps[1]
    }
    pub fn c(&self) -> i32 {
        self.exps[2]
    }
    pub fn d(&self) -> i32 {
        self.exps[3]
    }

    pub fn is_holomorphic(&self) -> bool {
        self.c() == 0 && self.d() == 0
    }

    /// Square integrability on the Hartogs triangle.
    pub fn in_l2_hartogs(&self) -> bool {
        let s = self.a() + self.c();
        let t = self.b() + self.d();
        s > -1 && s + t > -2
    }
}

/// A finite sum of monomials with like terms collected; zero coefficients
/// are never stored.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct SymbolicFunction {
    terms: BTreeMap<Exponents, GaussRat>,
}

impl SymbolicFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussRat) -> Self {
        Self::from_monomial(Monomial::new(0, 0, 0, 0, c))
    }

    pub fn from_monomial(m: Monomial) -> Self {
        let mut f = Self::zero();
        f.add_term(m.exps, &m.coeff);
        f
    }

    pub fn from_monomials(ms: impl IntoIterator<Item = Monomial>) -> Self {
        let mut f = Self::zero();
        for m in ms {
            f.add_term(m.exps, &m.coeff);
        }
        f
    }

    /// The coordinate function of `var`.
    pub fn var(var: Var) -> Self {
        let mut e = [0; 4];
        e[var.index()] = 1;
        Self::from_monomial(Monomial { exps: e, coeff: GaussRat::one() })
    }

    pub fn add_term(&mut self, exps: Exponents, coeff: &GaussRat) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_insert_with(GaussRat::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &GaussRat)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms.iter().map(|(e, c)| Monomial { exps: *e, coeff: c.clone() })
    }

    pub fn coeff(&self, exps: &Exponents) -> GaussRat {
        self.terms.get(exps).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|e| e[2] == 0 && e[3] == 0)
    }

    /// True when no term depends on `slot`'s holomorphic variable.
    pub fn is_antiholomorphic_in(&self, slot: Slot) -> bool {
        let (h, _) = Var::slot(slot);
        self.terms.keys().all(|e| e[h.index()] == 0)
    }

    /// Largest total degree `|a|+|b|+|c|+|d|` over the terms.
    pub fn max_abs_degree(&self) -> i32 {
        self.terms.keys().map(|e| e.iter().map(|x| x.abs()).sum()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-GaussRat::one()))
    }

    pub fn scale(&self, s: &GaussRat) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, &(c * s));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]];
                out.add_term(e, &(c1 * c2));
            }
        }
        out
    }

    /// Multiply every term by `z^shift` (componentwise exponent shift).
    pub fn shift(&self, shift: Exponents) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let e2 = [e[0] + shift[0], e[1] + shift[1], e[2] + shift[2], e[3] + shift[3]];
            out.add_term(e2, c);
        }
        out
    }

    /// Integer power; negative powers only for a single monomial.
    pub fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            if self.terms.len() != 1 {
                return Err(Error::Domain("negative powers are only defined for single monomials".into()));
            }
            let (e, c) = self.terms.iter().next().expect("one term");
            let inv = c.inv().ok_or_else(|| Error::Domain("zero to a negative power".into()))?;
            let m = Self::from_monomial(Monomial { exps: e.map(|x| -x), coeff: inv });
            return m.powi(-n);
        }
        let mut acc = Self::constant(GaussRat::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// Complex conjugate: swaps holomorphic and antiholomorphic exponents.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term([e[2], e[3], e[0], e[1]], &c.conj());
        }
        out
    }

    /// Wirtinger derivative in `var`.
    pub fn diff(&self, var: Var) -> Self {
        let i = var.index();
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = *e;
            e2[i] -= 1;
            out.add_term(e2, &(c * &GaussRat::from_int(e[i] as i64)));
        }
        out
    }

    pub fn diff_n(&self, var: Var, n: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..n {
            if out.is_zero() {
                break;
            }
            out = out.diff(var);
        }
        out
    }

    /// `D^α` with `α = (α₁, α₂, α₃, α₄)` orders in `(z₁, z₂, z̄₁, z̄₂)`.
    pub fn diff_multi(&self, alpha: [u32; 4]) -> Self {
        let mut out = self.clone();
        for v in Var::ALL {
            out = out.diff_n(v, alpha[v.index()]);
        }
        out
    }

    /// Exact evaluation at a Gaussian-rational point.
    pub fn eval_exact(&self, p: &[GaussRat; 2]) -> Result<GaussRat> {
        let bases = [p[0].clone(), p[1].clone(), p[0].conj(), p[1].conj()];
        let mut acc = GaussRat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for k in 0..4 {
                if e[k] == 0 {
                    continue;
                }
                let pw = bases[k]
                    .powi(e[k])
                    .ok_or_else(|| Error::SingularPoint(format!("negative power of a vanishing coordinate {k}")))?;
                t = &t * &pw;
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Float evaluation.
    pub fn eval(&self, p: [Complex64; 2]) -> Result<Complex64> {
        let bases = [p[0], p[1], p[0].conj(), p[1].conj()];
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = c.to_complex();
            for k in 0..4 {
                if e[k] == 0 {
                    continue;
                }
                if e[k] < 0 && bases[k] == Complex64::new(0.0, 0.0) {
                    return Err(Error::SingularPoint(format!("negative power of a vanishing coordinate {k}")));
                }
                t *= bases[k].powi(e[k]);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// `f∘Ψ` with `Ψ(w₁, w₂) = (w₁w₂, w₂)`: the monomial
    /// `z₁^a z₂^b z̄₁^c z̄₂^d` becomes `w₁^a w₂^{a+b} w̄₁^c w̄₂^{c+d}`.
    pub fn pullback_psi(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term([e[0], e[0] + e[1], e[2], e[2] + e[3]], c);
        }
        out
    }

    /// `f∘Φ` with `Φ(z₁, z₂) = (z₁/z₂, z₂)`; inverse of [`Self::pullback_psi`].
    pub fn pullback_phi(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term([e[0], e[1] - e[0], e[2], e[3] - e[2]], c);
        }
        out
    }
}

impl fmt::Debug for SymbolicFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SymbolicFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        const NAMES: [&str; 4] = ["z1", "z2", "zb1", "zb2"];
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for k in 0..4 {
                match e[k] {
                    0 => {}
                    1 => write!(f, "*{}", NAMES[k])?,
                    n => write!(f, "*{}^{}", NAMES[k], n)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn wirtinger_derivatives_of_modulus_squared() {
        // |z₁|² = z₁ z̄₁ ; ∂z₁ gives z̄₁, ∂z̄₁ gives z₁.
        let f = SymbolicFunction::from_monomial(Monomial::unit(1, 0, 1, 0));
        assert_eq!(f.diff(Var::Z1), SymbolicFunction::var(Var::Z1Bar));
        assert_eq!(f.diff(Var::Z1Bar), SymbolicFunction::var(Var::Z1));
        assert!(f.diff(Var::Z2).is_zero());
    }

    #[test]
    fn negative_powers_differentiate() {
        // d/dz₂ z₂^{-1} = -z₂^{-2}
        let f = SymbolicFunction::from_monomial(Monomial::unit(0, -1, 0, 0));
        let df = f.diff(Var::Z2);
        assert_eq!(df.coeff(&[0, -2, 0, 0]), GaussRat::from_int(-1));
    }

    #[test]
    fn eval_rejects_negative_power_at_zero() {
        let f = SymbolicFunction::from_monomial(Monomial::unit(0, -1, 0, 0));
        assert!(matches!(f.eval([c(0.1, 0.0), c(0.0, 0.0)]), Err(Error::SingularPoint(_))));
        let p = [GaussRat::from_ratio(1, 3), GaussRat::zero()];
        assert!(f.eval_exact(&p).is_err());
    }

    #[test]
    fn pullbacks_are_inverse() {
        let f = SymbolicFunction::from_monomials([
            Monomial::new(2, -1, 1, 3, GaussRat::from_ratio(3, 4)),
            Monomial::new(0, 0, 0, 1, GaussRat::i()),
        ]);
        assert_eq!(f.pullback_psi().pullback_phi(), f);
        let w = [c(0.3, -0.2), c(0.5, 0.4)];
        let z = [w[0] * w[1], w[1]];
        let lhs = f.pullback_psi().eval(w).unwrap();
        let rhs = f.eval(z).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn like_terms_cancel() {
        let x = SymbolicFunction::var(Var::Z1);
        assert!(x.sub(&x).is_zero());
        let sq = x.add(&SymbolicFunction::constant(GaussRat::one())).powi(2).unwrap();
        assert_eq!(sq.coeff(&[1, 0, 0, 0]), GaussRat::from_int(2));
        assert_eq!(sq.len(), 3);
    }

    #[test]
    fn wirtinger_derivative_matches_finite_differences() {
        let f = SymbolicFunction::from_monomials([
            Monomial::new(2, 1, 1, 0, GaussRat::new(rat(1, 2), rat(1, 3))),
            Monomial::new(0, -1, 0, 2, GaussRat::from_int(2)),
        ]);
        let z = [c(0.2, 0.1), c(0.6, -0.3)];
        let h = 1e-5;
        for (slot, hv, av) in [(0usize, Var::Z1, Var::Z1Bar), (1, Var::Z2, Var::Z2Bar)] {
            let shift = |dx: f64, dy: f64| {
                let mut p = z;
                p[slot] += c(dx, dy);
                f.eval(p).unwrap()
            };
            let fx = (shift(h, 0.0) - shift(-h, 0.0)) / (2.0 * h);
            let fy = (shift(0.0, h) - shift(0.0, -h)) / (2.0 * h);
            let dz = (fx - c(0.0, 1.0) * fy) * 0.5;
            let dzb = (fx + c(0.0, 1.0) * fy) * 0.5;
            assert!((dz - f.diff(hv).eval(z).unwrap()).norm() < 1e-8);
            assert!((dzb - f.diff(av).eval(z).unwrap()).norm() < 1e-8);
        }
    }
}
