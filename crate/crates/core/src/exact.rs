//! Exact scalars: Gaussian rationals and rational multiples of powers of π.
//!
//! Every closed-form integral in this crate is a rational number times
//! `π^k`, and every operator coefficient is a Gaussian rational (the
//! tangential calculus needs `1/(2i) = -i/2`). Both are kept exact so that
//! identities can be checked with `==` instead of a tolerance.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(q: &Rational) -> f64 {
    // `ToPrimitive` on BigRational handles huge numerators/denominators.
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational image of a finite `f64`.
pub fn rat_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Exact value of a decimal literal such as `12`, `-0.25` or `1.5e-3`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac}");
    let n = BigInt::parse_bytes(if digits.is_empty() { b"0" } else { digits.as_bytes() }, 10)?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = Rational::from_integer(n);
    if scale >= 0 {
        q *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -q } else { q })
}

/// A complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRat {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn from_rational(re: Rational) -> Self {
        Self { re, im: Rational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(rat(num, den))
    }

    pub fn i() -> Self {
        Self { re: Rational::zero(), im: Rational::one() }
    }

    pub fn zero() -> Self {
        Self { re: Rational::zero(), im: Rational::zero() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|z|^2`, exact.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(Self { re: &self.re / &n, im: -&self.im / &n })
    }

    /// Integer power; negative exponents invert. `None` on `0^(-n)`.
    pub fn powi(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &sq;
            }
            n >>= 1;
            if n > 0 {
                sq = &sq * &sq;
            }
        }
        Some(acc)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    /// Exact rational image of a complex float.
    pub fn from_complex(z: Complex64) -> Option<Self> {
        Some(Self { re: rat_from_f64(z.re)?, im: rat_from_f64(z.im)? })
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_complex().norm()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Serialized form `[num, den, num_i, den_i]`.
    pub fn to_parts(&self) -> [BigInt; 4] {
        [self.re.numer().clone(), self.re.denom().clone(), self.im.numer().clone(), self.im.denom().clone()]
    }

    pub fn from_parts(parts: &[BigInt; 4]) -> Option<Self> {
        if parts[1].is_zero() || parts[3].is_zero() {
            return None;
        }
        Some(Self {
            re: Rational::new(parts[0].clone(), parts[1].clone()),
            im: Rational::new(parts[2].clone(), parts[3].clone()),
        })
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({} - {}i)", self.re, -self.im.clone())
                } else {
                    write!(f, "({} + {}i)", self.re, self.im)
                }
            }
        }
    }
}

impl From<Rational> for GaussRat {
    fn from(q: Rational) -> Self {
        Self::from_rational(q)
    }
}

impl From<i64> for GaussRat {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re * &rhs.re - &self.im * &rhs.im, im: &self.re * &rhs.im + &self.im * &rhs.re }
    }
}

impl<'a> Div<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &GaussRat) -> GaussRat {
        self * &rhs.inv().expect("division by zero Gaussian rational")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for GaussRat {
            type Output = GaussRat;
            fn $m(self, rhs: GaussRat) -> GaussRat {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl AddAssign<&GaussRat> for GaussRat {
    fn add_assign(&mut self, rhs: &GaussRat) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&GaussRat> for GaussRat {
    fn sub_assign(&mut self, rhs: &GaussRat) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&GaussRat> for GaussRat {
    fn mul_assign(&mut self, rhs: &GaussRat) {
        *self = &*self * rhs;
    }
}

impl Mul<&Rational> for &GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &Rational) -> GaussRat {
        GaussRat { re: &self.re * rhs, im: &self.im * rhs }
    }
}

/// A real number `q · π^pi_power` with `q` rational in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactScalar {
    pub q: Rational,
    pub pi_power: i32,
}

impl ExactScalar {
    pub fn new(q: Rational, pi_power: i32) -> Self {
        Self { q, pi_power }
    }

    pub fn rational(q: Rational) -> Self {
        Self { q, pi_power: 0 }
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.q) * std::f64::consts::PI.powi(self.pi_power)
    }

    /// Product; π powers add.
    pub fn mul(&self, other: &ExactScalar) -> ExactScalar {
        ExactScalar { q: &self.q * &other.q, pi_power: self.pi_power + other.pi_power }
    }

    pub fn to_json(&self) -> ExactScalarJson {
        ExactScalarJson::from(self)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_power {
            0 => write!(f, "{}", self.q),
            1 => write!(f, "{}·π", self.q),
            k => write!(f, "{}·π^{}", self.q, k),
        }
    }
}

/// A complex exact value `c · π^pi_power` with `c` a Gaussian rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactComplex {
    pub c: GaussRat,
    pub pi_power: i32,
}

impl ExactComplex {
    pub fn zero() -> Self {
        Self { c: GaussRat::zero(), pi_power: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        self.c.to_complex() * std::f64::consts::PI.powi(self.pi_power)
    }

    /// Sum of two values with the same π power (zero adopts the other's).
    pub fn add(&self, other: &ExactComplex) -> Option<ExactComplex> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        (self.pi_power == other.pi_power).then(|| ExactComplex { c: &self.c + &other.c, pi_power: self.pi_power })
    }
}

/// Wire form of an [`ExactScalar`]: `{num, den, pi_power}` plus a float rendering.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExactScalarJson {
    pub num: serde_json::Value,
    pub den: serde_json::Value,
    pub pi_power: i32,
}

/// Integers that fit in `i64` go out as JSON numbers, larger ones as strings.
pub fn bigint_to_json(n: &BigInt) -> serde_json::Value {
    match n.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::String(n.to_string()),
    }
}

pub fn bigint_from_json(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::Number(n) => n.as_i64().map(BigInt::from),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

impl From<&ExactScalar> for ExactScalarJson {
    fn from(x: &ExactScalar) -> Self {
        Self { num: bigint_to_json(x.q.numer()), den: bigint_to_json(x.q.denom()), pi_power: x.pi_power }
    }
}

impl TryFrom<&ExactScalarJson> for ExactScalar {
    type Error = crate::Error;
    fn try_from(j: &ExactScalarJson) -> crate::Result<Self> {
        let bad = || crate::Error::Config("malformed exact scalar".into());
        let num = bigint_from_json(&j.num).ok_or_else(bad)?;
        let den = bigint_from_json(&j.den).ok_or_else(bad)?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(ExactScalar::new(Rational::new(num, den), j.pi_power))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals() {
        assert_eq!(parse_decimal("0.5"), Some(rat(1, 2)));
        assert_eq!(parse_decimal("-1.25e-1"), Some(rat(-1, 8)));
        assert_eq!(parse_decimal("3e2"), Some(int(300)));
        assert_eq!(parse_decimal(".75"), Some(rat(3, 4)));
        assert_eq!(parse_decimal("1.2.3"), None);
        assert_eq!(parse_decimal("e3"), None);
    }

    #[test]
    fn one_over_two_i_is_minus_half_i() {
        let two_i = &GaussRat::from_int(2) * &GaussRat::i();
        let q = &GaussRat::one() / &two_i;
        assert_eq!(q, GaussRat::new(int(0), rat(-1, 2)));
    }

    #[test]
    fn powi_handles_negative_exponents() {
        let z = GaussRat::new(rat(1, 2), rat(1, 2));
        let back = &z.powi(-3).unwrap() * &z.powi(3).unwrap();
        assert_eq!(back, GaussRat::one());
        assert!(GaussRat::zero().powi(-1).is_none());
        assert_eq!(GaussRat::zero().powi(0).unwrap(), GaussRat::one());
    }

    #[test]
    fn exact_scalar_json_round_trip() {
        let x = ExactScalar::new(rat(-7, 12), 2);
        let j = x.to_json();
        assert_eq!(j.num, serde_json::json!(-7));
        assert_eq!(ExactScalar::try_from(&j).unwrap(), x);
    }

    #[test]
    fn huge_integers_serialize_as_strings() {
        let big = BigInt::from(i64::MAX) * BigInt::from(10);
        let v = bigint_to_json(&big);
        assert!(v.is_string());
        assert_eq!(bigint_from_json(&v).unwrap(), big);
    }
}
