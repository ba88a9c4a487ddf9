//! Tensor-product quadrature on the disc, the punctured disc and the
//! Hartogs triangle.
//!
//! Planar rules live on the annulus `ε_min < |w| < 1`. The radial interval
//! is split into geometric levels `(q^{ℓ+1}, q^ℓ)` with grading ratio `q`,
//! the innermost level clamped at `ε_min`; each level is divided into
//! uniform cells carrying Gauss–Legendre nodes. The angular rule is the
//! uniform trapezoid rule, exact for trigonometric polynomials of degree
//! below the angular count.
//!
//! The Hartogs triangle is integrated in product-model coordinates: with
//! `z = Ψ(w) = (w₁w₂, w₂)` one has `dV(z) = |w₂|² dV(w)`, so a rule on
//! `D × D*` (an inner disc rule for `w₁` and an annular rule for `w₂`) with
//! the extra factor `|w₂|²` integrates over `H ∩ {|z₂| > ε_min}`.
//!
//! All reductions use a fixed pairwise order so results do not depend on
//! the number of worker threads.

mod apply;
mod gauss;
mod norms;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::symbolic::SymbolicFunction;
use crate::{Error, Result};

pub use apply::{bergman_apply, bergman_apply_with_error, op_apply, op_apply_with_error, PlanarOp};
pub use gauss::gauss_legendre;
pub use norms::{planar_lp_power, sobolev_norm, sobolev_order_powers, FnBundle, NormRequest, SobolevParams};

/// Gauss–Legendre nodes per radial cell.
pub const GAUSS_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Disc,
    PuncturedDisc,
    Hartogs,
}

impl Domain {
    pub fn tag(self) -> &'static str {
        match self {
            Domain::Disc => "disc",
            Domain::PuncturedDisc => "punctured-disc",
            Domain::Hartogs => "hartogs",
        }
    }

    pub fn is_planar(self) -> bool {
        self != Domain::Hartogs
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Grid resolution. `inner_*` control the `w₁` disc rule of Hartogs grids
/// and default to a fraction of the outer counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub radial_cells: usize,
    pub angular_count: usize,
    pub eps_min: f64,
    pub grading: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_radial_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_angular_count: Option<usize>,
}

impl Default for GridParams {
    fn default() -> Self {
        Self::new(48, 96, 1e-5, 0.5)
    }
}

impl GridParams {
    pub fn new(radial_cells: usize, angular_count: usize, eps_min: f64, grading: f64) -> Self {
        Self { radial_cells, angular_count, eps_min, grading, inner_radial_cells: None, inner_angular_count: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial_cells == 0 {
            return Err(Error::Config("radial_cells must be positive".into()));
        }
        if self.angular_count == 0 {
            return Err(Error::Config("angular_count must be positive".into()));
        }
        if !(self.eps_min > 0.0 && self.eps_min < 1.0) {
            return Err(Error::Config(format!("eps_min = {} must lie in (0, 1)", self.eps_min)));
        }
        if !(self.grading > 0.0 && self.grading < 1.0) {
            return Err(Error::Config(format!("grading = {} must lie in (0, 1)", self.grading)));
        }
        if self.inner_radial_cells == Some(0) || self.inner_angular_count == Some(0) {
            return Err(Error::Config("inner grid counts must be positive".into()));
        }
        Ok(())
    }

    pub fn inner_cells(&self) -> usize {
        self.inner_radial_cells.unwrap_or((self.radial_cells / 8).max(2))
    }

    pub fn inner_angles(&self) -> usize {
        self.inner_angular_count.unwrap_or((self.angular_count / 2).max(16))
    }

    /// Twice the cells and angles in every direction.
    pub fn refined(&self) -> Self {
        Self {
            radial_cells: 2 * self.radial_cells,
            angular_count: 2 * self.angular_count,
            inner_radial_cells: Some(2 * self.inner_cells()),
            inner_angular_count: Some(2 * self.inner_angles()),
            ..self.clone()
        }
    }

    pub fn with_eps(&self, eps_min: f64) -> Self {
        Self { eps_min, ..self.clone() }
    }
}

/// A planar tensor rule for area measure; nodes are stored radius-major.
#[derive(Clone, Debug)]
pub struct PlanarRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub radii: Vec<f64>,
    pub angular_count: usize,
}

impl PlanarRule {
    fn from_radial(radial: &[(f64, f64)], angular_count: usize) -> Self {
        let dtheta = 2.0 * PI / angular_count as f64;
        let angles: Vec<Complex64> =
            (0..angular_count).map(|k| Complex64::from_polar(1.0, dtheta * (k as f64 + 0.5))).collect();
        let mut nodes = Vec::with_capacity(radial.len() * angular_count);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for &(r, wr) in radial {
            for &u in &angles {
                nodes.push(u * r);
                weights.push(wr * r * dtheta);
            }
        }
        Self { nodes, weights, radii: radial.iter().map(|p| p.0).collect(), angular_count }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Radius of node `i`.
    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i / self.angular_count]
    }
}

/// Radial Gauss nodes on the given cells: `(r, dr-weight)` pairs.
fn radial_nodes(cells: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(GAUSS_POINTS);
    let mut out = Vec::with_capacity(cells.len() * GAUSS_POINTS);
    for &(lo, hi) in cells {
        let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        for (x, w) in x.iter().zip(&w) {
            out.push((mid + half * x, half * w));
        }
    }
    out
}

/// Geometric levels on `(ε, 1)`, outermost first, each split into
/// uniform cells; every level gets at least one cell.
pub fn graded_cells(eps: f64, grading: f64, radial_cells: usize) -> Vec<(f64, f64)> {
    let levels = ((eps.ln() / grading.ln()).ceil() as usize).max(1);
    let base = radial_cells / levels;
    let extra = radial_cells % levels;
    let mut cells = Vec::new();
    let mut hi = 1.0;
    for l in 0..levels {
        let lo = if l + 1 == levels { eps } else { (hi * grading).max(eps) };
        let n = (base + usize::from(l < extra)).max(1);
        let h = (hi - lo) / n as f64;
        // innermost cell first within a level keeps the list ascending
        // after the final reverse
        for c in (0..n).rev() {
            let a = lo + h * c as f64;
            let b = if c + 1 == n { hi } else { lo + h * (c + 1) as f64 };
            cells.push((a, b));
        }
        hi = lo;
    }
    cells.reverse();
    cells
}

fn uniform_cells(n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|c| (c as f64 / n as f64, (c + 1) as f64 / n as f64)).collect()
}

/// An immutable quadrature grid.
#[derive(Clone, Debug)]
pub struct QuadGrid {
    pub domain: Domain,
    pub params: GridParams,
    /// The annular rule: `w` for planar grids, `w₂` for Hartogs grids.
    pub outer: PlanarRule,
    /// The `w₁` disc rule of Hartogs grids.
    pub inner: Option<PlanarRule>,
    pub cells: Vec<(f64, f64)>,
}

/// Build a grid with default inner counts.
pub fn build_grid(
    domain: Domain,
    radial_cells: usize,
    angular_count: usize,
    eps_min: f64,
    grading: f64,
) -> Result<QuadGrid> {
    QuadGrid::new(domain, GridParams::new(radial_cells, angular_count, eps_min, grading))
}

impl QuadGrid {
    pub fn new(domain: Domain, params: GridParams) -> Result<Self> {
        params.validate()?;
        let cells = graded_cells(params.eps_min, params.grading, params.radial_cells);
        let outer = PlanarRule::from_radial(&radial_nodes(&cells), params.angular_count);
        let inner = (domain == Domain::Hartogs).then(|| {
            PlanarRule::from_radial(&radial_nodes(&uniform_cells(params.inner_cells())), params.inner_angles())
        });
        Ok(Self { domain, params, outer, inner, cells })
    }

    pub fn eps_min(&self) -> f64 {
        self.params.eps_min
    }

    pub fn refined(&self) -> Self {
        Self::new(self.domain, self.params.refined()).expect("refining a valid grid")
    }

    pub fn node_count(&self) -> usize {
        self.outer.len() * self.inner.as_ref().map_or(1, PlanarRule::len)
    }

    /// Sum of all weights: the measure of the truncated domain.
    pub fn total_weight(&self) -> f64 {
        match &self.inner {
            None => pairwise_sum_f64(&self.outer.weights),
            Some(inner) => {
                let outer: Vec<f64> =
                    self.outer.weights.iter().zip(&self.outer.nodes).map(|(w, z)| w * z.norm_sqr()).collect();
                pairwise_sum_f64(&outer) * pairwise_sum_f64(&inner.weights)
            }
        }
    }

    /// Exact measure of the truncated domain.
    pub fn truncated_measure(&self) -> f64 {
        let e = self.params.eps_min;
        match self.domain {
            Domain::Disc | Domain::PuncturedDisc => PI * (1.0 - e * e),
            Domain::Hartogs => PI * PI / 2.0 * (1.0 - e.powi(4)),
        }
    }

    /// Stable hash of the domain and all resolution parameters.
    pub fn fingerprint(&self) -> String {
        let p = &self.params;
        let canon = format!(
            "{}|rc={}|ac={}|eps={:016x}|q={:016x}|irc={}|iac={}|gauss={}",
            self.domain.tag(),
            p.radial_cells,
            p.angular_count,
            p.eps_min.to_bits(),
            p.grading.to_bits(),
            p.inner_cells(),
            p.inner_angles(),
            GAUSS_POINTS
        );
        hex::encode(&Sha256::digest(canon.as_bytes())[..8])
    }

    /// Whether `p` lies in the truncated domain (`|z₂| > ε` on `H`,
    /// `|w| > ε` on `D*`).
    pub fn contains(&self, p: &[Complex64]) -> bool {
        let e = self.params.eps_min;
        match self.domain {
            Domain::Disc => p.len() == 1 && p[0].norm() < 1.0,
            Domain::PuncturedDisc => p.len() == 1 && p[0].norm() > e && p[0].norm() < 1.0,
            Domain::Hartogs => p.len() == 2 && p[0].norm() < p[1].norm() && p[1].norm() > e && p[1].norm() < 1.0,
        }
    }
}

/// A value with an error estimate from a twice-refined grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error_estimate: f64,
}

/// A function of one (planar) or two (Hartogs, in `z`) complex coordinates.
pub type PointFn<'a> = dyn Fn(&[Complex64]) -> Complex64 + Sync + 'a;

/// An integrand: a symbolic monomial sum or an opaque closure. Planar
/// symbolic functions use the first variable slot (`z₁`, `z̄₁`).
#[derive(Clone, Copy)]
pub enum Evaluable<'a> {
    Symbolic(&'a SymbolicFunction),
    Func(&'a PointFn<'a>),
}

impl Evaluable<'_> {
    pub(crate) fn eval(&self, p: &[Complex64]) -> Complex64 {
        match self {
            Evaluable::Func(f) => f(p),
            Evaluable::Symbolic(f) => {
                let q = if p.len() == 1 { [p[0], Complex64::new(1.0, 0.0)] } else { [p[0], p[1]] };
                f.eval(q).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
            }
        }
    }
}

/// Balanced pairwise sum in index order.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

pub fn pairwise_sum_f64(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum_f64(&v[..n / 2]) + pairwise_sum_f64(&v[n / 2..]),
    }
}

fn check_finite(v: Complex64, at: &[Complex64]) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { location: format!("{at:?}"), message: format!("non-finite value {v}") })
    }
}

/// `Σ weight · g(node)` over the grid, where `g` receives the node in
/// domain coordinates together with the product-model coordinates.
pub(crate) fn reduce<G>(grid: &QuadGrid, g: G) -> Result<Complex64>
where
    G: Fn(&[Complex64], &[Complex64]) -> Complex64 + Sync,
{
    let outer = &grid.outer;
    let partial: Vec<Result<Complex64>> = match &grid.inner {
        None => (0..outer.len())
            .into_par_iter()
            .map(|j| {
                let p = [outer.nodes[j]];
                Ok(check_finite(g(&p, &p), &p)? * outer.weights[j])
            })
            .collect(),
        Some(inner) => (0..outer.len())
            .into_par_iter()
            .map(|j| {
                let w2 = outer.nodes[j];
                let mut terms = Vec::with_capacity(inner.len());
                for (w1, u) in inner.nodes.iter().zip(&inner.weights) {
                    let w = [*w1, w2];
                    let z = [w1 * w2, w2];
                    terms.push(check_finite(g(&z, &w), &z)? * *u);
                }
                Ok(pairwise_sum(&terms) * outer.weights[j])
            })
            .collect(),
    };
    let partial = partial.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&partial))
}

/// `∫ f` over the truncated domain of `grid`, value only.
pub fn integrate_value(f: Evaluable<'_>, grid: &QuadGrid) -> Result<Complex64> {
    match (f, grid.domain) {
        (Evaluable::Symbolic(s), Domain::Hartogs) => integrate_symbolic_hartogs(s, grid),
        (f, Domain::Hartogs) => reduce(grid, |z, w| f.eval(z) * w[1].norm_sqr()),
        (f, _) => reduce(grid, |z, _| f.eval(z)),
    }
}

/// `∫ f` with an error estimate from the refined grid.
pub fn integrate(f: Evaluable<'_>, grid: &QuadGrid) -> Result<Estimate> {
    let value = integrate_value(f, grid)?;
    let fine = integrate_value(f, &grid.refined())?;
    Ok(Estimate { value, error_estimate: (fine - value).norm() })
}

/// Planar rule sums `Σ u · w^m w̄^n`, memoized per exponent pair.
pub(crate) fn planar_moment(rule: &PlanarRule, weight: impl Fn(usize) -> f64, m: i32, n: i32) -> Complex64 {
    let terms: Vec<Complex64> =
        rule.nodes.iter().enumerate().map(|(i, w)| w.powi(m) * w.conj().powi(n) * weight(i)).collect();
    pairwise_sum(&terms)
}

/// Separable evaluation: each monomial of `f` pulls back to a product of a
/// `w₁` factor and a `w₂` factor.
fn integrate_symbolic_hartogs(f: &SymbolicFunction, grid: &QuadGrid) -> Result<Complex64> {
    let inner = grid.inner.as_ref().expect("hartogs grid has an inner rule");
    let outer = &grid.outer;
    let mut terms = Vec::new();
    for m in f.monomials() {
        let (a, b, c, d) = (m.a(), m.b(), m.c(), m.d());
        let i1 = planar_moment(inner, |i| inner.weights[i], a, c);
        let i2 = planar_moment(outer, |j| outer.weights[j] * outer.nodes[j].norm_sqr(), a + b, c + d);
        terms.push(m.coeff.to_complex() * i1 * i2);
    }
    let v = pairwise_sum(&terms);
    check_finite(v, &[])
}
