//! Numerical application of Bergman projections and the planar operators
//! `B_{1,a}`, `B₂`, `B₃`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{pairwise_sum, reduce, Domain, Estimate, Evaluable, PlanarRule, QuadGrid};
use crate::kernels::{eval_kernel_unchecked, map_phi, KernelExpr, KernelId};
use crate::symbolic::SymbolicFunction;
use crate::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);

fn kd(w: Complex64, eta: Complex64) -> Complex64 {
    eval_kernel_unchecked(KernelId::Disc, &[w], &[eta]).unwrap_or(NAN)
}

fn kw(w: Complex64, eta: Complex64) -> Complex64 {
    eval_kernel_unchecked(KernelId::WeightedPuncturedDisc, &[w], &[eta]).unwrap_or(NAN)
}

fn require_grid(grid: &QuadGrid, hartogs: bool, what: &str) -> Result<()> {
    if grid.domain.is_planar() == hartogs {
        let want = if hartogs { "a hartogs" } else { "a planar" };
        return Err(Error::Config(format!("{what} needs {want} grid, got {}", grid.domain)));
    }
    Ok(())
}

fn outside(p: &[Complex64], what: &str) -> Error {
    Error::Domain(format!("{p:?} is outside the truncated {what} domain"))
}

/// Bergman projection `∫ B(z, ζ) f(ζ) dV(ζ)` at `z` by quadrature.
///
/// `Hartogs` points are in `z` coordinates and integrate over the Hartogs
/// grid; `ProductModel` points and integrands are in `w` coordinates on
/// the same grid without the `|w₂|²` factor. The weighted punctured disc
/// includes its weight `|ζ|²` in the integrand.
pub fn bergman_apply(id: KernelId, f: Evaluable<'_>, z: &[Complex64], grid: &QuadGrid) -> Result<Complex64> {
    match id {
        KernelId::Hartogs | KernelId::ProductModel => {
            require_grid(grid, true, id.tag())?;
            let w = if id == KernelId::Hartogs {
                if !grid.contains(z) {
                    return Err(outside(z, "hartogs"));
                }
                map_phi([z[0], z[1]])?
            } else {
                if z.len() != 2 || z[0].norm() >= 1.0 || !grid.contains(&[z[0] * z[1], z[1]]) {
                    return Err(outside(z, "product-model"));
                }
                [z[0], z[1]]
            };
            let weighted = id == KernelId::Hartogs;
            match f {
                Evaluable::Symbolic(s) => separable(s, w, grid, weighted),
                f => reduce(grid, |zn, wn| {
                    if weighted {
                        kd(w[0], wn[0]) * kw(w[1], wn[1]) * f.eval(zn) * wn[1].norm_sqr()
                    } else {
                        kd(w[0], wn[0]) * kd(w[1], wn[1]) * f.eval(wn)
                    }
                }),
            }
        }
        KernelId::Disc | KernelId::PuncturedDisc => {
            require_grid(grid, false, id.tag())?;
            let dom = if id == KernelId::Disc { Domain::Disc } else { Domain::PuncturedDisc };
            check_planar_point(grid, dom, z)?;
            reduce(grid, |p, _| kd(z[0], p[0]) * f.eval(p))
        }
        KernelId::WeightedPuncturedDisc => {
            require_grid(grid, false, id.tag())?;
            check_planar_point(grid, Domain::PuncturedDisc, z)?;
            reduce(grid, |p, _| kw(z[0], p[0]) * f.eval(p) * p[0].norm_sqr())
        }
    }
}

fn check_planar_point(grid: &QuadGrid, dom: Domain, z: &[Complex64]) -> Result<()> {
    let ok = z.len() == 1 && z[0].norm() < 1.0 && (dom == Domain::Disc || z[0].norm() > grid.eps_min());
    if ok {
        Ok(())
    } else {
        Err(outside(z, dom.tag()))
    }
}

/// Kernel-weighted moments `Σ_i c_i η_i^m η̄_i^n`, memoized.
struct Moments<'a> {
    rule: &'a PlanarRule,
    c: Vec<Complex64>,
    cache: BTreeMap<(i32, i32), Complex64>,
}

impl<'a> Moments<'a> {
    fn new(rule: &'a PlanarRule, c: Vec<Complex64>) -> Self {
        Self { rule, c, cache: BTreeMap::new() }
    }

    fn get(&mut self, m: i32, n: i32) -> Complex64 {
        let (rule, c) = (self.rule, &self.c);
        *self.cache.entry((m, n)).or_insert_with(|| {
            let t: Vec<Complex64> = rule.nodes.iter().zip(c).map(|(e, c)| c * e.powi(m) * e.conj().powi(n)).collect();
            pairwise_sum(&t)
        })
    }
}

fn separable(f: &SymbolicFunction, w: [Complex64; 2], grid: &QuadGrid, hartogs: bool) -> Result<Complex64> {
    let inner = grid.inner.as_ref().expect("hartogs grid has an inner rule");
    let outer = &grid.outer;
    let c1 = inner.nodes.iter().zip(&inner.weights).map(|(e, u)| kd(w[0], *e) * u).collect();
    let c2 = outer
        .nodes
        .iter()
        .zip(&outer.weights)
        .map(|(e, v)| if hartogs { kw(w[1], *e) * e.norm_sqr() * v } else { kd(w[1], *e) * v })
        .collect();
    let (mut m1, mut m2) = (Moments::new(inner, c1), Moments::new(outer, c2));
    let mut terms = Vec::new();
    for m in f.monomials() {
        let (a, b, c, d) = (m.a(), m.b(), m.c(), m.d());
        let (e2, f2) = if hartogs { (a + b, c + d) } else { (b, d) };
        terms.push(m.coeff.to_complex() * m1.get(a, c) * m2.get(e2, f2));
    }
    let v = pairwise_sum(&terms);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { location: format!("{w:?}"), message: "non-finite projection".into() })
    }
}

/// [`bergman_apply`] with an error estimate from the refined grid.
pub fn bergman_apply_with_error(id: KernelId, f: Evaluable<'_>, z: &[Complex64], grid: &QuadGrid) -> Result<Estimate> {
    let value = bergman_apply(id, f, z, grid)?;
    let fine = bergman_apply(id, f, z, &grid.refined())?;
    Ok(Estimate { value, error_estimate: (fine - value).norm() })
}

/// Planar operators on `D` / `D*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanarOp {
    /// `g ↦ ∫_D ∂^a_w K_D(w, η) g(η) dA`, with the normalized disc kernel.
    B1a(u32),
    /// `h ↦ ∫_{D*} h(η) (1 − wη̄)^{−2} dA`, without `1/π`.
    B2,
    /// The `|w|²`-weighted projection of `D*`.
    B3,
}

/// Apply a planar operator at `w` by quadrature over a planar grid.
pub fn op_apply(op: PlanarOp, f: Evaluable<'_>, w: Complex64, grid: &QuadGrid) -> Result<Complex64> {
    require_grid(grid, false, "planar operator")?;
    match op {
        PlanarOp::B1a(a) => {
            check_planar_point(grid, Domain::Disc, &[w])?;
            let k = KernelExpr::disc().diff_x_n(a);
            reduce(grid, |p, _| k.eval(w, p[0].conj()).unwrap_or(NAN) / PI * f.eval(p))
        }
        PlanarOp::B2 => {
            check_planar_point(grid, Domain::Disc, &[w])?;
            reduce(grid, |p, _| {
                let d = ONE - w * p[0].conj();
                f.eval(p) / (d * d)
            })
        }
        PlanarOp::B3 => bergman_apply(KernelId::WeightedPuncturedDisc, f, &[w], grid),
    }
}

/// [`op_apply`] with an error estimate from the refined grid.
pub fn op_apply_with_error(op: PlanarOp, f: Evaluable<'_>, w: Complex64, grid: &QuadGrid) -> Result<Estimate> {
    let value = op_apply(op, f, w, grid)?;
    let fine = op_apply(op, f, w, &grid.refined())?;
    Ok(Estimate { value, error_estimate: (fine - value).norm() })
}
