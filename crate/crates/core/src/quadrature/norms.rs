//! Weighted Sobolev norms on the Hartogs triangle and weighted `L^p`
//! norms on planar grids.
//!
//! `‖f‖_{k,p,s} = (∫_H Σ_{|α|≤k} |D^α f|^p |z₂|^s dV)^{1/p}` with `α`
//! ranging over derivatives in `z₁, z₂, z̄₁, z̄₂`. Derivatives come from
//! the symbolic bundle. Each derivative is pulled back to the product
//! model, where a monomial `z₁^a z₂^b z̄₁^c z̄₂^d` becomes
//! `w₁^a w̄₁^c · w₂^{a+b} w̄₂^{c+d}`; the `w₁` factors are tabulated once per
//! inner node, so each grid node costs one short sum per derivative.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pairwise_sum_f64, reduce, Domain, Evaluable, QuadGrid};
use crate::operator_calculus::MultiIndex4;
use crate::symbolic::SymbolicFunction;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevParams {
    pub k: u32,
    pub p: f64,
    /// Exponent of the weight `|z₂|^s`.
    pub s: f64,
}

impl SobolevParams {
    pub fn new(k: u32, p: f64, s: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("p = {p} must lie in (1, ∞)")));
        }
        if !s.is_finite() {
            return Err(Error::Config("weight exponent must be finite".into()));
        }
        Ok(Self { k, p, s })
    }
}

/// A function with all its partial derivatives up to a fixed order.
#[derive(Clone, Debug)]
pub struct FnBundle {
    depth: u32,
    derivs: Vec<(MultiIndex4, SymbolicFunction)>,
}

impl FnBundle {
    pub fn new(f: &SymbolicFunction, depth: u32) -> Self {
        let derivs = MultiIndex4::up_to(depth).into_iter().map(|a| (a, f.diff_multi(a.0))).collect();
        Self { depth, derivs }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn base(&self) -> &SymbolicFunction {
        &self.derivs[0].1
    }

    pub fn derivative(&self, alpha: MultiIndex4) -> Option<&SymbolicFunction> {
        self.derivs.iter().find(|(a, _)| *a == alpha).map(|(_, f)| f)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(MultiIndex4, SymbolicFunction)> {
        self.derivs.iter()
    }
}

/// One `(p, s)` pair for [`sobolev_order_powers`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormRequest {
    pub p: f64,
    pub s: f64,
}

/// One derivative, factored as `Σ_g T₂[g](w₂) · A[g](w₁)`.
struct Factored {
    order: usize,
    groups: Vec<(usize, Vec<Complex64>)>,
}

/// For each request, the integrals `∫_H Σ_{|α|=j} |D^α f|^p |z₂|^s dV` for
/// `j = 0..=depth`, over the truncated Hartogs grid.
pub fn sobolev_order_powers(bundle: &FnBundle, requests: &[NormRequest], grid: &QuadGrid) -> Result<Vec<Vec<f64>>> {
    if grid.domain != Domain::Hartogs {
        return Err(Error::Config(format!("Sobolev norms need a hartogs grid, got {}", grid.domain)));
    }
    for r in requests {
        SobolevParams::new(0, r.p, r.s)?;
    }
    let inner = grid.inner.as_ref().expect("hartogs grid has an inner rule");
    let outer = &grid.outer;
    let orders = bundle.depth as usize + 1;

    let mut ps: Vec<f64> = Vec::new();
    for r in requests {
        if !ps.contains(&r.p) {
            ps.push(r.p);
        }
    }
    let p_of: Vec<usize> = requests.iter().map(|r| ps.iter().position(|&p| p == r.p).unwrap()).collect();

    let mut keys2: BTreeMap<(i32, i32), usize> = BTreeMap::new();
    let mut factored = Vec::new();
    for (alpha, f) in bundle.iter() {
        if f.is_zero() {
            continue;
        }
        let mut groups: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
        for m in f.monomials() {
            let key = (m.a() + m.b(), m.c() + m.d());
            let n = keys2.len();
            let g = *keys2.entry(key).or_insert(n);
            let coeff = m.coeff.to_complex();
            let row = groups.entry(g).or_insert_with(|| vec![Complex64::new(0.0, 0.0); inner.len()]);
            for (slot, w1) in row.iter_mut().zip(&inner.nodes) {
                *slot += coeff * w1.powi(m.a()) * w1.conj().powi(m.c());
            }
        }
        factored.push(Factored { order: alpha.order() as usize, groups: groups.into_iter().collect() });
    }
    let mut key_list = vec![(0, 0); keys2.len()];
    for (k, g) in &keys2 {
        key_list[*g] = *k;
    }

    // per outer node: [request][order]
    let per_node: Vec<Vec<f64>> = (0..outer.len())
        .into_par_iter()
        .map(|j| {
            let w2 = outer.nodes[j];
            let t2: Vec<Complex64> = key_list.iter().map(|&(e, f)| w2.powi(e) * w2.conj().powi(f)).collect();
            let mut acc = vec![0.0; ps.len() * orders];
            let mut s = vec![0.0; ps.len() * orders];
            for (i, u) in inner.weights.iter().enumerate() {
                s.iter_mut().for_each(|x| *x = 0.0);
                for d in &factored {
                    let mut v = Complex64::new(0.0, 0.0);
                    for (g, row) in &d.groups {
                        v += t2[*g] * row[i];
                    }
                    let nsq = v.norm_sqr();
                    if nsq == 0.0 {
                        continue;
                    }
                    let half_ln = 0.5 * nsq.ln();
                    for (pi, &p) in ps.iter().enumerate() {
                        let term = if p == 2.0 { nsq } else { (p * half_ln).exp() };
                        s[pi * orders + d.order] += term;
                    }
                }
                for (a, x) in acc.iter_mut().zip(&s) {
                    *a += u * x;
                }
            }
            let r2 = w2.norm();
            let base = outer.weights[j] * r2 * r2;
            let mut out = Vec::with_capacity(requests.len() * orders);
            for (r, req) in requests.iter().enumerate() {
                let wgt = base * r2.powf(req.s);
                for o in 0..orders {
                    out.push(acc[p_of[r] * orders + o] * wgt);
                }
            }
            out
        })
        .collect();

    let mut result = vec![vec![0.0; orders]; requests.len()];
    let mut column = vec![0.0; per_node.len()];
    for (r, row) in result.iter_mut().enumerate() {
        for (o, slot) in row.iter_mut().enumerate() {
            for (c, node) in column.iter_mut().zip(&per_node) {
                *c = node[r * orders + o];
            }
            *slot = pairwise_sum_f64(&column);
        }
    }
    if result.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation { location: "hartogs grid".into(), message: "non-finite norm".into() });
    }
    Ok(result)
}

/// `‖f‖_{k,p,s}` over the truncated grid.
pub fn sobolev_norm(bundle: &FnBundle, params: SobolevParams, grid: &QuadGrid) -> Result<f64> {
    if bundle.depth < params.k {
        return Err(Error::Config(format!("bundle depth {} is below k = {}", bundle.depth, params.k)));
    }
    let powers = sobolev_order_powers(bundle, &[NormRequest { p: params.p, s: params.s }], grid)?;
    let total: f64 = powers[0][..=params.k as usize].iter().sum();
    Ok(total.powf(1.0 / params.p))
}

/// `∫ |f|^p |w|^{weight} dA` over a planar grid.
pub fn planar_lp_power(f: Evaluable<'_>, p: f64, weight: f64, grid: &QuadGrid) -> Result<f64> {
    if !grid.domain.is_planar() {
        return Err(Error::Config("planar norms need a planar grid".into()));
    }
    let v = reduce(grid, |z, _| Complex64::new(f.eval(z).norm().powf(p) * z[0].norm().powf(weight), 0.0))?;
    Ok(v.re)
}
