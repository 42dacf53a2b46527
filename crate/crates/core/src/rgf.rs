//! Reciprocity-gap moments of the boundary data at a slice τ.
//!
//! With p = x + iy on Γ:
//! - Rf[n] = −∮ pⁿ φ(τ − z/c) dS
//! - Rh[n] = −∮ 2nz pⁿ⁻¹ φ(τ − z/c) dS + (1/c) d_τ(−∮ p̄ pⁿ φ(τ − z/c) dS)
//! - Rg = d_τ Rf, Ri = d²_τ Rf, Rj = d_τ Rh by central differences.

use alloc::vec;
use alloc::vec::Vec;

use crate::exec::Executor;
use crate::forward::BoundaryField;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct RgfSlice {
    pub tau: f64,
    pub rf: Vec<C64>,
    pub rg: Vec<C64>,
    /// Index 0 is unused and kept at zero.
    pub rh: Vec<C64>,
    pub ri: Vec<C64>,
    /// Index 0 is unused and kept at zero.
    pub rj: Vec<C64>,
}

impl RgfSlice {
    pub fn n_max(&self) -> usize {
        self.rf.len() - 1
    }
}

/// −∮ weight·φ(τ − z/c) dS.
pub fn retarded_trace(field: &BoundaryField, tau: f64, weight: &[C64]) -> Result<C64> {
    let grid = field.grid();
    if weight.len() != grid.len() {
        return Err(Error::SampleCount { expected: grid.len(), got: weight.len() });
    }
    let values = retarded_values(field, tau)?;
    let samples: Vec<C64> = weight.iter().zip(&values).map(|(w, v)| w * *v).collect();
    Ok(-grid.surface_integral(&samples)?)
}

fn retarded_values(field: &BoundaryField, time: f64) -> Result<Vec<f64>> {
    let c = field.wave_speed();
    field
        .grid()
        .points()
        .iter()
        .enumerate()
        .map(|(node, p)| field.value_at(time - p.z / c, node))
        .collect()
}

/// τ-interval on which a slice with step `dtau` is computable: the whole
/// stencil must start at or after 0 and every retarded sample must lie
/// within the record.
pub fn admissible_range(field: &BoundaryField, dtau: f64) -> (f64, f64) {
    let c = field.wave_speed();
    let z_min = field.grid().points().iter().fold(f64::INFINITY, |m, p| m.min(p.z));
    (2.0 * dtau, field.horizon() - 2.0 * dtau + z_min / c)
}

/// Node weights premultiplied into the three families of test functions.
#[derive(Debug, Clone)]
pub struct MomentWeights {
    n_max: usize,
    nodes: usize,
    f: Vec<C64>,
    h: Vec<C64>,
    h_lag: Vec<C64>,
}

impl MomentWeights {
    pub fn new(field: &BoundaryField, n_max: usize) -> Self {
        let grid = field.grid();
        let nodes = grid.len();
        let mut f = Vec::with_capacity((n_max + 1) * nodes);
        let mut h = Vec::with_capacity((n_max + 1) * nodes);
        let mut h_lag = Vec::with_capacity((n_max + 1) * nodes);
        for n in 0..=n_max {
            for (p, &w) in grid.points().iter().zip(grid.node_weights()) {
                let xy = C64::new(p.x, p.y);
                let pn = xy.powu(n as u32);
                f.push(pn * w);
                h.push(if n == 0 { C64::new(0.0, 0.0) } else { xy.powu(n as u32 - 1) * (2.0 * n as f64 * p.z * w) });
                h_lag.push(xy.conj() * pn * w);
            }
        }
        MomentWeights { n_max, nodes, f, h, h_lag }
    }

    fn traces(&self, table: &[C64], values: &[f64]) -> Vec<C64> {
        (0..=self.n_max)
            .map(|n| {
                let row = &table[n * self.nodes..(n + 1) * self.nodes];
                -row.iter().zip(values).fold(C64::new(0.0, 0.0), |acc, (w, v)| acc + w * *v)
            })
            .collect()
    }
}

pub fn rgf_slice(field: &BoundaryField, tau: f64, n_max: usize, dtau: f64) -> Result<RgfSlice> {
    rgf_slice_with(field, &MomentWeights::new(field, n_max), tau, dtau)
}

pub fn rgf_slice_with(field: &BoundaryField, weights: &MomentWeights, tau: f64, dtau: f64) -> Result<RgfSlice> {
    let n_max = weights.n_max;
    let mut f = Vec::with_capacity(3);
    let mut h = Vec::with_capacity(3);
    let mut lag = Vec::with_capacity(5);
    for k in -2i32..=2 {
        let values = retarded_values(field, tau + k as f64 * dtau)?;
        if k.abs() <= 1 {
            f.push(weights.traces(&weights.f, &values));
            h.push(weights.traces(&weights.h, &values));
        }
        lag.push(weights.traces(&weights.h_lag, &values));
    }
    let c = field.wave_speed();
    let zero = C64::new(0.0, 0.0);
    let d1 = |a: C64, b: C64| (b - a) / (2.0 * dtau);
    // Rh at τ + k·dτ for k = −1, 0, 1.
    let rh_at = |k: usize, n: usize| h[k][n] + d1(lag[k][n], lag[k + 2][n]) / c;
    let mut slice = RgfSlice {
        tau,
        rf: f[1].clone(),
        rg: vec![zero; n_max + 1],
        rh: vec![zero; n_max + 1],
        ri: vec![zero; n_max + 1],
        rj: vec![zero; n_max + 1],
    };
    for n in 0..=n_max {
        slice.rg[n] = d1(f[0][n], f[2][n]);
        slice.ri[n] = (f[2][n] - f[1][n] * 2.0 + f[0][n]) / (dtau * dtau);
        if n >= 1 {
            slice.rh[n] = rh_at(1, n);
            slice.rj[n] = d1(rh_at(0, n), rh_at(2, n));
        }
    }
    Ok(slice)
}

/// Slices at every `tau`, in order.
pub fn rgf_slices<E: Executor>(field: &BoundaryField, taus: &[f64], n_max: usize, dtau: f64, exec: &E) -> Result<Vec<RgfSlice>> {
    let weights = MomentWeights::new(field, n_max);
    exec.map_indexed(taus.len(), |i| rgf_slice_with(field, &weights, taus[i], dtau))
        .into_iter()
        .collect()
}
