//! Marching-on-in-time for the boundary integral equation on the sphere
//!
//! (1/2)φ(t,r) = −(1/4π)∮K₁ φ(t−|r−ρ|/c, ρ) dS − (1/4πc)∮K₂ ∂tφ(t−|r−ρ|/c, ρ) dS + ∂νu_N(t,r)
//!
//! with K₁ = 1/(2R|r−ρ|) and K₂ = 1/(2R). Both kernels depend on |r−ρ| only,
//! so the operator is diagonal in spherical harmonics. For degree l, with
//! s = |r−ρ| and μ = 1 − s²/(2R²), integrating the ∂t term by parts in s gives
//!
//! φ_l(t) = (−1)^l φ_l(t − 2R/c) − (1/2R)∫₀^{2R} G_l(s) φ_l(t − s/c) ds + 2 f_l(t),
//! G_l(s) = 2P_l(μ) − (s²/R²) P_l'(μ).
//!
//! The integral is done by product integration against the piecewise-linear
//! interpolant of the history; the antipodal term is a plain retarded sample.

use alloc::vec;
use alloc::vec::Vec;

use super::{normal_derivative_free_field, BoundaryField, FieldConfig};
use crate::exec::Executor;
use crate::grid::{gauss_legendre, SphereGrid};
use crate::harmonic::{legendre, HarmonicTransform};
use crate::interp::cubic_stencil;
use crate::scenario::Scenario;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchConfig {
    pub field: FieldConfig,
    /// Highest harmonic degree marched. The forcing is sampled on an internal
    /// Gauss grid of L + 1 by 2L + 2 nodes that projects it exactly.
    pub max_degree: usize,
    pub history: HistoryRule,
}

impl Default for MarchConfig {
    fn default() -> Self {
        MarchConfig { field: FieldConfig::default(), max_degree: 35, history: HistoryRule::Cubic }
    }
}

/// G_l(s) at delay σ = s/c.
fn kernel(l: usize, s: f64, radius: f64) -> f64 {
    let mu = 1.0 - s * s / (2.0 * radius * radius);
    let (p, dp) = legendre(l, mu);
    2.0 * p - s * s / (radius * radius) * dp
}

/// Interpolant of the history inside the product rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryRule {
    /// Piecewise-linear, second order.
    Linear,
    /// Four-point Lagrange on each step, centred where the samples exist.
    Cubic,
}

/// ω_k = c ∫₀^D G_l(cσ) L_k(σ) dσ, D = 2R/c, where L_k is the cardinal
/// function of sample delay k·dt.
pub(crate) fn history_weights(l: usize, radius: f64, c: f64, dt: f64, rule: HistoryRule) -> Vec<f64> {
    let span = 2.0 * radius / c;
    let n = libm::ceil(span / dt - 1e-9) as usize;
    // G_l is a polynomial of degree 2l in σ, times a cubic at most.
    let (x, w) = gauss_legendre(l + 3);
    let mut out = vec![0.0; n + 3];
    for i in 0..n {
        let a = i as f64 * dt;
        let b = ((i + 1) as f64 * dt).min(span);
        let half = 0.5 * (b - a);
        for (&xi, &wi) in x.iter().zip(&w) {
            let sigma = a + half * (xi + 1.0);
            let g = c * kernel(l, c * sigma, radius) * wi * half;
            match rule {
                HistoryRule::Linear => {
                    let u = (sigma - a) / dt;
                    out[i] += g * (1.0 - u);
                    out[i + 1] += g * u;
                }
                HistoryRule::Cubic => {
                    let first = if i == 0 { 0 } else { i - 1 };
                    let u = sigma / dt - first as f64;
                    let (p, q, r, s) = (u, u - 1.0, u - 2.0, u - 3.0);
                    let basis = [-q * r * s / 6.0, p * r * s / 2.0, -p * q * s / 2.0, p * q * r / 6.0];
                    for (m, v) in basis.iter().enumerate() {
                        out[first + m] += g * v;
                    }
                }
            }
        }
    }
    while out.last() == Some(&0.0) {
        out.pop();
    }
    out
}

/// Marches φ over [0, T] for the scenario's sources.
pub fn march_boundary_field<E: Executor>(scn: &Scenario, grid: &SphereGrid, cfg: &MarchConfig, exec: &E) -> Result<BoundaryField> {
    let n = grid.len();
    let n_steps = scn.n_steps();
    let (dt, c, radius) = (scn.dt, scn.c, grid.radius());
    if scn.sources.is_empty() {
        return Ok(BoundaryField::zeros(grid.clone(), dt, c, n_steps));
    }
    let lmax = cfg.max_degree;
    let solver_grid = SphereGrid::new(radius, lmax + 1, 2 * lmax + 2)?;
    let transform = HarmonicTransform::new(&solver_grid, lmax);
    let evaluator = transform.evaluator(grid);
    let weights: Vec<Vec<f64>> = (0..=lmax).map(|l| history_weights(l, radius, c, dt, cfg.history)).collect();
    let degrees = transform.degrees().to_vec();
    let n_coeff = degrees.len();

    let delay = 2.0 * radius / c / dt;
    let exact_delay = libm::fabs(delay - libm::round(delay)) < 1e-9;
    let delay_steps = libm::round(delay) as usize;

    let pts = solver_grid.points();
    let normals = solver_grid.normals();
    let n_solver = solver_grid.len();
    let mut coeffs = vec![0.0; n_coeff * n_steps];
    let mut phi = vec![0.0; n * n_steps];
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let forcing: Vec<Result<f64>> =
            exec.map_indexed(n_solver, |r| normal_derivative_free_field(&scn.sources, t, pts[r], normals[r], c, &cfg.field));
        let forcing: Vec<f64> = forcing.into_iter().collect::<Result<_>>()?;
        let f = transform.analyze(&forcing);
        let antipodal = |i: usize| -> f64 {
            if exact_delay {
                return if step >= delay_steps { coeffs[(step - delay_steps) * n_coeff + i] } else { 0.0 };
            }
            let st = cubic_stencil(step as f64 - delay, step as i64 - 1);
            st.apply(|k| coeffs[k as usize * n_coeff + i]).0
        };
        let mut current = vec![0.0; n_coeff];
        for (i, slot) in current.iter_mut().enumerate() {
            let l = degrees[i];
            let w = &weights[l];
            let mut history = 0.0;
            for (k, &wk) in w.iter().enumerate().skip(1) {
                if k > step {
                    break;
                }
                history += wk * coeffs[(step - k) * n_coeff + i];
            }
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = sign * antipodal(i) - history / (2.0 * radius) + 2.0 * f[i];
            *slot = rhs / (1.0 + w[0] / (2.0 * radius));
        }
        evaluator.synthesize(&current, &mut phi[step * n..(step + 1) * n]);
        coeffs[step * n_coeff..(step + 1) * n_coeff].copy_from_slice(&current);
    }
    BoundaryField::from_samples(grid.clone(), dt, c, n_steps, phi)
}
