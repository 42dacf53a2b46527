use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::SphereGrid;
use crate::interp::cubic_stencil;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldMeta {
    pub scenario_hash: String,
    pub noise_level: f64,
    pub seed: u64,
}

/// φ = ∂νu sampled at t_ℓ = ℓ·dt on every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    grid: SphereGrid,
    dt: f64,
    c: f64,
    n_steps: usize,
    /// Step-major: `phi[ℓ·N + node]`.
    phi: Vec<f64>,
    pub meta: FieldMeta,
}

impl BoundaryField {
    pub fn zeros(grid: SphereGrid, dt: f64, c: f64, n_steps: usize) -> Self {
        let n = grid.len();
        BoundaryField { grid, dt, c, n_steps, phi: vec![0.0; n * n_steps], meta: FieldMeta::default() }
    }

    pub fn from_samples(grid: SphereGrid, dt: f64, c: f64, n_steps: usize, phi: Vec<f64>) -> Result<Self> {
        if phi.len() != grid.len() * n_steps {
            return Err(Error::SampleCount { expected: grid.len() * n_steps, got: phi.len() });
        }
        if !(dt > 0.0) || !(c > 0.0) || n_steps == 0 {
            return Err(Error::Invalid(alloc::format!("bad field shape: dt={dt}, c={c}, steps={n_steps}")));
        }
        Ok(BoundaryField { grid, dt, c, n_steps, phi, meta: FieldMeta::default() })
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn wave_speed(&self) -> f64 {
        self.c
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Last sample time T.
    pub fn horizon(&self) -> f64 {
        (self.n_steps - 1) as f64 * self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.phi
    }

    pub fn step(&self, l: usize) -> &[f64] {
        let n = self.grid.len();
        &self.phi[l * n..(l + 1) * n]
    }

    pub fn step_mut(&mut self, l: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.phi[l * n..(l + 1) * n]
    }

    /// φ(t, node) by cubic interpolation; zero for t < 0.
    pub fn value_at(&self, t: f64, node: usize) -> Result<f64> {
        let t_max = self.horizon();
        if t > t_max * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::OutOfRange { t, t_max });
        }
        if t < 0.0 {
            return Ok(0.0);
        }
        let n = self.grid.len();
        let st = cubic_stencil(t / self.dt, self.n_steps as i64 - 1);
        Ok(st.apply(|i| self.phi[i as usize * n + node]).0)
    }

    /// Pointwise sum of two fields on the same grid and time axis.
    pub fn try_add(&self, other: &BoundaryField) -> Result<BoundaryField> {
        if self.grid != other.grid || self.n_steps != other.n_steps || self.dt != other.dt {
            return Err(Error::Invalid("fields are not on the same grid".into()));
        }
        let mut out = self.clone();
        out.phi.iter_mut().zip(&other.phi).for_each(|(a, b)| *a += b);
        Ok(out)
    }
}
