//! Gauss-Legendre × trapezoid quadrature grid on the sphere |r| = R.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul};

use crate::geom::Vec3;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    radius: f64,
    n_polar: usize,
    n_azimuth: usize,
    mu: Vec<f64>,
    weights: Vec<f64>,
    azimuth: Vec<f64>,
    points: Vec<Vec3>,
    normals: Vec<Vec3>,
    node_weights: Vec<f64>,
}

impl SphereGrid {
    /// Nodes are stored polar-major: index = j·K + k.
    pub fn new(radius: f64, n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if n_polar == 0 || n_azimuth == 0 {
            return Err(Error::InvalidGrid(format!(
                "need at least one node per direction, got J={n_polar}, K={n_azimuth}"
            )));
        }
        let (mu, weights) = gauss_legendre(n_polar);
        let azimuth: Vec<f64> = (0..n_azimuth)
            .map(|k| 2.0 * PI * k as f64 / n_azimuth as f64)
            .collect();
        let dphi = 2.0 * PI / n_azimuth as f64;
        let n = n_polar * n_azimuth;
        let mut points = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut node_weights = Vec::with_capacity(n);
        for (&m, &w) in mu.iter().zip(&weights) {
            let sin_theta = libm::sqrt((1.0 - m) * (1.0 + m));
            for &phi in &azimuth {
                let nu = Vec3::new(sin_theta * libm::cos(phi), sin_theta * libm::sin(phi), m);
                normals.push(nu);
                points.push(nu * radius);
                node_weights.push(radius * radius * dphi * w);
            }
        }
        Ok(SphereGrid {
            radius,
            n_polar,
            n_azimuth,
            mu,
            weights,
            azimuth,
            points,
            normals,
            node_weights,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_polar(&self) -> usize {
        self.n_polar
    }

    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.n_azimuth + k
    }

    /// Inverse of [`SphereGrid::index`].
    pub fn polar_azimuth(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_azimuth, idx % self.n_azimuth)
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn polar_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn azimuth(&self) -> &[f64] {
        &self.azimuth
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    /// Full quadrature weight of each node, R²·(2π/K)·w_j.
    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// ∮ f dS with nodes summed in index order.
    pub fn surface_integral<T>(&self, samples: &[T]) -> Result<T>
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
    {
        if samples.len() != self.len() {
            return Err(Error::SampleCount { expected: self.len(), got: samples.len() });
        }
        Ok(self.weighted_sum(samples))
    }

    pub(crate) fn weighted_sum<T>(&self, samples: &[T]) -> T
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
    {
        samples
            .iter()
            .zip(&self.node_weights)
            .fold(T::default(), |acc, (&s, &w)| acc + s * w)
    }
}

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi-style initial guess, then Newton on P_n.
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if libm::fabs(p) < 1e-14 && libm::fabs(dx) < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
