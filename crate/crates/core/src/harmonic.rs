//! Real spherical-harmonic transform on the grid nodes.

use alloc::vec::Vec;

use crate::grid::SphereGrid;

/// Orthonormal associated Legendre functions on [−1, 1], `out[l − m]` for
/// l = m..=lmax.
pub fn legendre_column(m: usize, lmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(lmax + 1 - m);
    let s = libm::sqrt((1.0 - x) * (1.0 + x));
    let mut pmm = libm::sqrt(0.5);
    for i in 1..=m {
        pmm *= libm::sqrt((2 * i + 1) as f64 / (2 * i) as f64) * s;
    }
    out.push(pmm);
    if lmax == m {
        return out;
    }
    out.push(libm::sqrt((2 * m + 3) as f64) * x * pmm);
    for l in m + 2..=lmax {
        let (lf, mf) = (l as f64, m as f64);
        let a = libm::sqrt((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf));
        let b = libm::sqrt(((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0));
        let next = a * (x * out[l - m - 1] - b * out[l - m - 2]);
        out.push(next);
    }
    out
}

/// Legendre polynomial P_l(x) and its derivative.
pub fn legendre(l: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=l {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P'_l from the derivative recurrence, valid at x = ±1 as well.
    let mut d0 = 0.0;
    let mut d1 = 1.0;
    let (mut q0, mut q1) = (1.0, x);
    for k in 2..=l {
        let kf = k as f64;
        let q2 = ((2.0 * kf - 1.0) * x * q1 - (kf - 1.0) * q0) / kf;
        let d2 = d0 + (2.0 * kf - 1.0) * q1;
        q0 = q1;
        q1 = q2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Analysis and synthesis for degrees up to `lmax`. Coefficients are grouped
/// by order m, then cosine/sine part, then degree.
#[derive(Debug, Clone)]
pub struct HarmonicTransform {
    n_polar: usize,
    n_azimuth: usize,
    lmax: usize,
    /// `basis[m][j][l − m]`.
    basis: Vec<Vec<Vec<f64>>>,
    weights: Vec<f64>,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
    degrees: Vec<usize>,
}

impl HarmonicTransform {
    /// `lmax` is capped at J − 1, the largest degree the polar rule projects
    /// exactly, and at K/2.
    pub fn new(grid: &SphereGrid, lmax: usize) -> Self {
        let (jn, kn) = (grid.n_polar(), grid.n_azimuth());
        let lmax = lmax.min(jn - 1);
        let m_max = lmax.min(kn / 2);
        let basis: Vec<Vec<Vec<f64>>> =
            (0..=m_max).map(|m| grid.mu().iter().map(|&x| legendre_column(m, lmax, x)).collect()).collect();
        let phi = grid.azimuth();
        let table = |f: fn(f64) -> f64| -> Vec<Vec<f64>> {
            (0..=m_max).map(|m| phi.iter().map(|&p| f(m as f64 * p)).collect()).collect()
        };
        let mut degrees = Vec::new();
        for m in 0..=m_max {
            for part in 0..2 {
                if part == 1 && (m == 0 || 2 * m == kn) {
                    continue;
                }
                degrees.extend(m..=lmax);
            }
        }
        HarmonicTransform {
            n_polar: jn,
            n_azimuth: kn,
            lmax,
            basis,
            weights: grid.polar_weights().to_vec(),
            cos: table(libm::cos),
            sin: table(libm::sin),
            degrees,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.lmax
    }

    /// Degree of each coefficient.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    fn has_sine(&self, m: usize) -> bool {
        m != 0 && 2 * m != self.n_azimuth
    }

    pub fn analyze(&self, samples: &[f64]) -> Vec<f64> {
        let (jn, kn) = (self.n_polar, self.n_azimuth);
        let mut out = Vec::with_capacity(self.degrees.len());
        for (m, cols) in self.basis.iter().enumerate() {
            let scale = if m == 0 || 2 * m == kn { 1.0 } else { 2.0 } / kn as f64;
            let parts: &[&Vec<f64>] = if self.has_sine(m) { &[&self.cos[m], &self.sin[m]] } else { &[&self.cos[m]] };
            for trig in parts {
                let ring: Vec<f64> = (0..jn)
                    .map(|j| (0..kn).map(|k| samples[j * kn + k] * trig[k]).sum::<f64>() * scale)
                    .collect();
                for i in 0..=self.lmax - m {
                    out.push((0..jn).map(|j| self.weights[j] * cols[j][i] * ring[j]).sum());
                }
            }
        }
        out
    }

    pub fn synthesize(&self, coeffs: &[f64], samples: &mut [f64]) {
        self.synthesize_with(&self.basis, &self.cos, &self.sin, coeffs, samples);
    }

    /// Synthesis onto the nodes of another grid.
    pub fn evaluator(&self, target: &SphereGrid) -> HarmonicEvaluator<'_> {
        let m_max = self.basis.len() - 1;
        let basis = (0..=m_max).map(|m| target.mu().iter().map(|&x| legendre_column(m, self.lmax, x)).collect()).collect();
        let phi = target.azimuth();
        let table = |f: fn(f64) -> f64| -> Vec<Vec<f64>> {
            (0..=m_max).map(|m| phi.iter().map(|&p| f(m as f64 * p)).collect()).collect()
        };
        HarmonicEvaluator { transform: self, basis, cos: table(libm::cos), sin: table(libm::sin) }
    }

    fn synthesize_with(&self, basis: &[Vec<Vec<f64>>], cos: &[Vec<f64>], sin: &[Vec<f64>], coeffs: &[f64], samples: &mut [f64]) {
        let kn = cos[0].len();
        samples.iter_mut().for_each(|v| *v = 0.0);
        let mut at = 0;
        for (m, cols) in basis.iter().enumerate() {
            let parts: &[&Vec<f64>] = if self.has_sine(m) { &[&cos[m], &sin[m]] } else { &[&cos[m]] };
            for trig in parts {
                let block = &coeffs[at..at + self.lmax + 1 - m];
                at += block.len();
                for (j, col) in cols.iter().enumerate() {
                    let amp: f64 = col.iter().zip(block).map(|(p, a)| p * a).sum();
                    for k in 0..kn {
                        samples[j * kn + k] += amp * trig[k];
                    }
                }
            }
        }
    }
}

/// Evaluates a [`HarmonicTransform`] expansion on a fixed target grid.
#[derive(Debug, Clone)]
pub struct HarmonicEvaluator<'a> {
    transform: &'a HarmonicTransform,
    basis: Vec<Vec<Vec<f64>>>,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl HarmonicEvaluator<'_> {
    pub fn synthesize(&self, coeffs: &[f64], samples: &mut [f64]) {
        self.transform.synthesize_with(&self.basis, &self.cos, &self.sin, coeffs, samples);
    }
}
