//! Four-point Lagrange interpolation on a uniform time grid.

/// Weights for a cubic through samples `start..start+4`.
///
/// The stencil is centred on the interval containing the evaluation point and
/// shifted back when it would reach past `last`. Samples with negative index
/// are treated as zero by the callers (quiescent past).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicStencil {
    pub start: i64,
    pub value: [f64; 4],
    /// d/dx of the interpolant, per unit of the sample index.
    pub slope: [f64; 4],
}

/// `x` is the evaluation point in units of the sample spacing.
pub fn cubic_stencil(x: f64, last: i64) -> CubicStencil {
    let m = libm::floor(x) as i64;
    let start = (m - 1).min(last - 3);
    let u = x - start as f64;
    let (a, b, c, d) = (u, u - 1.0, u - 2.0, u - 3.0);
    CubicStencil {
        start,
        value: [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0],
        slope: [
            -(c * d + b * d + b * c) / 6.0,
            (c * d + a * d + a * c) / 2.0,
            -(b * d + a * d + a * b) / 2.0,
            (b * c + a * c + a * b) / 6.0,
        ],
    }
}

impl CubicStencil {
    /// Interpolated value and slope (per index unit) of `sample`.
    pub fn apply(&self, mut sample: impl FnMut(i64) -> f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut s = 0.0;
        for i in 0..4 {
            let idx = self.start + i as i64;
            if idx < 0 {
                continue;
            }
            let y = sample(idx);
            v += self.value[i] * y;
            s += self.slope[i] * y;
        }
        (v, s)
    }
}
