use alloc::vec::Vec;

use crate::linalg::CMatrix;
use crate::{Error, Result, C64};

/// L×L Hankel matrix with entry (a, b) = moments[mu + a + b].
pub fn hankel(moments: &[C64], size: usize, mu: usize) -> Result<CMatrix> {
    let need = mu + 2 * size.max(1) - 1;
    if moments.len() < need {
        return Err(Error::TooFewMoments { need, have: moments.len() });
    }
    Ok(CMatrix::from_fn(size, size, |a, b| moments[mu + a + b]))
}

/// |det H_L| for L = 1..=levels, plus a flag per level telling whether the
/// determinant is at round-off level relative to Hadamard's bound.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelSet {
    pub dets: Vec<f64>,
    pub numerically_singular: Vec<bool>,
}

/// Relative size below which a determinant is treated as an exact zero.
const RANK_TOL: f64 = 1e-13;

impl HankelSet {
    pub fn new(moments: &[C64], levels: usize) -> Result<Self> {
        let mut dets = Vec::with_capacity(levels);
        let mut singular = Vec::with_capacity(levels);
        for size in 1..=levels {
            let h = hankel(moments, size, 0)?;
            let det = h.det()?.norm();
            let bound: f64 = (0..size)
                .map(|a| libm::sqrt((0..size).map(|b| h[(a, b)].norm_sqr()).sum::<f64>()))
                .product();
            dets.push(det);
            singular.push(det <= RANK_TOL * bound);
        }
        Ok(HankelSet { dets, numerically_singular: singular })
    }
}

/// Source count from the determinant sequence.
///
/// K = 0 when |det H₁| < eps0 and |det H₁| > |det H₂|. Otherwise K is the
/// largest k with |det H_k|/|det H_{k−1}| > eps_g (|det H₀| = 1), capped at
/// `k_max`. Levels after the first numerically singular matrix are not
/// scanned, since ratios of round-off are meaningless.
pub fn count_sources(set: &HankelSet, eps0: f64, eps_g: f64, k_max: usize) -> usize {
    let d = &set.dets;
    if d.is_empty() {
        return 0;
    }
    if d[0] < eps0 && d.get(1).is_some_and(|&d2| d[0] > d2) {
        return 0;
    }
    let mut count = 0;
    let mut prev = 1.0;
    for (k, (&dk, &singular)) in d.iter().zip(&set.numerically_singular).enumerate() {
        if dk > eps_g * prev {
            count = k + 1;
        }
        if singular {
            break;
        }
        prev = dk;
    }
    count.min(k_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::power_sums;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rank_one_sequence() {
        let p = c(0.4, -0.3);
        let m: Vec<C64> = (0..4).map(|n| p.powu(n)).collect();
        let h = hankel(&m, 2, 0).unwrap();
        assert_eq!(h[(0, 1)], p);
        assert_eq!(h[(1, 1)], p * p);
        assert!(h.det().unwrap().norm() < 1e-16);
        assert_eq!(hankel(&m, 1, 0).unwrap()[(0, 0)], c(1.0, 0.0));
        assert!(matches!(hankel(&m, 3, 0), Err(Error::TooFewMoments { need: 5, have: 4 })));
    }

    #[test]
    fn two_source_rank() {
        let m = power_sums(&[c(1.0, 0.0), c(2.0, 0.0)], &[c(0.3, 0.0), c(0.0, -0.5)], 6);
        assert!(hankel(&m, 2, 0).unwrap().det().unwrap().norm() > 1e-3);
        assert!(hankel(&m, 3, 0).unwrap().det().unwrap().norm() < 1e-12);
    }

    #[test]
    fn empty_by_first_determinant() {
        let set = HankelSet { dets: alloc::vec![1e-6, 1e-9, 1e-13, 1e-15, 1e-18], numerically_singular: alloc::vec![false; 5] };
        assert_eq!(count_sources(&set, 1e-4, 2.5e-2, 4), 0);
    }

    #[test]
    fn three_exact_sources() {
        let m = power_sums(
            &[c(1.0, 0.0), c(-0.7, 0.0), c(0.5, 0.0)],
            &[c(0.8, -0.3), c(0.1, 0.6), c(-0.9, -0.2)],
            12,
        );
        let set = HankelSet::new(&m, 5).unwrap();
        assert_eq!(count_sources(&set, 1e-4, 2.5e-2, 4), 3);
    }

    #[test]
    fn capped_at_k_max() {
        let set = HankelSet { dets: alloc::vec![1.0, 0.5, 0.3, 0.2, 0.1], numerically_singular: alloc::vec![false; 5] };
        assert_eq!(count_sources(&set, 1e-4, 2.5e-2, 4), 4);
    }
}
