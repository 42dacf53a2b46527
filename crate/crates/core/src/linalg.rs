//! Small dense complex matrices: LU with partial pivoting, solves,
//! determinants and a 1-norm condition estimate.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn mul(&self, o: &CMatrix) -> CMatrix {
        CMatrix::from_fn(self.rows, o.cols, |r, c| {
            (0..self.cols).map(|k| self[(r, k)] * o[(k, c)]).sum()
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Result<Lu> {
        if self.rows != self.cols {
            return Err(Error::Singular("non-square matrix"));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].norm();
            for r in k + 1..n {
                let v = a[r * n + k].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if piv != k {
                for c in 0..n {
                    a.swap(k * n + c, piv * n + c);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let f = a[r * n + k] / d;
                a[r * n + k] = f;
                for c in k + 1..n {
                    let u = a[k * n + c];
                    a[r * n + c] -= f * u;
                }
            }
        }
        Ok(Lu { n, a, perm, sign, singular })
    }

    pub fn det(&self) -> Result<C64> {
        Ok(self.lu()?.det())
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.lu()?.solve(b)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        let lu = self.lu()?;
        let n = self.rows;
        let mut inv = CMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for c in 0..n {
            e.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            e[c] = C64::new(1.0, 0.0);
            let col = lu.solve(&e)?;
            for r in 0..n {
                inv[(r, c)] = col[r];
            }
        }
        Ok(inv)
    }

    /// κ₁ = ‖A‖₁·‖A⁻¹‖₁ (explicit inverse; matrices here are tiny).
    pub fn condition_1(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.norm1() * inv.norm1(),
            Err(_) => f64::INFINITY,
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    a: Vec<C64>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn det(&self) -> C64 {
        if self.singular {
            return C64::new(0.0, 0.0);
        }
        let n = self.n;
        (0..n).fold(C64::new(self.sign, 0.0), |acc, i| acc * self.a[i * n + i])
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let n = self.n;
        if self.singular {
            return Err(Error::Singular("zero pivot"));
        }
        if b.len() != n {
            return Err(Error::SampleCount { expected: n, got: b.len() });
        }
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                let l = self.a[r * n + c];
                let xc = x[c];
                x[r] -= l * xc;
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                let u = self.a[r * n + c];
                let xc = x[c];
                x[r] -= u * xc;
            }
            x[r] /= self.a[r * n + r];
        }
        Ok(x)
    }
}

pub fn norm2(v: &[C64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn solve_and_det_small() {
        let m = CMatrix::from_fn(2, 2, |r, k| [[c(0.0, 1.0), c(2.0, 0.0)], [c(1.0, 0.0), c(1.0, -1.0)]][r][k]);
        // det = i(1-i) - 2 = (1 + i) - 2 = -1 + i
        let d = m.det().unwrap();
        assert!((d - c(-1.0, 1.0)).norm() < 1e-15);
        let x = [c(1.0, 2.0), c(-0.5, 0.25)];
        let b = m.mul_vec(&x);
        let y = m.solve(&b).unwrap();
        assert!(norm2(&[y[0] - x[0], y[1] - x[1]]) < 1e-14);
    }

    #[test]
    fn singular_matrix_detected() {
        let m = CMatrix::from_fn(2, 2, |r, k| c((r + 1) as f64 * (k + 1) as f64, 0.0));
        assert_eq!(m.det().unwrap(), c(0.0, 0.0));
        assert!(m.solve(&[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(m.condition_1().is_infinite());
    }

    #[test]
    fn inverse_round_trip() {
        let m = CMatrix::from_fn(3, 3, |r, k| c(1.0 / (r + k + 1) as f64, (r as f64 - k as f64) * 0.1));
        let p = m.mul(&m.inverse().unwrap());
        for r in 0..3 {
            for k in 0..3 {
                let e = if r == k { 1.0 } else { 0.0 };
                assert!((p[(r, k)] - c(e, 0.0)).norm() < 1e-12);
            }
        }
    }
}
