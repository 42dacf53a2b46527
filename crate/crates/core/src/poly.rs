//! Characteristic polynomials and simultaneous (Aberth) root iteration for
//! the tiny eigenproblems of the inversion.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{norm2, CMatrix};
use crate::{Error, Result, C64};

const ABERTH_MAX_ITER: usize = 200;
const ABERTH_TOL: f64 = 1e-14;

/// Coefficients of det(λI − A), ascending, monic (`coef[n] == 1`).
/// Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(a: &CMatrix) -> Vec<C64> {
    let n = a.rows();
    let mut coef = vec![C64::new(0.0, 0.0); n + 1];
    coef[n] = C64::new(1.0, 0.0);
    let mut m = CMatrix::zeros(n, n);
    for k in 1..=n {
        for i in 0..n {
            m[(i, i)] += coef[n - k + 1];
        }
        let am = a.mul(&m);
        coef[n - k] = -am.trace() / k as f64;
        m = am;
    }
    coef
}

pub fn eval_poly(coef: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &a in coef.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// All roots of a polynomial (ascending coefficients, nonzero leading term).
pub fn roots(coef: &[C64]) -> Result<Vec<C64>> {
    let n = coef.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coef[n];
    if lead.norm() == 0.0 {
        return Err(Error::RootFinding);
    }
    let monic: Vec<C64> = coef.iter().map(|&a| a / lead).collect();
    if n == 1 {
        return Ok(vec![-monic[0]]);
    }
    // Cauchy bound for the starting circle.
    let bound = 1.0 + monic[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let radius = 0.5 * bound;
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let ang = 2.0 * core::f64::consts::PI * k as f64 / n as f64 + 0.4;
            C64::new(radius * libm::cos(ang), radius * libm::sin(ang))
        })
        .collect();
    let mut converged = false;
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval_poly(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| C64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < ABERTH_TOL {
            converged = true;
            break;
        }
    }
    if !converged && !z.iter().all(|r| eval_poly(&monic, *r).0.norm() < 1e-10 * bound) {
        return Err(Error::RootFinding);
    }
    Ok(z)
}

/// Eigenvalues λ of the pencil H1 − λH0 (i.e. of H0⁻¹H1), each checked by an
/// inverse-iteration eigenvector residual ‖(H1 − λH0)v‖ ≤ 1e-8·‖H1‖.
pub fn pencil_eigenvalues(h0: &CMatrix, h1: &CMatrix) -> Result<Vec<C64>> {
    let n = h0.rows();
    let h0_inv = h0.inverse()?;
    let a = h0_inv.mul(h1);
    let lambdas = roots(&characteristic_polynomial(&a))?;
    let scale = h1.norm1().max(f64::MIN_POSITIVE);
    for &lam in &lambdas {
        let residual = pencil_residual(h0, h1, lam, n);
        if residual > 1e-8 * scale {
            return Err(Error::EigenResidual(residual / scale));
        }
    }
    Ok(lambdas)
}

fn pencil_residual(h0: &CMatrix, h1: &CMatrix, lam: C64, n: usize) -> f64 {
    let pencil = CMatrix::from_fn(n, n, |r, c| h1[(r, c)] - lam * h0[(r, c)]);
    // Shift slightly off the eigenvalue so the inverse-iteration solve is regular.
    let shift = 1e-10 * (1.0 + lam.norm());
    let shifted = CMatrix::from_fn(n, n, |r, c| pencil[(r, c)] - h0[(r, c)] * shift);
    let lu = match shifted.lu() {
        Ok(lu) => lu,
        Err(_) => return f64::INFINITY,
    };
    let mut v = vec![C64::new(1.0, 0.0); n];
    for _ in 0..3 {
        match lu.solve(&v) {
            Ok(w) => {
                let nw = norm2(&w);
                if nw == 0.0 || !nw.is_finite() {
                    // Exactly singular shift: the eigenvalue is exact.
                    return 0.0;
                }
                v = w.into_iter().map(|x| x / nw).collect();
            }
            Err(_) => return 0.0,
        }
    }
    norm2(&pencil.mul_vec(&v))
}
