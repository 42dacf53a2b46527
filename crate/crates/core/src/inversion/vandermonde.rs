use alloc::vec::Vec;

use crate::linalg::{norm2, CMatrix};
use crate::{Error, Result, C64};

const MIN_GAP: f64 = 1e-10;
const COND_LIMIT: f64 = 1e12;

fn check_distinct(nodes: &[C64]) -> Result<()> {
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if (a - b).norm() <= MIN_GAP {
                return Err(Error::Singular("coalesced nodes"));
            }
        }
    }
    Ok(())
}

fn vandermonde(nodes: &[C64]) -> CMatrix {
    let k = nodes.len();
    CMatrix::from_fn(k, k, |n, j| nodes[j].powu(n as u32))
}

fn solve_checked(m: &CMatrix, rhs: &[C64], tol: f64) -> Result<Vec<C64>> {
    let x = m.solve(rhs)?;
    let r: Vec<C64> = m.mul_vec(&x).iter().zip(rhs).map(|(a, b)| a - b).collect();
    if norm2(&r) > tol * norm2(rhs).max(f64::MIN_POSITIVE) {
        return Err(Error::Singular("residual check failed"));
    }
    Ok(x)
}

/// Solves Σ_k w_k p_kⁿ = rhs[n], n = 0..K−1.
pub fn solve_nodes_system(nodes: &[C64], rhs: &[C64]) -> Result<Vec<C64>> {
    check_distinct(nodes)?;
    solve_checked(&vandermonde(nodes), rhs, 1e-10)
}

/// 2K×2K matrix with columns (pⁿ)_k followed by (n pⁿ⁻¹)_k, n = 0..2K−1.
pub fn confluent_vandermonde(nodes: &[C64]) -> CMatrix {
    let k = nodes.len();
    CMatrix::from_fn(2 * k, 2 * k, |n, col| {
        if col < k {
            nodes[col].powu(n as u32)
        } else if n == 0 {
            C64::new(0.0, 0.0)
        } else {
            nodes[col - k].powu(n as u32 - 1) * n as f64
        }
    })
}

/// Closed form (−1)^{K(K−1)/2} Π_{j>k} (p_j − p_k)⁴.
pub fn det_formula(nodes: &[C64]) -> C64 {
    let k = nodes.len();
    let sign = if (k * k.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let mut prod = C64::new(sign, 0.0);
    for j in 0..k {
        for i in 0..j {
            prod *= (nodes[j] - nodes[i]).powu(4);
        }
    }
    prod
}

/// Solves the confluent system; returns (d(w)_k, w_k·d(p)_k).
pub fn solve_derivative_system(nodes: &[C64], rhs: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    check_distinct(nodes)?;
    let m = confluent_vandermonde(nodes);
    if m.condition_1() > COND_LIMIT {
        return Err(Error::Singular("confluent system ill-conditioned"));
    }
    let mut x = solve_checked(&m, rhs, 1e-9)?;
    let tail = x.split_off(nodes.len());
    Ok((x, tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_node() {
        let p = c(0.3, 0.2);
        let w = solve_nodes_system(&[p], &[c(2.0, -1.0)]).unwrap();
        assert_eq!(w[0], c(2.0, -1.0));
        let v = confluent_vandermonde(&[p]);
        assert_eq!(v[(0, 0)], c(1.0, 0.0));
        assert_eq!(v[(0, 1)], c(0.0, 0.0));
        assert_eq!(v[(1, 0)], p);
        assert_eq!(v[(1, 1)], c(1.0, 0.0));
        assert_eq!(det_formula(&[p]), c(1.0, 0.0));
        let (a, b) = solve_derivative_system(&[p], &[c(0.5, 0.0), p * 0.5 + c(0.1, 0.1)]).unwrap();
        assert!((a[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((b[0] - c(0.1, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn two_node_round_trip() {
        let nodes = [c(0.8, -0.3), c(0.3, 0.7)];
        let w = [c(1.0, 0.0), c(-0.5, 0.0)];
        let rhs = vandermonde(&nodes).mul_vec(&w);
        let got = solve_nodes_system(&nodes, &rhs).unwrap();
        for (g, e) in got.iter().zip(&w) {
            assert!((g - e).norm() < 1e-12);
        }
        let iota = [c(0.1, 0.2), c(-0.3, 0.0), c(0.05, -0.4), c(0.2, 0.2)];
        let gamma = confluent_vandermonde(&nodes).mul_vec(&iota);
        let (a, b) = solve_derivative_system(&nodes, &gamma).unwrap();
        for (g, e) in a.iter().chain(&b).zip(&iota) {
            assert!((g - e).norm() < 1e-10);
        }
        let d = confluent_vandermonde(&nodes).det().unwrap();
        let expect = -(nodes[1] - nodes[0]).powu(4);
        assert!((d - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn coalesced_nodes_rejected() {
        let nodes = [c(0.5, 0.5), c(0.5 + 1e-14, 0.5)];
        assert!(solve_nodes_system(&nodes, &[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }
}
