//! Correction terms R̂_h, R̂_i, R̂_j built from quantities recovered earlier in
//! the same frame.

use crate::scenario::SourceKind;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    H,
    I,
    J,
}

/// Per-source state available to the corrections. `zeta` is q·ξ (point) or
/// m_xy·ξ (dipole); derivative fields are τ-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SourceState {
    pub zeta: C64,
    pub node: C64,
    pub dzeta: Option<C64>,
    pub zeta_dnode: Option<C64>,
    pub d2zeta: Option<C64>,
    pub zeta_d2node: Option<C64>,
    pub pz: Option<f64>,
}

struct Sym {
    z: C64,
    zb: C64,
    p: C64,
    pb: C64,
    dz: C64,
    dzb: C64,
    dp: C64,
    dpb: C64,
    d2z: C64,
    d2zb: C64,
    d2p: C64,
    d2pb: C64,
    pz: f64,
}

fn need<T>(v: Option<T>, what: &'static str) -> Result<T> {
    v.ok_or(Error::MissingState(what))
}

fn symbols(s: &SourceState, which: Correction) -> Result<Sym> {
    let zero = C64::new(0.0, 0.0);
    let dz = need(s.dzeta, "d(zeta)")?;
    let dp = need(s.zeta_dnode, "zeta*d(node)")? / s.zeta;
    let (d2z, d2p, pz) = if which == Correction::J {
        (
            need(s.d2zeta, "d2(zeta)")?,
            need(s.zeta_d2node, "zeta*d2(node)")? / s.zeta,
            need(s.pz, "p_z")?,
        )
    } else {
        (zero, zero, 0.0)
    };
    Ok(Sym {
        z: s.zeta,
        zb: s.zeta.conj(),
        p: s.node,
        pb: s.node.conj(),
        dz,
        dzb: dz.conj(),
        dp,
        dpb: dp.conj(),
        d2z,
        d2zb: d2z.conj(),
        d2p,
        d2pb: d2p.conj(),
        pz,
    })
}

/// factor·pᵉ, or zero when the factor vanishes (which is the only way a
/// negative exponent can arise).
fn term(factor: f64, p: C64, exp: i64) -> C64 {
    if factor == 0.0 {
        return C64::new(0.0, 0.0);
    }
    debug_assert!(exp >= 0);
    p.powu(exp.max(0) as u32) * factor
}

fn point_term(s: &Sym, which: Correction, n: i64, c: f64) -> C64 {
    let nf = n as f64;
    let p = s.p;
    match which {
        Correction::H => {
            (s.dz * s.pb + s.z * s.dpb) * term(1.0 / c, p, n) + s.z * s.dp * s.pb * term(nf / c, p, n - 1)
        }
        Correction::I => {
            s.dz * s.dp * term(2.0 * nf, p, n - 1) + s.z * s.dp * s.dp * term(nf * (nf - 1.0), p, n - 2)
        }
        Correction::J => {
            (s.dz * term(2.0 * nf, p, n - 1) + s.z * s.dp * term(2.0 * nf * (nf - 1.0), p, n - 2)) * s.pz
                + s.d2z * s.pb * term(1.0 / c, p, n)
                + (s.dz * s.dpb * 2.0 + s.z * s.d2pb) * term(1.0 / c, p, n)
                + (s.dz * s.dp * 2.0 + s.z * s.d2p) * s.pb * term(nf / c, p, n - 1)
                + s.z * s.dp * s.dpb * term(2.0 * nf / c, p, n - 1)
                + s.z * s.dp * s.dp * s.pb * term(nf * (nf - 1.0) / c, p, n - 2)
        }
    }
}

fn dipole_term(s: &Sym, which: Correction, n: i64, c: f64) -> C64 {
    let nf = n as f64;
    let p = s.p;
    let n1 = nf * (nf - 1.0);
    let n2 = n1 * (nf - 2.0);
    match which {
        Correction::H => {
            s.dzb * term(1.0 / c, p, n)
                + (s.dz * s.pb + s.zb * s.dp + s.z * s.dpb) * term(nf / c, p, n - 1)
                + s.z * s.dp * s.pb * term(n1 / c, p, n - 2)
        }
        Correction::I => s.dz * s.dp * term(2.0 * n1, p, n - 2) + s.z * s.dp * s.dp * term(n2, p, n - 3),
        Correction::J => {
            (s.dz * term(2.0 * n1, p, n - 2) + s.z * s.dp * term(2.0 * n2, p, n - 3)) * s.pz
                + s.d2zb * term(1.0 / c, p, n)
                + s.d2z * s.pb * term(nf / c, p, n - 1)
                + (s.dzb * s.dp * 2.0 + s.zb * s.d2p) * term(nf / c, p, n - 1)
                + (s.dz * s.dpb * 2.0 + s.z * s.d2pb) * term(nf / c, p, n - 1)
                + s.zb * s.dp * s.dp * term(n1 / c, p, n - 2)
                + (s.dz * s.dp * 2.0 + s.z * s.d2p) * s.pb * term(n1 / c, p, n - 2)
                + s.z * s.dpb * s.dp * term(2.0 * n1 / c, p, n - 2)
                + s.z * s.pb * s.dp * s.dp * term(n2 / c, p, n - 3)
        }
    }
}

/// Σ_k of the closed-form correction of order `n` over all sources.
pub fn rhat_terms(kind: SourceKind, which: Correction, states: &[SourceState], n: usize, c: f64) -> Result<C64> {
    let mut sum = C64::new(0.0, 0.0);
    for s in states {
        let sym = symbols(s, which)?;
        sum += match kind {
            SourceKind::Point => point_term(&sym, which, n as i64, c),
            SourceKind::Dipole => dipole_term(&sym, which, n as i64, c),
        };
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{synthetic_slice, AnalyticSource, Harmonic};

    fn moving(kind: SourceKind) -> AnalyticSource {
        AnalyticSource {
            kind,
            position: [
                Harmonic { offset: 0.3, amplitude: 0.4, omega: 0.35, phase: 0.2 },
                Harmonic { offset: -0.2, amplitude: 0.5, omega: 0.25, phase: 1.3 },
                Harmonic { offset: 0.1, amplitude: 0.5, omega: 0.45, phase: -0.7 },
            ],
            strength: [
                Harmonic { offset: 0.9, amplitude: 0.3, omega: 0.8, phase: 0.0 },
                Harmonic { offset: if kind == SourceKind::Dipole { -0.4 } else { 0.0 }, amplitude: 0.0, omega: 0.0, phase: 0.0 },
            ],
        }
    }

    /// State read off exact jets via tiny finite differences of the truth.
    fn exact_state(src: &AnalyticSource, tau: f64, c: f64) -> SourceState {
        let h = 1e-3;
        let at = |t: f64| {
            let tr = src.truth(t, c).unwrap();
            (tr.strength * tr.xi, C64::new(tr.position.x, tr.position.y), tr.position.z)
        };
        let (z0, p0, pz) = at(tau);
        let (zp, pp, _) = at(tau + h);
        let (zm, pm, _) = at(tau - h);
        let d1 = |a: C64, b: C64| (b - a) / (2.0 * h);
        let d2 = |a: C64, m: C64, b: C64| (b - m * 2.0 + a) / (h * h);
        SourceState {
            zeta: z0,
            node: p0,
            dzeta: Some(d1(zm, zp)),
            zeta_dnode: Some(z0 * d1(pm, pp)),
            d2zeta: Some(d2(zm, z0, zp)),
            zeta_d2node: Some(z0 * d2(pm, p0, pp)),
            pz: Some(pz),
        }
    }

    #[test]
    fn stationary_source_has_no_h_correction() {
        let s = SourceState {
            zeta: C64::new(1.0, 0.0),
            node: C64::new(0.0, 0.0),
            dzeta: Some(C64::new(0.0, 0.0)),
            zeta_dnode: Some(C64::new(0.0, 0.0)),
            ..Default::default()
        };
        for n in 1..6 {
            assert_eq!(rhat_terms(SourceKind::Point, Correction::H, &[s], n, 1.0).unwrap(), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn missing_state_is_reported() {
        let s = SourceState { zeta: C64::new(1.0, 0.0), ..Default::default() };
        assert!(matches!(
            rhat_terms(SourceKind::Point, Correction::H, &[s], 1, 1.0),
            Err(Error::MissingState(_))
        ));
    }

    #[test]
    fn corrections_close_the_moment_identities() {
        // Rh[n] − R̂h = 2n Σζ p_z pⁿ⁻¹ (point) and 2n(n−1) Σζ p_z pⁿ⁻² (dipole), etc.
        let c = 1.0;
        let tau = 7.5;
        for kind in [SourceKind::Point, SourceKind::Dipole] {
            let src = moving(kind);
            let slice = synthetic_slice(core::slice::from_ref(&src), kind, tau, c, 5).unwrap();
            let st = exact_state(&src, tau, c);
            let tr = src.truth(tau, c).unwrap();
            let z = st.zeta;
            let p = st.node;
            for n in 1..=5usize {
                let nf = n as f64;
                let (h_lhs, shift) = match kind {
                    SourceKind::Point => (2.0 * nf, 1),
                    SourceKind::Dipole => (2.0 * nf * (nf - 1.0), 2),
                };
                if h_lhs == 0.0 {
                    continue;
                }
                let pw = p.powu((n - shift) as u32);
                let rh = rhat_terms(kind, Correction::H, &[st], n, c).unwrap();
                let expect = z * tr.position.z * pw * h_lhs;
                assert!((slice.rh[n] - rh - expect).norm() < 1e-5, "{kind:?} h_{n}");
                let rj = rhat_terms(kind, Correction::J, &[st], n, c).unwrap();
                let expect = z * tr.dz * pw * h_lhs;
                assert!((slice.rj[n] - rj - expect).norm() < 1e-5, "{kind:?} j_{n}");
                let ri = rhat_terms(kind, Correction::I, &[st], n, c).unwrap();
                let d2z = st.d2zeta.unwrap();
                let zd2p = st.zeta_d2node.unwrap();
                let expect = match kind {
                    SourceKind::Point => d2z * p.powu(n as u32) + zd2p * p.powu(n as u32 - 1) * nf,
                    SourceKind::Dipole => {
                        let a = d2z * p.powu(n as u32 - 1) * nf;
                        let b = if n >= 2 { zd2p * p.powu(n as u32 - 2) * (nf * (nf - 1.0)) } else { C64::new(0.0, 0.0) };
                        a + b
                    }
                };
                assert!((slice.ri[n] - ri - expect).norm() < 1e-5, "{kind:?} i_{n}");
            }
        }
    }
}
