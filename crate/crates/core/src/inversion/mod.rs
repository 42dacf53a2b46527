//! Per-slice recovery of source count, positions, strengths and emission
//! times from reciprocity-gap moments.

mod hankel;
mod rhat;
mod vandermonde;

pub use hankel::{count_sources, hankel, HankelSet};
pub use rhat::{rhat_terms, Correction, SourceState};
pub use vandermonde::{confluent_vandermonde, det_formula, solve_derivative_system, solve_nodes_system};

use alloc::vec::Vec;

use crate::geom::Vec3;
use crate::poly::pencil_eigenvalues;
use crate::rgf::RgfSlice;
use crate::scenario::SourceKind;
use crate::{Error, Result, C64};

pub mod flags {
    /// |strength| below the ghost threshold.
    pub const GHOST: u32 = 1;
    /// Recovered position outside the ball.
    pub const OUTSIDE: u32 = 2;
    /// |ξ| too small to divide by; strength left unset.
    pub const SMALL_XI: u32 = 4;
    /// dz taken from neighbouring frames.
    pub const STEP4_FD: u32 = 8;
    /// Neighbouring frames unavailable; algebraic dz kept.
    pub const STEP4_FD_FALLBACK: u32 = 16;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Count,
    Locate,
    Depth,
    Velocity,
    Complete,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Count => "count",
            Stage::Locate => "locate",
            Stage::Depth => "depth",
            Stage::Velocity => "velocity",
            Stage::Complete => "complete",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredSource {
    pub p_xy: C64,
    /// q·ξ or m_xy·ξ.
    pub zeta: C64,
    pub p_z: Option<f64>,
    pub dz: Option<f64>,
    pub xi: Option<f64>,
    /// q (imaginary part dropped for points) or m_x + i m_y.
    pub strength: Option<C64>,
    /// Imaginary part discarded from a point strength.
    pub strength_residue: f64,
    pub t_emit: Option<f64>,
    pub flags: u32,
    pub track_id: Option<u64>,
}

impl RecoveredSource {
    pub fn position(&self) -> Option<Vec3> {
        self.p_z.map(|z| Vec3::new(self.p_xy.re, self.p_xy.im, z))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub tau: f64,
    pub kind: SourceKind,
    pub k_hat: usize,
    pub dets: Vec<f64>,
    pub sources: Vec<RecoveredSource>,
    /// Last stage completed; `Complete` unless a sub-solver failed.
    pub stage: Stage,
    pub failure: Option<Error>,
    pub cond_h0: f64,
    pub cond_confluent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub c: f64,
    pub k_max: usize,
    pub eps0: f64,
    pub eps_g: f64,
    pub radius: f64,
    pub cond_limit: f64,
    pub ghost_threshold: f64,
    pub min_weight: f64,
    pub min_xi: f64,
}

impl InversionConfig {
    pub fn new(c: f64, radius: f64, k_max: usize, eps0: f64, eps_g: f64) -> Self {
        InversionConfig {
            c,
            k_max,
            eps0,
            eps_g,
            radius,
            cond_limit: 1e12,
            ghost_threshold: 0.01,
            min_weight: 1e-8,
            min_xi: 0.05,
        }
    }
}

/// Moment sequences rearranged so that point and dipole cases share the
/// Hankel/Vandermonde machinery: seq_f[j] = Σ ζ pʲ, seq_g[j] = d_τ of it, and
/// the raw h, i, j moments with the order shift and scale for each kind.
struct Sequences<'a> {
    kind: SourceKind,
    slice: &'a RgfSlice,
}

impl Sequences<'_> {
    fn shift(&self) -> usize {
        match self.kind {
            SourceKind::Point => 0,
            SourceKind::Dipole => 1,
        }
    }

    fn reduce(&self, raw: &[C64], j: usize) -> Result<C64> {
        let n = j + self.shift();
        let v = *raw.get(n).ok_or(Error::TooFewMoments { need: n + 1, have: raw.len() })?;
        Ok(match self.kind {
            SourceKind::Point => v,
            SourceKind::Dipole => v / n as f64,
        })
    }

    fn f(&self, len: usize) -> Result<Vec<C64>> {
        (0..len).map(|j| self.reduce(&self.slice.rf, j)).collect()
    }

    fn g(&self, len: usize) -> Result<Vec<C64>> {
        (0..len).map(|j| self.reduce(&self.slice.rg, j)).collect()
    }

    /// Order n of the h/j equations for reduced index m = 1..K, and the
    /// factor dividing the corrected moment.
    fn hj_order(&self, m: usize) -> (usize, f64) {
        let n = m + self.shift();
        let nf = n as f64;
        match self.kind {
            SourceKind::Point => (n, 2.0 * nf),
            SourceKind::Dipole => (n, 2.0 * nf * (nf - 1.0)),
        }
    }
}

fn degrade(frame: &mut Frame, stage: Stage, err: Error) {
    frame.stage = stage;
    frame.failure = Some(err);
}

/// Runs the full per-slice inversion. Sub-solver failures leave a partial
/// frame with `stage` set to the last completed step.
pub fn reconstruct_frame(slice: &RgfSlice, kind: SourceKind, cfg: &InversionConfig) -> Frame {
    let mut frame = Frame {
        tau: slice.tau,
        kind,
        k_hat: 0,
        dets: Vec::new(),
        sources: Vec::new(),
        stage: Stage::Count,
        failure: None,
        cond_h0: f64::NAN,
        cond_confluent: f64::NAN,
    };
    let seq = Sequences { kind, slice };
    let set = match seq.f(2 * cfg.k_max + 1).and_then(|m| HankelSet::new(&m, cfg.k_max + 1)) {
        Ok(s) => s,
        Err(e) => {
            frame.failure = Some(e);
            return frame;
        }
    };
    frame.dets = set.dets.clone();
    let k = count_sources(&set, cfg.eps0, cfg.eps_g, cfg.k_max);
    frame.k_hat = k;
    if k == 0 {
        frame.stage = Stage::Complete;
        return frame;
    }
    let located = locate(&seq, k, cfg, &mut frame);
    let (nodes, zeta) = match located {
        Ok(v) => v,
        Err(e) => return finish_failed(frame, Stage::Count, e),
    };
    frame.sources = nodes
        .iter()
        .zip(&zeta)
        .map(|(&p, &z)| RecoveredSource {
            p_xy: p,
            zeta: z,
            p_z: None,
            dz: None,
            xi: None,
            strength: None,
            strength_residue: 0.0,
            t_emit: None,
            flags: 0,
            track_id: None,
        })
        .collect();
    frame.stage = Stage::Locate;
    let mut states: Vec<SourceState> =
        nodes.iter().zip(&zeta).map(|(&node, &zeta)| SourceState { zeta, node, ..Default::default() }).collect();
    if let Err(e) = depth(&seq, cfg, &mut states, &mut frame) {
        degrade(&mut frame, Stage::Locate, e);
        return finish(frame, cfg);
    }
    frame.stage = Stage::Depth;
    if let Err(e) = velocity(&seq, cfg, &mut states, &mut frame) {
        degrade(&mut frame, Stage::Depth, e);
        return finish(frame, cfg);
    }
    frame.stage = Stage::Complete;
    finish(frame, cfg)
}

fn finish_failed(mut frame: Frame, stage: Stage, err: Error) -> Frame {
    degrade(&mut frame, stage, err);
    frame
}

fn locate(seq: &Sequences, k: usize, cfg: &InversionConfig, frame: &mut Frame) -> Result<(Vec<C64>, Vec<C64>)> {
    let f = seq.f(2 * k)?;
    let h0 = hankel(&f, k, 0)?;
    let h1 = hankel(&f, k, 1)?;
    frame.cond_h0 = h0.condition_1();
    if !(frame.cond_h0 <= cfg.cond_limit) {
        return Err(Error::Singular("H0 ill-conditioned"));
    }
    let mut nodes = pencil_eigenvalues(&h0, &h1)?;
    // Deterministic order: by real part, then imaginary part.
    nodes.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let zeta = solve_nodes_system(&nodes, &f[..k])?;
    Ok((nodes, zeta))
}

/// Steps for p_z: first-derivative confluent solve, then the h equations.
fn depth(seq: &Sequences, cfg: &InversionConfig, states: &mut [SourceState], frame: &mut Frame) -> Result<()> {
    let k = states.len();
    let nodes: Vec<C64> = states.iter().map(|s| s.node).collect();
    if states.iter().any(|s| s.zeta.norm() < cfg.min_weight) {
        return Err(Error::Singular("vanishing weight"));
    }
    let m = confluent_vandermonde(&nodes);
    frame.cond_confluent = m.condition_1();
    let (dzeta, zeta_dnode) = solve_derivative_system(&nodes, &seq.g(2 * k)?)?;
    for (s, (a, b)) in states.iter_mut().zip(dzeta.into_iter().zip(zeta_dnode)) {
        s.dzeta = Some(a);
        s.zeta_dnode = Some(b);
    }
    let rhs = corrected(seq, cfg, states, Correction::H, &seq.slice.rh)?;
    let zeta_pz = solve_nodes_system(&nodes, &rhs)?;
    for ((s, src), zp) in states.iter_mut().zip(frame.sources.iter_mut()).zip(zeta_pz) {
        let pz = zp / s.zeta;
        s.pz = Some(pz.re);
        src.p_z = Some(pz.re);
        src.t_emit = Some(seq.slice.tau - pz.re / cfg.c);
    }
    Ok(())
}

/// Right-hand side Σ_k (ζ_k x_k) p_kᵐ⁻¹ for m = 1..K from corrected h or j moments.
fn corrected(seq: &Sequences, cfg: &InversionConfig, states: &[SourceState], which: Correction, raw: &[C64]) -> Result<Vec<C64>> {
    (1..=states.len())
        .map(|m| {
            let (n, scale) = seq.hj_order(m);
            let v = *raw.get(n).ok_or(Error::TooFewMoments { need: n + 1, have: raw.len() })?;
            Ok((v - rhat_terms(seq.kind, which, states, n, cfg.c)?) / scale)
        })
        .collect()
}

/// Steps for dz: second-derivative confluent solve, then the j equations.
fn velocity(seq: &Sequences, cfg: &InversionConfig, states: &mut [SourceState], frame: &mut Frame) -> Result<()> {
    let k = states.len();
    let nodes: Vec<C64> = states.iter().map(|s| s.node).collect();
    let gamma: Vec<C64> = (0..2 * k)
        .map(|j| {
            let n = j + seq.shift();
            let raw = *seq.slice.ri.get(n).ok_or(Error::TooFewMoments { need: n + 1, have: seq.slice.ri.len() })?;
            let v = raw - rhat_terms(seq.kind, Correction::I, states, n, cfg.c)?;
            Ok(match seq.kind {
                SourceKind::Point => v,
                SourceKind::Dipole => v / n as f64,
            })
        })
        .collect::<Result<_>>()?;
    let (d2zeta, zeta_d2node) = solve_derivative_system(&nodes, &gamma)?;
    for (s, (a, b)) in states.iter_mut().zip(d2zeta.into_iter().zip(zeta_d2node)) {
        s.d2zeta = Some(a);
        s.zeta_d2node = Some(b);
    }
    let rhs = corrected(seq, cfg, states, Correction::J, &seq.slice.rj)?;
    let zeta_dz = solve_nodes_system(&nodes, &rhs)?;
    for ((s, src), zd) in states.iter().zip(frame.sources.iter_mut()).zip(zeta_dz) {
        src.dz = Some((zd / s.zeta).re);
    }
    Ok(())
}

/// ξ = 1 − dz/c and strength = ζ/ξ, plus flags.
fn apply_doppler(src: &mut RecoveredSource, kind: SourceKind, cfg: &InversionConfig) {
    if let Some(dz) = src.dz {
        let xi = 1.0 - dz / cfg.c;
        src.xi = Some(xi);
        src.flags &= !flags::SMALL_XI;
        if libm::fabs(xi) < cfg.min_xi {
            src.flags |= flags::SMALL_XI;
            src.strength = None;
        } else {
            let s = src.zeta / xi;
            match kind {
                SourceKind::Point => {
                    src.strength = Some(C64::new(s.re, 0.0));
                    src.strength_residue = s.im;
                }
                SourceKind::Dipole => src.strength = Some(s),
            }
        }
    }
    src.flags &= !flags::GHOST;
    let magnitude = src.strength.unwrap_or(src.zeta).norm();
    if magnitude < cfg.ghost_threshold {
        src.flags |= flags::GHOST;
    }
    src.flags &= !flags::OUTSIDE;
    let r2 = src.p_xy.norm_sqr() + src.p_z.map_or(0.0, |z| z * z);
    if r2 >= cfg.radius * cfg.radius {
        src.flags |= flags::OUTSIDE;
    }
}

fn finish(mut frame: Frame, cfg: &InversionConfig) -> Frame {
    let kind = frame.kind;
    for s in &mut frame.sources {
        apply_doppler(s, kind, cfg);
    }
    frame
}

/// (p_z(τ+dτ) − p_z(τ−dτ)) / (2dτ).
pub fn central_dz(pz_prev: f64, pz_next: f64, dtau: f64) -> f64 {
    (pz_next - pz_prev) / (2.0 * dtau)
}

/// Replaces the algebraic dz by a central difference of p_z along each
/// track, for frames ordered by τ with track ids assigned. Sources whose
/// track is missing from either neighbour keep the algebraic value and are
/// flagged.
pub fn step4_finite_difference(frames: &mut [Frame], dtau: f64, cfg: &InversionConfig) {
    let lookup = |f: &Frame, id: u64| f.sources.iter().find(|s| s.track_id == Some(id)).and_then(|s| s.p_z);
    let mut updates: Vec<(usize, usize, Option<f64>)> = Vec::new();
    for i in 0..frames.len() {
        for (j, src) in frames[i].sources.iter().enumerate() {
            let (Some(id), Some(_)) = (src.track_id, src.p_z) else {
                updates.push((i, j, None));
                continue;
            };
            let neighbour = |k: Option<usize>, sign: f64| {
                k.and_then(|k| frames.get(k))
                    .filter(|f| libm::fabs(f.tau - (frames[i].tau + sign * dtau)) < 1e-6 * dtau)
                    .and_then(|f| lookup(f, id))
            };
            let prev = neighbour(i.checked_sub(1), -1.0);
            let next = neighbour(Some(i + 1), 1.0);
            updates.push((i, j, prev.zip(next).map(|(a, b)| central_dz(a, b, dtau))));
        }
    }
    for (i, j, dz) in updates {
        let src = &mut frames[i].sources[j];
        match dz {
            Some(v) => {
                src.dz = Some(v);
                src.flags = (src.flags | flags::STEP4_FD) & !flags::STEP4_FD_FALLBACK;
            }
            None => src.flags = (src.flags | flags::STEP4_FD_FALLBACK) & !flags::STEP4_FD,
        }
        let kind = frames[i].kind;
        apply_doppler(&mut frames[i].sources[j], kind, cfg);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{synthetic_slice, AnalyticSource, ConfigSampler, Harmonic};


    fn exact_cfg(k_max: usize) -> InversionConfig {
        // Exact moments: count by rank alone.
        InversionConfig::new(1.0, 2.0, k_max, 1e-12, 1e-6)
    }

    fn still(x: f64, y: f64, z: f64, q: f64) -> AnalyticSource {
        AnalyticSource {
            kind: SourceKind::Point,
            position: [Harmonic::constant(x), Harmonic::constant(y), Harmonic::constant(z)],
            strength: [Harmonic::constant(q), Harmonic::constant(0.0)],
        }
    }

    #[test]
    fn stationary_unit_source() {
        let slice = synthetic_slice(&[still(0.5, -0.2, 0.3, 1.0)], SourceKind::Point, 10.0, 1.0, 9).unwrap();
        let f = reconstruct_frame(&slice, SourceKind::Point, &InversionConfig::new(1.0, 2.0, 4, 1e-4, 2.5e-2));
        assert_eq!(f.k_hat, 1);
        assert_eq!(f.stage, Stage::Complete);
        let s = &f.sources[0];
        assert!((s.p_xy - C64::new(0.5, -0.2)).norm() < 1e-12);
        assert!((s.p_z.unwrap() - 0.3).abs() < 1e-12);
        assert!(s.dz.unwrap().abs() < 1e-12);
        assert!((s.xi.unwrap() - 1.0).abs() < 1e-12);
        assert!((s.strength.unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((s.t_emit.unwrap() - 9.7).abs() < 1e-12);
    }

    #[test]
    fn moving_sources_are_recovered_exactly() {
        let mut sampler = ConfigSampler::new(3);
        for kind in [SourceKind::Point, SourceKind::Dipole] {
            for k in 1..=3 {
                let tau = 12.0;
                let srcs = sampler.sources(kind, k, tau, 1.0, 0.3).unwrap();
                let slice = synthetic_slice(&srcs, kind, tau, 1.0, 10).unwrap();
                let f = reconstruct_frame(&slice, kind, &exact_cfg(4));
                assert_eq!(f.k_hat, k, "{kind:?}");
                assert_eq!(f.stage, Stage::Complete);
                for src in &srcs {
                    let t = src.truth(tau, 1.0).unwrap();
                    let got = f
                        .sources
                        .iter()
                        .min_by(|a, b| {
                            let d = |s: &RecoveredSource| (s.p_xy - C64::new(t.position.x, t.position.y)).norm();
                            d(a).total_cmp(&d(b))
                        })
                        .unwrap();
                    assert!((got.position().unwrap() - t.position).norm() < 1e-8);
                    assert!((got.strength.unwrap() - t.strength).norm() < 1e-8);
                    assert!((got.xi.unwrap() - t.xi).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn empty_slice_counts_zero() {
        let slice = synthetic_slice(&[], SourceKind::Point, 3.0, 1.0, 9).unwrap();
        let f = reconstruct_frame(&slice, SourceKind::Point, &InversionConfig::new(1.0, 2.0, 4, 1e-4, 2.5e-2));
        assert_eq!(f.k_hat, 0);
        assert!(f.sources.is_empty());
    }

    #[test]
    fn finite_difference_dz_is_exact_on_affine_depth() {
        let cfg = InversionConfig::new(1.0, 2.0, 4, 1e-4, 2.5e-2);
        let mut frames: Vec<Frame> = (0..5)
            .map(|i| {
                let tau = i as f64 * 0.1;
                let slice = synthetic_slice(&[still(0.2, 0.1, 0.0, 1.0)], SourceKind::Point, tau, 1.0, 9).unwrap();
                let mut f = reconstruct_frame(&slice, SourceKind::Point, &cfg);
                f.sources[0].p_z = Some(0.1 + 0.3 * tau);
                f.sources[0].track_id = Some(0);
                f
            })
            .collect();
        step4_finite_difference(&mut frames, 0.1, &cfg);
        for f in &frames[1..4] {
            assert!((f.sources[0].dz.unwrap() - 0.3).abs() < 1e-12);
            assert!(f.sources[0].flags & flags::STEP4_FD != 0);
        }
        assert!(frames[0].sources[0].flags & flags::STEP4_FD_FALLBACK != 0);
        assert_eq!(central_dz(1.0, 1.0, 0.1), 0.0);
    }
}
