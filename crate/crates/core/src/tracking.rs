//! Association of per-slice sources into tracks by greedy nearest matching.

use alloc::vec::Vec;

use crate::geom::Vec3;
use crate::inversion::{flags, Frame};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// Matches farther apart than this start a new track.
    pub gate: f64,
    /// Consecutive frames a track may go unmatched before it closes.
    pub patience: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig { gate: 0.5, patience: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Active,
    Closed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackSample {
    pub tau: f64,
    pub t_emit: Option<f64>,
    pub p_xy: C64,
    pub p_z: Option<f64>,
    pub strength: Option<C64>,
    pub xi: Option<f64>,
    pub flags: u32,
}

impl TrackSample {
    pub fn position(&self) -> Option<Vec3> {
        self.p_z.map(|z| Vec3::new(self.p_xy.re, self.p_xy.im, z))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub samples: Vec<TrackSample>,
    pub status: TrackStatus,
}

impl Track {
    pub fn tau_start(&self) -> f64 {
        self.samples.first().map_or(f64::NAN, |s| s.tau)
    }

    pub fn tau_end(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.tau)
    }
}

/// Distance in 3-D when both depths are known, in the plane otherwise.
fn distance(a_xy: C64, a_z: Option<f64>, b_xy: C64, b_z: Option<f64>) -> f64 {
    let dz = match (a_z, b_z) {
        (Some(x), Some(y)) => x - y,
        _ => 0.0,
    };
    libm::sqrt((a_xy - b_xy).norm_sqr() + dz * dz)
}

/// A track end usable for matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackHead {
    pub id: u64,
    pub p_xy: C64,
    pub p_z: Option<f64>,
}

/// Greedy matching of `next` sources to track heads in ascending distance,
/// ties broken by track id then source coordinates. Returns, per source in
/// `next`, the matched track id or `None`. Ghost-flagged sources never match.
pub fn associate(heads: &[TrackHead], next: &Frame, gate: f64) -> Vec<Option<u64>> {
    let mut pairs: Vec<(f64, u64, usize)> = Vec::new();
    for h in heads {
        for (j, s) in next.sources.iter().enumerate() {
            if s.flags & flags::GHOST != 0 {
                continue;
            }
            let d = distance(h.p_xy, h.p_z, s.p_xy, s.p_z);
            if d <= gate {
                pairs.push((d, h.id, j));
            }
        }
    }
    let src = &next.sources;
    pairs.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(src[a.2].p_xy.re.total_cmp(&src[b.2].p_xy.re))
            .then(src[a.2].p_xy.im.total_cmp(&src[b.2].p_xy.im))
    });
    let mut out = alloc::vec![None; src.len()];
    let mut used: Vec<u64> = Vec::new();
    for (_, id, j) in pairs {
        if out[j].is_some() || used.contains(&id) {
            continue;
        }
        out[j] = Some(id);
        used.push(id);
    }
    out
}

/// Assigns track ids to every non-ghost source of `frames` (ordered by τ)
/// and returns the tracks.
pub fn track_frames(frames: &mut [Frame], cfg: &TrackerConfig) -> Vec<Track> {
    let mut tracks: Vec<Track> = Vec::new();
    // (track index, misses since last match)
    let mut active: Vec<(usize, usize)> = Vec::new();
    for frame in frames.iter_mut() {
        let heads: Vec<TrackHead> = active
            .iter()
            .map(|&(ti, _)| {
                let last = tracks[ti].samples.last().expect("tracks start with a sample");
                TrackHead { id: tracks[ti].id, p_xy: last.p_xy, p_z: last.p_z }
            })
            .collect();
        let assigned = associate(&heads, frame, cfg.gate);
        let mut matched: Vec<u64> = Vec::new();
        // New tracks open in source order, after sorting sources by position
        // so that id allocation does not depend on eigenvalue order.
        let mut order: Vec<usize> = (0..frame.sources.len()).collect();
        order.sort_by(|&a, &b| {
            let (sa, sb) = (&frame.sources[a], &frame.sources[b]);
            sa.p_xy.re.total_cmp(&sb.p_xy.re).then(sa.p_xy.im.total_cmp(&sb.p_xy.im))
        });
        for j in order {
            let src = &mut frame.sources[j];
            if src.flags & flags::GHOST != 0 {
                src.track_id = None;
                continue;
            }
            let id = match assigned[j] {
                Some(id) => id,
                None => {
                    let id = tracks.len() as u64;
                    tracks.push(Track { id, samples: Vec::new(), status: TrackStatus::Active });
                    active.push((id as usize, 0));
                    id
                }
            };
            matched.push(id);
            src.track_id = Some(id);
            tracks[id as usize].samples.push(TrackSample {
                tau: frame.tau,
                t_emit: src.t_emit,
                p_xy: src.p_xy,
                p_z: src.p_z,
                strength: src.strength,
                xi: src.xi,
                flags: src.flags,
            });
        }
        for entry in active.iter_mut() {
            if matched.contains(&(entry.0 as u64)) {
                entry.1 = 0;
            } else {
                entry.1 += 1;
            }
        }
        active.retain(|&(ti, misses)| {
            let keep = misses < cfg.patience;
            if !keep {
                tracks[ti].status = TrackStatus::Closed;
            }
            keep
        });
    }
    tracks
}
