//! Error metrics against scenario ground truth, and plot-ready series.

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::Vec3;
use crate::scenario::Scenario;
use crate::tracking::Track;
use crate::{Error, Result, C64};

/// Ground truth of one source at one slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truth {
    pub t_emit: f64,
    pub position: Vec3,
    pub strength: C64,
}

impl Truth {
    pub fn active(&self) -> bool {
        self.strength != C64::new(0.0, 0.0)
    }
}

/// `truth[i][k]` for slice `taus[i]` and source `k`.
pub fn truth_table(scn: &Scenario, taus: &[f64]) -> Result<Vec<Vec<Truth>>> {
    taus.iter()
        .map(|&tau| {
            (0..scn.sources.len())
                .map(|k| {
                    let t = scn.emission_time(k, tau)?;
                    let (p, s) = scn.sources[k].eval(t)?;
                    Ok(Truth { t_emit: t, position: p, strength: s.as_complex() })
                })
                .collect()
        })
        .collect()
}

/// Maximal run of slices with the same set of active sources.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// Slice indices `first..last` (exclusive).
    pub first: usize,
    pub last: usize,
    pub sources: Vec<usize>,
}

impl Interval {
    pub fn k_true(&self) -> usize {
        self.sources.len()
    }
}

pub fn truth_intervals(taus: &[f64], truth: &[Vec<Truth>]) -> Vec<Interval> {
    let active = |i: usize| -> Vec<usize> { (0..truth[i].len()).filter(|&k| truth[i][k].active()).collect() };
    let mut out: Vec<Interval> = Vec::new();
    for i in 0..taus.len() {
        let set = active(i);
        match out.last_mut() {
            Some(iv) if iv.sources == set => iv.last = i + 1,
            _ => {
                if let Some(prev) = out.last_mut() {
                    prev.hi = taus[i];
                }
                out.push(Interval { lo: taus[i], hi: taus[i], first: i, last: i + 1, sources: set });
            }
        }
    }
    if let (Some(iv), Some(&t)) = (out.last_mut(), taus.last()) {
        let step = if taus.len() > 1 { taus[taus.len() - 1] - taus[taus.len() - 2] } else { 0.0 };
        iv.hi = t + step;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorOptions {
    /// Skip slices where |true strength| is below 0.05.
    pub exclude_near_zero: bool,
    /// Average only over slices that have an estimate, instead of charging
    /// missing slices the true magnitude. Diagnostic; off by default.
    pub skip_missing: bool,
}

const NEAR_ZERO_STRENGTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub intervals: Vec<Interval>,
    /// `location[k][m]`: source k on interval m (`None` when inactive).
    pub location: Vec<Vec<Option<f64>>>,
    pub strength: Vec<Vec<Option<f64>>>,
    /// Truth source each track was mapped to.
    pub track_map: Vec<(u64, usize)>,
}

/// Maps every track to the truth source with the least mean distance over the
/// track's samples.
pub fn match_tracks(tracks: &[Track], taus: &[f64], truth: &[Vec<Truth>]) -> Vec<(u64, usize)> {
    let n_src = truth.first().map_or(0, Vec::len);
    let index_of = |tau: f64| -> Option<usize> {
        let i = taus.partition_point(|&t| t < tau - 1e-9);
        (i < taus.len() && libm::fabs(taus[i] - tau) < 1e-9).then_some(i)
    };
    let mut out = Vec::new();
    for tr in tracks {
        let mut sums = vec![0.0; n_src];
        let mut count = 0usize;
        for s in &tr.samples {
            let Some(i) = index_of(s.tau) else { continue };
            count += 1;
            for (k, sum) in sums.iter_mut().enumerate() {
                let p = truth[i][k].position;
                let dz = s.p_z.map_or(0.0, |z| z - p.z);
                *sum += libm::sqrt((s.p_xy - C64::new(p.x, p.y)).norm_sqr() + dz * dz);
            }
        }
        if count == 0 || n_src == 0 {
            continue;
        }
        let best = (0..n_src).min_by(|&a, &b| sums[a].total_cmp(&sums[b]).then(a.cmp(&b))).unwrap_or(0);
        out.push((tr.id, best));
    }
    out
}

/// Root-mean-square location and strength errors per source and interval.
/// Slices without a usable estimate count the full true magnitude (|p| or
/// |strength|) as their error.
pub fn average_errors(
    tracks: &[Track],
    taus: &[f64],
    truth: &[Vec<Truth>],
    intervals: &[Interval],
    opts: ErrorOptions,
) -> Result<ErrorTable> {
    if taus.len() != truth.len() {
        return Err(Error::SampleCount { expected: taus.len(), got: truth.len() });
    }
    let n_src = truth.first().map_or(0, Vec::len);
    let track_map = match_tracks(tracks, taus, truth);
    let mut location = vec![vec![None; intervals.len()]; n_src];
    let mut strength = vec![vec![None; intervals.len()]; n_src];
    for (m, iv) in intervals.iter().enumerate() {
        if iv.first >= iv.last {
            return Err(Error::Invalid("empty interval".into()));
        }
        for &k in &iv.sources {
            let mut loc_sq = 0.0;
            let mut str_sq = 0.0;
            let mut count = 0usize;
            for i in iv.first..iv.last {
                let tr = truth[i][k];
                if opts.exclude_near_zero && tr.strength.norm() < NEAR_ZERO_STRENGTH {
                    continue;
                }
                let candidate = track_map
                    .iter()
                    .filter(|&&(_, kk)| kk == k)
                    .filter_map(|&(id, _)| tracks.iter().find(|t| t.id == id))
                    .filter_map(|t| t.samples.iter().find(|s| libm::fabs(s.tau - taus[i]) < 1e-9))
                    .filter_map(|s| s.position().map(|p| ((p - tr.position).norm(), s)))
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                if candidate.is_none() && opts.skip_missing {
                    continue;
                }
                count += 1;
                match candidate {
                    Some((d, s)) => {
                        loc_sq += d * d;
                        str_sq += s.strength.map_or(tr.strength.norm_sqr(), |v| (v - tr.strength).norm_sqr());
                    }
                    None => {
                        loc_sq += tr.position.dot(tr.position);
                        str_sq += tr.strength.norm_sqr();
                    }
                }
            }
            if count > 0 {
                location[k][m] = Some(libm::sqrt(loc_sq / count as f64));
                strength[k][m] = Some(libm::sqrt(str_sq / count as f64));
            }
        }
    }
    Ok(ErrorTable { intervals: intervals.to_vec(), location, strength, track_map })
}

/// One row of the per-source time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub tau: f64,
    pub source: usize,
    pub truth: Truth,
    pub estimate: Option<(Vec3, Option<C64>)>,
}

pub fn source_series(tracks: &[Track], taus: &[f64], truth: &[Vec<Truth>], track_map: &[(u64, usize)]) -> Vec<SeriesRow> {
    let mut rows = Vec::new();
    for (i, &tau) in taus.iter().enumerate() {
        for (k, &tr) in truth[i].iter().enumerate() {
            let estimate = track_map
                .iter()
                .filter(|&&(_, kk)| kk == k)
                .filter_map(|&(id, _)| tracks.iter().find(|t| t.id == id))
                .filter_map(|t| t.samples.iter().find(|s| libm::fabs(s.tau - tau) < 1e-9))
                .filter_map(|s| s.position().map(|p| ((p - tr.position).norm(), p, s.strength)))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, p, s)| (p, s));
            rows.push(SeriesRow { tau, source: k, truth: tr, estimate });
        }
    }
    rows
}

/// Fraction of slices whose estimated count equals the true count.
pub fn count_accuracy(k_hat: &[usize], truth: &[Vec<Truth>]) -> f64 {
    if k_hat.is_empty() {
        return f64::NAN;
    }
    let hits = k_hat
        .iter()
        .zip(truth)
        .filter(|(&k, tr)| k == tr.iter().filter(|t| t.active()).count())
        .count();
    hits as f64 / k_hat.len() as f64
}
