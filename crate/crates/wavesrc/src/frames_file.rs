//! Frames, tracks and slices as CSV.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{ensure, Context};
use wavesrc_core::inversion::Frame;
use wavesrc_core::rgf::RgfSlice;
use wavesrc_core::tracking::{Track, TrackSample, TrackStatus};
use wavesrc_core::C64;

use crate::num;

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn frames_header(k_max: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "tau", "K_hat", "source_index", "track_id", "t_emit", "px", "py", "pz", "dz", "xi", "strength_re", "strength_im", "flags",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..=k_max + 1).map(|l| format!("det{l}")));
    h.push("stage".into());
    h
}

/// One row per recovered source; frames without sources get one row with
/// the source columns empty.
pub fn write_frames(path: &Path, frames: &[Frame], k_max: usize) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(frames_header(k_max))?;
    for f in frames {
        let dets: Vec<String> = (0..=k_max).map(|i| f.dets.get(i).map(|v| num(*v)).unwrap_or_default()).collect();
        let mut emit = |cols: Vec<String>| -> anyhow::Result<()> {
            let mut row = vec![num(f.tau), f.k_hat.to_string()];
            row.extend(cols);
            row.extend(dets.iter().cloned());
            row.push(f.stage.as_str().to_string());
            w.write_record(&row)?;
            Ok(())
        };
        if f.sources.is_empty() {
            emit(vec![String::new(); 11])?;
        }
        for (i, s) in f.sources.iter().enumerate() {
            let (sr, si) = s.strength.map_or((String::new(), String::new()), |v| (num(v.re), num(v.im)));
            emit(vec![
                i.to_string(),
                s.track_id.map(|v| v.to_string()).unwrap_or_default(),
                opt(s.t_emit),
                num(s.p_xy.re),
                num(s.p_xy.im),
                opt(s.p_z),
                opt(s.dz),
                opt(s.xi),
                sr,
                si,
                s.flags.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_tracks(path: &Path, tracks: &[Track]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["id", "tau_start", "tau_end", "n_samples"])?;
    for t in tracks {
        w.write_record([t.id.to_string(), num(t.tau_start()), num(t.tau_end()), t.samples.len().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_slices(path: &Path, slices: &[RgfSlice]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["tau".to_string(), "n".to_string()];
    for name in ["f", "g", "h", "i", "j"] {
        header.push(format!("R{name}_re"));
        header.push(format!("R{name}_im"));
    }
    w.write_record(&header)?;
    for s in slices {
        for n in 0..=s.n_max() {
            let mut row = vec![num(s.tau), n.to_string()];
            for seq in [&s.rf, &s.rg, &s.rh, &s.ri, &s.rj] {
                row.push(num(seq[n].re));
                row.push(num(seq[n].im));
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-τ summary read back from a frames file.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSummary {
    pub tau: f64,
    pub k_hat: usize,
    pub dets: Vec<Option<f64>>,
}

/// Reads a frames file into per-τ summaries and tracks rebuilt from the
/// track-id column.
pub fn read_frames(path: &Path) -> anyhow::Result<(Vec<FrameSummary>, Vec<Track>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).with_context(|| format!("frames file lacks column {name}"));
    let c = [
        col("tau")?, col("K_hat")?, col("track_id")?, col("t_emit")?, col("px")?, col("py")?, col("pz")?, col("xi")?,
        col("strength_re")?, col("strength_im")?, col("flags")?,
    ];
    let det_cols: Vec<usize> = header.iter().enumerate().filter(|(_, h)| h.starts_with("det")).map(|(i, _)| i).collect();
    let mut frames: Vec<FrameSummary> = Vec::new();
    let mut tracks: BTreeMap<u64, Vec<TrackSample>> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let real = |i: usize| -> anyhow::Result<Option<f64>> {
            let s = field(i);
            Ok(if s.is_empty() { None } else { Some(s.parse()?) })
        };
        let tau: f64 = field(c[0]).parse()?;
        if frames.last().is_none_or(|f| f.tau != tau) {
            ensure!(frames.last().is_none_or(|f| f.tau < tau), "frames are not ordered by tau");
            let dets = det_cols.iter().map(|&i| real(i)).collect::<anyhow::Result<_>>()?;
            frames.push(FrameSummary { tau, k_hat: field(c[1]).parse()?, dets });
        }
        let Some(id) = real(c[2])?.map(|v| v as u64) else { continue };
        let strength = match (real(c[8])?, real(c[9])?) {
            (Some(a), Some(b)) => Some(C64::new(a, b)),
            _ => None,
        };
        tracks.entry(id).or_default().push(TrackSample {
            tau,
            t_emit: real(c[3])?,
            p_xy: C64::new(real(c[4])?.unwrap_or(f64::NAN), real(c[5])?.unwrap_or(f64::NAN)),
            p_z: real(c[6])?,
            strength,
            xi: real(c[7])?,
            flags: field(c[10]).parse().unwrap_or(0),
        });
    }
    let tracks = tracks.into_iter().map(|(id, samples)| Track { id, samples, status: TrackStatus::Closed }).collect();
    Ok((frames, tracks))
}
