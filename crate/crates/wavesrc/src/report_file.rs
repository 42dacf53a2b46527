//! Error tables and plot data.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use wavesrc_core::report::{ErrorTable, SeriesRow};
use wavesrc_core::scenario::SourceKind;

use crate::frames_file::FrameSummary;
use crate::num;

fn strength_symbol(kind: SourceKind) -> &'static str {
    match kind {
        SourceKind::Point => "q",
        SourceKind::Dipole => "m",
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |e| format!("{e:.1E}"))
}

/// Aligned text table: one column per interval with K > 0, location rows
/// first, then strength rows.
pub fn format_table(table: &ErrorTable, kind: SourceKind) -> String {
    let cols: Vec<usize> = (0..table.intervals.len()).filter(|&m| table.intervals[m].k_true() > 0).collect();
    let heads: Vec<String> = cols
        .iter()
        .map(|&m| {
            let iv = &table.intervals[m];
            format!("{:.1}<=tau<{:.1}", iv.lo, iv.hi)
        })
        .collect();
    let width = heads.iter().map(String::len).max().unwrap_or(8).max(8) + 2;
    let mut out = String::new();
    let _ = write!(out, "{:<6}", "");
    for h in &heads {
        let _ = write!(out, "{h:>width$}");
    }
    out.push('\n');
    let _ = write!(out, "{:<6}", "");
    for &m in &cols {
        let _ = write!(out, "{:>width$}", format!("(K={})", table.intervals[m].k_true()));
    }
    out.push('\n');
    let n_src = table.location.len();
    let rows = (0..n_src)
        .map(|k| (format!("p{}", k + 1), &table.location[k]))
        .chain((0..n_src).map(|k| (format!("{}{}", strength_symbol(kind), k + 1), &table.strength[k])));
    for (label, values) in rows {
        let _ = write!(out, "{label:<6}");
        for &m in &cols {
            let _ = write!(out, "{:>width$}", cell(values[m]));
        }
        out.push('\n');
    }
    out
}

pub fn write_error_csv(path: &Path, table: &ErrorTable, kind: SourceKind) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["quantity", "source", "tau_lo", "tau_hi", "K_true", "error"])?;
    for (name, values) in [("location", &table.location), (strength_symbol(kind), &table.strength)] {
        for (k, per) in values.iter().enumerate() {
            for (m, v) in per.iter().enumerate() {
                let Some(v) = v else { continue };
                let iv = &table.intervals[m];
                w.write_record([
                    name.to_string(),
                    (k + 1).to_string(),
                    num(iv.lo),
                    num(iv.hi),
                    iv.k_true().to_string(),
                    num(*v),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_series(path: &Path, rows: &[SeriesRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([
        "tau", "source", "t_emit", "true_px", "true_py", "true_pz", "true_s_re", "true_s_im", "est_px", "est_py", "est_pz",
        "est_s_re", "est_s_im",
    ])?;
    for r in rows {
        let t = &r.truth;
        let mut row = vec![
            num(r.tau),
            (r.source + 1).to_string(),
            num(t.t_emit),
            num(t.position.x),
            num(t.position.y),
            num(t.position.z),
            num(t.strength.re),
            num(t.strength.im),
        ];
        match r.estimate {
            Some((p, s)) => {
                row.extend([num(p.x), num(p.y), num(p.z)]);
                match s {
                    Some(s) => row.extend([num(s.re), num(s.im)]),
                    None => row.extend([String::new(), String::new()]),
                }
            }
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// |det H_L| per slice, L = 1..k_max+1.
pub fn write_dets(path: &Path, frames: &[FrameSummary], k_max: usize) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["tau".to_string()];
    header.extend((1..=k_max + 1).map(|l| format!("L{l}")));
    w.write_record(&header)?;
    for f in frames {
        let mut row = vec![num(f.tau)];
        row.extend((0..=k_max).map(|i| f.dets.get(i).copied().flatten().map(num).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Fraction of slices with the right count, one row per noise level.
pub fn write_counts(path: &Path, rows: &[(f64, f64)]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["noise_level", "count_accuracy"])?;
    for &(level, acc) in rows {
        w.write_record([num(level), num(acc)])?;
    }
    w.flush()?;
    Ok(())
}
