//! Boundary-field CSV.
//!
//! First line: `# R=..,J=..,K=..,dt=..,L=..,c=..,noise_level=..,seed=..,scenario_hash=..`,
//! then the header `l,j,k,t,x,y,z,phi` and one row per step and node.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context};
use wavesrc_core::forward::{BoundaryField, FieldMeta};
use wavesrc_core::grid::SphereGrid;

use crate::num;

const HEADER: [&str; 8] = ["l", "j", "k", "t", "x", "y", "z", "phi"];

pub fn write_field(path: &Path, field: &BoundaryField) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    let g = field.grid();
    writeln!(
        out,
        "# R={},J={},K={},dt={},L={},c={},noise_level={},seed={},scenario_hash={}",
        num(g.radius()),
        g.n_polar(),
        g.n_azimuth(),
        num(field.dt()),
        field.n_steps() - 1,
        num(field.wave_speed()),
        num(field.meta.noise_level),
        field.meta.seed,
        field.meta.scenario_hash
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    let pts = g.points();
    for l in 0..field.n_steps() {
        let t = num(l as f64 * field.dt());
        for (node, v) in field.step(l).iter().enumerate() {
            let (j, k) = g.polar_azimuth(node);
            let p = pts[node];
            w.write_record([
                l.to_string(),
                j.to_string(),
                k.to_string(),
                t.clone(),
                num(p.x),
                num(p.y),
                num(p.z),
                num(*v),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_meta(line: &str) -> anyhow::Result<HashMap<String, String>> {
    let body = line.strip_prefix('#').context("field file must start with a '#' metadata line")?;
    let mut map = HashMap::new();
    for item in body.trim().split(',') {
        let (k, v) = item.split_once('=').with_context(|| format!("bad metadata entry {item:?}"))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn meta_value<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> anyhow::Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = map.get(key).with_context(|| format!("metadata is missing {key}"))?;
    raw.parse().map_err(|e| anyhow::anyhow!("metadata {key}={raw:?}: {e}"))
}

pub fn read_field(path: &Path) -> anyhow::Result<BoundaryField> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let meta = parse_meta(&first)?;
    let radius: f64 = meta_value(&meta, "R")?;
    let (jn, kn): (usize, usize) = (meta_value(&meta, "J")?, meta_value(&meta, "K")?);
    let dt: f64 = meta_value(&meta, "dt")?;
    let last: usize = meta_value(&meta, "L")?;
    let c: f64 = meta_value(&meta, "c")?;
    let grid = SphereGrid::new(radius, jn, kn)?;
    let n = grid.len();
    let n_steps = last + 1;
    let mut phi = vec![f64::NAN; n * n_steps];
    let mut rows = csv::Reader::from_reader(reader);
    let header = rows.headers()?.clone();
    ensure!(header.iter().eq(HEADER.iter().copied()), "unexpected field header {header:?}");
    for (line, rec) in rows.records().enumerate() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).with_context(|| format!("row {}: missing column {}", line + 3, HEADER[i]));
        let l: usize = get(0)?.parse()?;
        let j: usize = get(1)?.parse()?;
        let k: usize = get(2)?.parse()?;
        if l >= n_steps || j >= jn || k >= kn {
            bail!("row {}: index ({l},{j},{k}) outside the grid", line + 3);
        }
        phi[l * n + grid.index(j, k)] = get(7)?.parse()?;
    }
    if let Some(missing) = phi.iter().position(|v| v.is_nan()) {
        bail!("field file has no sample for step {} node {}", missing / n, missing % n);
    }
    let mut field = BoundaryField::from_samples(grid, dt, c, n_steps, phi)?;
    field.meta = FieldMeta {
        scenario_hash: meta.get("scenario_hash").cloned().unwrap_or_default(),
        noise_level: meta_value(&meta, "noise_level")?,
        seed: meta_value(&meta, "seed")?,
    };
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let g = SphereGrid::new(2.0, 3, 4).unwrap();
        let n = g.len();
        let phi: Vec<f64> = (0..n * 5).map(|i| (i as f64 * 0.37).sin() / 3.0).collect();
        let mut field = BoundaryField::from_samples(g, 0.1, 1.0, 5, phi).unwrap();
        field.meta = FieldMeta { scenario_hash: "abc".into(), noise_level: 0.005, seed: 9 };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        write_field(&path, &field).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back, field);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let g = SphereGrid::new(2.0, 2, 2).unwrap();
        let field = BoundaryField::zeros(g, 0.1, 1.0, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        write_field(&path, &field).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let cut: Vec<&str> = text.lines().collect();
        std::fs::write(&path, cut[..cut.len() - 1].join("\n")).unwrap();
        assert!(read_field(&path).unwrap_err().to_string().contains("no sample"));
    }
}
