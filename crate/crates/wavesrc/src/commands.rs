//! The subcommands, as library functions so tests can drive them directly.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{ensure, Context};
use wavesrc_core::exec::Executor;
use wavesrc_core::forward::{add_noise, march_boundary_field, BoundaryField, MarchConfig};
use wavesrc_core::pipeline::{reconstruct, Reconstruction};
use wavesrc_core::report::{
    average_errors, count_accuracy, source_series, truth_intervals, truth_table, ErrorOptions, ErrorTable,
};
use wavesrc_core::scenario::{builtin, Scenario, Step4Mode};
use wavesrc_core::tracking::TrackerConfig;

use crate::field_file::{read_field, write_field};
use crate::frames_file::{read_frames, write_frames, write_slices, write_tracks};
use crate::report_file::{format_table, write_counts, write_dets, write_error_csv, write_series};
use crate::scenario_file::{load_scenario, scenario_hash};

/// Command-line overrides of scenario settings.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub dtau: Option<f64>,
    pub step4: Option<Step4Mode>,
    pub k_max: Option<usize>,
    pub eps0: Option<f64>,
    pub eps_g: Option<f64>,
    pub t_end: Option<f64>,
}

/// A builtin name (`point3`, `dipole3`) or a path to a scenario file.
pub fn resolve_scenario(arg: &str) -> anyhow::Result<Scenario> {
    if let Some(s) = builtin(arg) {
        return Ok(s);
    }
    load_scenario(Path::new(arg))
}

pub fn apply_overrides(scn: &mut Scenario, o: &Overrides) -> anyhow::Result<()> {
    if let Some(v) = o.noise {
        scn.noise_level = v;
    }
    if let Some(v) = o.seed {
        scn.rng_seed = v;
    }
    let r = &mut scn.recon;
    if let Some(v) = o.dtau {
        r.dtau = v;
    }
    if let Some(v) = o.step4 {
        r.step4_mode = v;
    }
    if let Some(v) = o.k_max {
        r.k_max = v;
    }
    if let Some(v) = o.eps0 {
        r.eps0 = v;
    }
    if let Some(v) = o.eps_g {
        r.eps_g = v;
    }
    if o.t_end.is_some() {
        r.t_end = o.t_end;
    }
    scn.validate().context("scenario rejected after overrides")?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SimulateSummary {
    pub steps: usize,
    pub nodes: usize,
    pub elapsed: Duration,
    /// Earliest time any signal can reach Γ.
    pub first_arrival: f64,
    /// Largest |φ| at samples before `first_arrival`; zero for a causal march.
    pub max_before_arrival: f64,
}

impl std::fmt::Display for SimulateSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "marched {} steps on {} nodes in {:.1} s; causality: max |phi| before t={:.3} is {:.3e}",
            self.steps,
            self.nodes,
            self.elapsed.as_secs_f64(),
            self.first_arrival,
            self.max_before_arrival
        )
    }
}

/// Earliest time a signal can reach the sphere: first nonzero strength
/// sample plus the shortest travel distance from any sampled position.
fn first_arrival(scn: &Scenario) -> anyhow::Result<f64> {
    let mut onset = f64::INFINITY;
    let mut reach = 0.0f64;
    for src in &scn.sources {
        for l in 0..scn.n_steps() {
            let t = l as f64 * scn.dt;
            let (p, s) = src.eval(t)?;
            reach = reach.max(p.norm());
            if !s.is_zero() && onset.is_infinite() {
                // The previous sample was still silent.
                onset = (t - scn.dt).max(0.0);
            }
        }
    }
    Ok(onset + (scn.grid.radius - reach) / scn.c)
}

/// Marches the scenario and applies its noise level.
pub fn simulate<E: Executor>(scn: &Scenario, exec: &E) -> anyhow::Result<(BoundaryField, SimulateSummary)> {
    let start = Instant::now();
    let grid = scn.grid.build()?;
    let clean = march_boundary_field(scn, &grid, &MarchConfig::default(), exec).context("forward march")?;
    let mut field = add_noise(&clean, scn.noise_level, scn.rng_seed).context("adding noise")?;
    field.meta.scenario_hash = scenario_hash(scn);
    let arrival = first_arrival(scn)?;
    let mut max_before = 0.0f64;
    for l in 0..clean.n_steps() {
        if (l as f64) * clean.dt() < arrival {
            max_before = clean.step(l).iter().fold(max_before, |m, v| m.max(v.abs()));
        }
    }
    let summary = SimulateSummary {
        steps: field.n_steps(),
        nodes: field.grid().len(),
        elapsed: start.elapsed(),
        first_arrival: arrival,
        max_before_arrival: max_before,
    };
    Ok((field, summary))
}

pub fn reconstruct_field<E: Executor>(field: &BoundaryField, scn: &Scenario, exec: &E) -> anyhow::Result<Reconstruction> {
    ensure!(
        (field.wave_speed() - scn.c).abs() <= 1e-12 * scn.c,
        "field wave speed {} differs from the scenario's {}",
        field.wave_speed(),
        scn.c
    );
    Ok(reconstruct(field, scn.kind(), &scn.recon, &TrackerConfig::default(), exec)?)
}

/// Output files of one run inside `dir`.
#[derive(Debug, Clone)]
pub struct RunPaths {
    pub field: PathBuf,
    pub frames: PathBuf,
    pub tracks: PathBuf,
    pub slices: PathBuf,
    pub errors_txt: PathBuf,
    pub errors_csv: PathBuf,
    pub series: PathBuf,
    pub dets: PathBuf,
    pub counts: PathBuf,
}

impl RunPaths {
    pub fn new(dir: &Path) -> Self {
        let p = |name: &str| dir.join(name);
        RunPaths {
            field: p("field.csv"),
            frames: p("frames.csv"),
            tracks: p("tracks.csv"),
            slices: p("slices.csv"),
            errors_txt: p("errors.txt"),
            errors_csv: p("errors.csv"),
            series: p("series.csv"),
            dets: p("dets.csv"),
            counts: p("counts.csv"),
        }
    }
}

pub fn write_reconstruction(paths: &RunPaths, rec: &Reconstruction, k_max: usize, with_slices: bool) -> anyhow::Result<()> {
    write_frames(&paths.frames, &rec.frames, k_max)?;
    write_tracks(&paths.tracks, &rec.tracks)?;
    if with_slices {
        write_slices(&paths.slices, &rec.slices)?;
    }
    Ok(())
}

/// Reads `frames.csv` from the run directory, compares with ground truth
/// and writes the error table and plot data. Returns the table.
pub fn report(scn: &Scenario, paths: &RunPaths, opts: ErrorOptions) -> anyhow::Result<ErrorTable> {
    let (frames, tracks) = read_frames(&paths.frames)?;
    let taus: Vec<f64> = frames.iter().map(|f| f.tau).collect();
    let truth = truth_table(scn, &taus)?;
    let intervals = truth_intervals(&taus, &truth);
    let table = average_errors(&tracks, &taus, &truth, &intervals, opts)?;
    let text = format_table(&table, scn.kind());
    std::fs::write(&paths.errors_txt, &text).with_context(|| format!("writing {}", paths.errors_txt.display()))?;
    write_error_csv(&paths.errors_csv, &table, scn.kind())?;
    write_series(&paths.series, &source_series(&tracks, &taus, &truth, &table.track_map))?;
    write_dets(&paths.dets, &frames, scn.recon.k_max)?;
    let k_hat: Vec<usize> = frames.iter().map(|f| f.k_hat).collect();
    write_counts(&paths.counts, &[(scn.noise_level, count_accuracy(&k_hat, &truth))])?;
    Ok(table)
}

/// simulate, reconstruct and report into `dir`.
pub fn pipeline<E: Executor>(scn: &Scenario, dir: &Path, exec: &E, with_slices: bool) -> anyhow::Result<(SimulateSummary, ErrorTable)> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let paths = RunPaths::new(dir);
    let (field, summary) = simulate(scn, exec)?;
    write_field(&paths.field, &field)?;
    let rec = reconstruct_field(&field, scn, exec)?;
    write_reconstruction(&paths, &rec, scn.recon.k_max, with_slices)?;
    let table = report(scn, &paths, ErrorOptions::default())?;
    Ok((summary, table))
}

/// Loads a field and warns when it came from a different scenario.
pub fn load_field_for(path: &Path, scn: &Scenario) -> anyhow::Result<BoundaryField> {
    let field = read_field(path)?;
    let expected = scenario_hash(scn);
    if !field.meta.scenario_hash.is_empty() && field.meta.scenario_hash != expected {
        eprintln!(
            "warning: {} was produced from scenario {} but the current scenario hashes to {}",
            path.display(),
            field.meta.scenario_hash,
            expected
        );
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use wavesrc_core::scenario::point3;

    #[test]
    fn overrides_are_validated() {
        let mut s = point3();
        apply_overrides(&mut s, &Overrides { noise: Some(0.01), dtau: Some(0.2), ..Default::default() }).unwrap();
        assert_eq!(s.noise_level, 0.01);
        assert_eq!(s.recon.dtau, 0.2);
        let err = apply_overrides(&mut s, &Overrides { noise: Some(-1.0), ..Default::default() });
        assert!(err.is_err());
    }

    #[test]
    fn builtin_names_resolve() {
        assert_eq!(resolve_scenario("dipole3").unwrap().name, "dipole3");
        assert!(resolve_scenario("/nonexistent/scenario.json").is_err());
    }

    #[test]
    fn arrival_of_point3() {
        // Source 1 switches on at t=4 from at most 1.6 away from the centre.
        let t = first_arrival(&point3()).unwrap();
        assert!(t > 3.9 && t < 4.5, "{t}");
    }
}
