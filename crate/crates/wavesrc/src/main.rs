use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use wavesrc::commands::{
    apply_overrides, load_field_for, pipeline, reconstruct_field, report, resolve_scenario, simulate, write_reconstruction,
    Overrides, RunPaths,
};
use wavesrc::exec::RayonExecutor;
use wavesrc::field_file::write_field;
use wavesrc::report_file::format_table;
use wavesrc::scenario_file::parse_step4;
use wavesrc::verify::run_all;
use wavesrc_core::report::ErrorOptions;
use wavesrc_core::scenario::Scenario;

#[derive(Parser)]
#[command(name = "wavesrc", version, about = "Moving wave sources: boundary data synthesis and reconstruction")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Scenario JSON file or builtin name (point3, dipole3).
    #[arg(long)]
    scenario: String,
    /// Relative noise level, e.g. 0.005 for 0.5%.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dtau: Option<f64>,
    /// algebraic or finite_difference.
    #[arg(long)]
    step4: Option<String>,
    /// Largest source count K_M.
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    epsg: Option<f64>,
    /// Last reconstruction time.
    #[arg(long)]
    t_end: Option<f64>,
}

impl ScenarioArgs {
    fn load(&self) -> anyhow::Result<Scenario> {
        let mut scn = resolve_scenario(&self.scenario)?;
        let o = Overrides {
            noise: self.noise,
            seed: self.seed,
            dtau: self.dtau,
            step4: self.step4.as_deref().map(parse_step4).transpose()?,
            k_max: self.kmax,
            eps0: self.eps0,
            eps_g: self.epsg,
            t_end: self.t_end,
        };
        apply_overrides(&mut scn, &o)?;
        Ok(scn)
    }
}

#[derive(Subcommand)]
enum Command {
    /// March the forward problem and write the boundary field.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output field CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct sources from a field file.
    Reconstruct {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        field: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Also write the moment sequences.
        #[arg(long)]
        slices: bool,
    },
    /// simulate, reconstruct and report in one go.
    Pipeline {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        slices: bool,
    },
    /// Error tables and plot data for a reconstruction directory.
    Report {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Directory holding frames.csv; outputs go there too.
        #[arg(long)]
        out: PathBuf,
        /// Skip slices where the true strength is below 0.05.
        #[arg(long)]
        exclude_near_zero: bool,
    },
    /// Run the self-check suites.
    Verify {
        /// Shorter forward check.
        #[arg(long)]
        quick: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let exec = RayonExecutor::new(cli.threads)?;
    match cli.command {
        Command::Simulate { scenario, out } => {
            let scn = scenario.load()?;
            let (field, summary) = simulate(&scn, &exec)?;
            write_field(&out, &field)?;
            println!("{summary}");
            println!("wrote {}", out.display());
        }
        Command::Reconstruct { scenario, field, out, slices } => {
            let scn = scenario.load()?;
            let f = load_field_for(&field, &scn)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let rec = reconstruct_field(&f, &scn, &exec)?;
            write_reconstruction(&RunPaths::new(&out), &rec, scn.recon.k_max, slices)?;
            println!("{} slices, {} tracks; wrote {}", rec.frames.len(), rec.tracks.len(), out.display());
        }
        Command::Pipeline { scenario, out, slices } => {
            let scn = scenario.load()?;
            let (summary, table) = pipeline(&scn, &out, &exec, slices)?;
            println!("{summary}");
            print!("{}", format_table(&table, scn.kind()));
            println!("wrote {}", out.display());
        }
        Command::Report { scenario, out, exclude_near_zero } => {
            let scn = scenario.load()?;
            let table = report(&scn, &RunPaths::new(&out), ErrorOptions { exclude_near_zero, ..Default::default() })?;
            print!("{}", format_table(&table, scn.kind()));
        }
        Command::Verify { quick } => {
            let checks = run_all(&exec, quick)?;
            for c in &checks {
                println!("{c}");
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
