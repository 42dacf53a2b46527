//! JSON scenario files.
//!
//! ```json
//! {
//!   "name": "point3", "c": 1.0, "T": 70.0, "dt": 0.1,
//!   "grid": {"R": 2.0, "J": 18, "K": 36},
//!   "noise_level": 0.0, "rng_seed": 1,
//!   "sources": [{"kind": "point", "px": "0.8", "py": "-0.3", "pz": "0.8*cos(0.4*t)-0.2", "q": "..."}],
//!   "recon": {"dtau": 0.1, "K_M": 4, "eps0": 1e-4, "epsG": 2.5e-2, "step4_mode": "algebraic", "t_end": 60.0}
//! }
//! ```
//! Dipole sources carry `mx` and `my` instead of `q`.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wavesrc_core::expr::Expr;
use wavesrc_core::scenario::{GridSpec, ReconConfig, Scenario, SourceSpec, Step4Mode, StrengthSpec};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    pub c: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    pub grid: GridFile,
    #[serde(default)]
    pub noise_level: f64,
    #[serde(default)]
    pub rng_seed: u64,
    pub sources: Vec<SourceFile>,
    #[serde(default)]
    pub recon: ReconFile,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridFile {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "J")]
    pub n_polar: usize,
    #[serde(rename = "K")]
    pub n_azimuth: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SourceFile {
    pub kind: String,
    pub px: String,
    pub py: String,
    pub pz: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mx: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub my: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReconFile {
    pub dtau: f64,
    #[serde(rename = "K_M")]
    pub k_max: usize,
    pub eps0: f64,
    #[serde(rename = "epsG")]
    pub eps_g: f64,
    pub step4_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

impl Default for ReconFile {
    fn default() -> Self {
        ReconFile::from(&ReconConfig::default())
    }
}

impl From<&ReconConfig> for ReconFile {
    fn from(r: &ReconConfig) -> Self {
        ReconFile {
            dtau: r.dtau,
            k_max: r.k_max,
            eps0: r.eps0,
            eps_g: r.eps_g,
            step4_mode: r.step4_mode.as_str().to_string(),
            t_end: r.t_end,
        }
    }
}

pub fn parse_step4(s: &str) -> anyhow::Result<Step4Mode> {
    match s {
        "algebraic" => Ok(Step4Mode::Algebraic),
        "finite_difference" | "fd" => Ok(Step4Mode::FiniteDifference),
        other => bail!("unknown step4 mode {other:?} (expected algebraic or finite_difference)"),
    }
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario) -> Self {
        let text = |e: &Expr| e.to_string();
        let sources = s
            .sources
            .iter()
            .map(|src| {
                let [px, py, pz] = &src.position;
                let mut f = SourceFile {
                    kind: src.kind().as_str().to_string(),
                    px: text(px),
                    py: text(py),
                    pz: text(pz),
                    q: None,
                    mx: None,
                    my: None,
                };
                match &src.strength {
                    StrengthSpec::Point { q } => f.q = Some(text(q)),
                    StrengthSpec::Dipole { mx, my } => {
                        f.mx = Some(text(mx));
                        f.my = Some(text(my));
                    }
                }
                f
            })
            .collect();
        ScenarioFile {
            name: s.name.clone(),
            c: s.c,
            horizon: s.horizon,
            dt: s.dt,
            grid: GridFile { radius: s.grid.radius, n_polar: s.grid.n_polar, n_azimuth: s.grid.n_azimuth },
            noise_level: s.noise_level,
            rng_seed: s.rng_seed,
            sources,
            recon: ReconFile::from(&s.recon),
        }
    }

    pub fn to_scenario(&self) -> anyhow::Result<Scenario> {
        let mut sources = Vec::with_capacity(self.sources.len());
        for (i, f) in self.sources.iter().enumerate() {
            let ctx = || format!("source {i}");
            let need = |v: &Option<String>, field: &str| -> anyhow::Result<String> {
                v.clone().with_context(|| format!("source {i} ({}) is missing {field}", f.kind))
            };
            let spec = match f.kind.as_str() {
                "point" => SourceSpec::point(&f.px, &f.py, &f.pz, &need(&f.q, "q")?),
                "dipole" => SourceSpec::dipole(&f.px, &f.py, &f.pz, &need(&f.mx, "mx")?, &need(&f.my, "my")?),
                other => bail!("source {i}: unknown kind {other:?}"),
            }
            .with_context(ctx)?;
            sources.push(spec);
        }
        let scn = Scenario {
            name: self.name.clone(),
            c: self.c,
            horizon: self.horizon,
            dt: self.dt,
            grid: GridSpec { radius: self.grid.radius, n_polar: self.grid.n_polar, n_azimuth: self.grid.n_azimuth },
            noise_level: self.noise_level,
            rng_seed: self.rng_seed,
            sources,
            recon: ReconConfig {
                dtau: self.recon.dtau,
                k_max: self.recon.k_max,
                eps0: self.recon.eps0,
                eps_g: self.recon.eps_g,
                step4_mode: parse_step4(&self.recon.step4_mode)?,
                t_end: self.recon.t_end,
            },
        };
        Ok(scn)
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> anyhow::Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ScenarioFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let scn = file.to_scenario()?;
    scn.validate().with_context(|| format!("validating {}", path.display()))?;
    Ok(scn)
}

pub fn scenario_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_scenario(s)).expect("scenario serializes")
}

/// First 16 hex digits of the SHA-256 of the compact JSON form.
pub fn scenario_hash(s: &Scenario) -> String {
    let compact = serde_json::to_vec(&ScenarioFile::from_scenario(s)).expect("scenario serializes");
    hex::encode(&Sha256::digest(&compact)[..8])
}
