//! Source scripts and run configuration.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::Expr;
use crate::geom::Vec3;
use crate::grid::SphereGrid;
use crate::{oracle, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Point,
    Dipole,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Point => "point",
            SourceKind::Dipole => "dipole",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrengthSpec {
    Point { q: Expr },
    /// In-plane moment; the z component is identically zero.
    Dipole { mx: Expr, my: Expr },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strength {
    Point(f64),
    Dipole { mx: f64, my: f64 },
}

impl Strength {
    /// q for points, m_x + i m_y for dipoles.
    pub fn as_complex(self) -> C64 {
        match self {
            Strength::Point(q) => C64::new(q, 0.0),
            Strength::Dipole { mx, my } => C64::new(mx, my),
        }
    }

    pub fn is_zero(self) -> bool {
        self.as_complex() == C64::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub position: [Expr; 3],
    pub strength: StrengthSpec,
}

impl SourceSpec {
    pub fn point(px: &str, py: &str, pz: &str, q: &str) -> Result<Self> {
        Ok(SourceSpec {
            position: [Expr::parse(px)?, Expr::parse(py)?, Expr::parse(pz)?],
            strength: StrengthSpec::Point { q: Expr::parse(q)? },
        })
    }

    pub fn dipole(px: &str, py: &str, pz: &str, mx: &str, my: &str) -> Result<Self> {
        Ok(SourceSpec {
            position: [Expr::parse(px)?, Expr::parse(py)?, Expr::parse(pz)?],
            strength: StrengthSpec::Dipole { mx: Expr::parse(mx)?, my: Expr::parse(my)? },
        })
    }

    pub fn kind(&self) -> SourceKind {
        match self.strength {
            StrengthSpec::Point { .. } => SourceKind::Point,
            StrengthSpec::Dipole { .. } => SourceKind::Dipole,
        }
    }

    pub fn position(&self, t: f64) -> Result<Vec3> {
        Ok(Vec3::new(
            self.position[0].eval(t)?,
            self.position[1].eval(t)?,
            self.position[2].eval(t)?,
        ))
    }

    pub fn velocity(&self, t: f64) -> Result<Vec3> {
        Ok(Vec3::new(
            self.position[0].derivative(t)?,
            self.position[1].derivative(t)?,
            self.position[2].derivative(t)?,
        ))
    }

    pub fn position_velocity(&self, t: f64) -> Result<(Vec3, Vec3)> {
        let (x, vx) = self.position[0].eval_dual(t)?;
        let (y, vy) = self.position[1].eval_dual(t)?;
        let (z, vz) = self.position[2].eval_dual(t)?;
        Ok((Vec3::new(x, y, z), Vec3::new(vx, vy, vz)))
    }

    pub fn strength(&self, t: f64) -> Result<Strength> {
        Ok(match &self.strength {
            StrengthSpec::Point { q } => Strength::Point(q.eval(t)?),
            StrengthSpec::Dipole { mx, my } => Strength::Dipole { mx: mx.eval(t)?, my: my.eval(t)? },
        })
    }

    pub fn eval(&self, t: f64) -> Result<(Vec3, Strength)> {
        Ok((self.position(t)?, self.strength(t)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub radius: f64,
    pub n_polar: usize,
    pub n_azimuth: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<SphereGrid> {
        SphereGrid::new(self.radius, self.n_polar, self.n_azimuth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step4Mode {
    Algebraic,
    FiniteDifference,
}

impl Step4Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Step4Mode::Algebraic => "algebraic",
            Step4Mode::FiniteDifference => "finite_difference",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconConfig {
    pub dtau: f64,
    pub k_max: usize,
    pub eps0: f64,
    pub eps_g: f64,
    pub step4_mode: Step4Mode,
    /// Last reconstruction time; `None` means as far as the data allows.
    pub t_end: Option<f64>,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            dtau: 0.1,
            k_max: 4,
            eps0: 1e-4,
            eps_g: 2.5e-2,
            step4_mode: Step4Mode::Algebraic,
            t_end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub c: f64,
    pub horizon: f64,
    pub dt: f64,
    pub grid: GridSpec,
    pub noise_level: f64,
    pub rng_seed: u64,
    pub sources: Vec<SourceSpec>,
    pub recon: ReconConfig,
}

/// Sampling step for the trajectory checks in [`Scenario::validate`].
const CHECK_STEP: f64 = 0.01;

impl Scenario {
    /// Kind shared by all sources (point when the list is empty).
    pub fn kind(&self) -> SourceKind {
        self.sources.first().map_or(SourceKind::Point, SourceSpec::kind)
    }

    /// Number of samples L+1 on [0, T].
    pub fn n_steps(&self) -> usize {
        libm::round(self.horizon / self.dt) as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.c > 0.0) {
            return bad(format!("wave speed must be positive, got {}", self.c));
        }
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return bad(format!("need dt > 0 and T > 0, got dt={}, T={}", self.dt, self.horizon));
        }
        let steps = self.horizon / self.dt;
        if libm::fabs(steps - libm::round(steps)) > 1e-9 * steps.max(1.0) {
            return bad(format!("T={} is not a multiple of dt={}", self.horizon, self.dt));
        }
        let grid = self.grid.build()?;
        let r = grid.radius();
        if !(self.horizon > 4.0 * r / self.c) {
            return bad(format!("horizon T={} must exceed 2·diam/c = {}", self.horizon, 4.0 * r / self.c));
        }
        if !(self.noise_level >= 0.0) {
            return bad(format!("noise level must be non-negative, got {}", self.noise_level));
        }
        let rc = &self.recon;
        if !(rc.dtau > 0.0) || rc.k_max == 0 || !(rc.eps0 > 0.0) || !(rc.eps_g > 0.0) {
            return bad(format!(
                "reconstruction needs dtau>0, K_M≥1, eps0>0, epsG>0 (got {}, {}, {}, {})",
                rc.dtau, rc.k_max, rc.eps0, rc.eps_g
            ));
        }
        let kind = self.kind();
        if self.sources.iter().any(|s| s.kind() != kind) {
            return bad("point and dipole sources cannot be mixed".into());
        }
        for (idx, src) in self.sources.iter().enumerate() {
            if !src.strength(0.0)?.is_zero() {
                return bad(format!("source {} must start from rest (nonzero strength at t=0)", idx + 1));
            }
        }
        let n = libm::ceil(self.horizon / CHECK_STEP) as usize;
        for (idx, src) in self.sources.iter().enumerate() {
            for i in 0..=n {
                let t = (i as f64 * CHECK_STEP).min(self.horizon);
                let p = src.position(t)?;
                if p.norm() >= r {
                    return bad(format!("source {} leaves the ball at t={t} (|p|={})", idx + 1, p.norm()));
                }
                let v = src.velocity(t)?.norm();
                if v >= self.c {
                    return bad(format!("source {} moves at speed {v} ≥ c at t={t}", idx + 1));
                }
                src.strength(t)?;
            }
        }
        Ok(())
    }

    /// Emission time t_k(τ) of source `k`.
    pub fn emission_time(&self, k: usize, tau: f64) -> Result<f64> {
        oracle::emission_time(&self.sources[k], tau, self.c)
    }

    /// Sources with nonzero strength at their emission time for slice τ.
    pub fn active_sources(&self, tau: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for k in 0..self.sources.len() {
            let t = self.emission_time(k, tau)?;
            if !self.sources[k].strength(t)?.is_zero() {
                out.push(k);
            }
        }
        Ok(out)
    }

    pub fn true_count(&self, tau: f64) -> Result<usize> {
        Ok(self.active_sources(tau)?.len())
    }
}

fn benchmark_recon() -> ReconConfig {
    ReconConfig { t_end: Some(60.0), ..ReconConfig::default() }
}

fn benchmark_grid() -> GridSpec {
    GridSpec { radius: 2.0, n_polar: 18, n_azimuth: 36 }
}

const P1: [&str; 3] = ["0.8", "-0.3", "0.8*cos(0.4*t)-0.2"];
const P2: [&str; 3] = [
    "sin(-0.2*(t+2.5))+0.3",
    "0.7*sin(0.4*(t+2.5))-0.2",
    "0.5*sin(0.5*(t+2.5))+0.2",
];
const P3: [&str; 3] = [
    "0.9*cos(0.2*pi)*cos(-0.3*(t+2.7))-0.15*sin(0.2*pi)*sin(-0.3*(t+2.7))-0.5",
    "0.9*sin(0.2*pi)*cos(-0.3*(t+2.7))+0.15*cos(0.2*pi)*sin(-0.3*(t+2.7))+0.6",
    "0.8*sin(-0.25*(t+2.7))",
];

/// Three moving point sources with ramped magnitudes.
pub fn point3() -> Scenario {
    let src = |p: [&str; 3], q: &str| SourceSpec::point(p[0], p[1], p[2], q).expect("builtin expression");
    Scenario {
        name: "point3".into(),
        c: 1.0,
        horizon: 70.0,
        dt: 0.1,
        grid: benchmark_grid(),
        noise_level: 0.0,
        rng_seed: 1,
        sources: alloc::vec![
            src(P1, "eta((t-4)/10)*(1-eta((t-35)/20))*(1+0.7*sin(2*pi*t/7))"),
            src(P2, "eta((t-10)/12)*(1-eta((t-50)/20))*sin(2*pi*(t-4)/12)"),
            src(P3, "-1.5*eta((t-25)/7)*(1-eta((t-34)/10))"),
        ],
        recon: benchmark_recon(),
    }
}

/// Three in-plane dipoles on the same trajectories as [`point3`].
pub fn dipole3() -> Scenario {
    let src = |p: [&str; 3], mx: &str, my: &str| {
        SourceSpec::dipole(p[0], p[1], p[2], mx, my).expect("builtin expression")
    };
    Scenario {
        name: "dipole3".into(),
        c: 1.0,
        horizon: 70.0,
        dt: 0.1,
        grid: benchmark_grid(),
        noise_level: 0.0,
        rng_seed: 1,
        sources: alloc::vec![
            src(
                P1,
                "0.5*eta((t-2)/7)*(1-eta((t-32)/9))*cos(2*pi*t/10)",
                "0.5*eta((t-2)/7)*(1-eta((t-32)/9))*sin(2*pi*t/10)",
            ),
            src(
                P2,
                "eta((t-7)/5)*(0.6-0.2*cos(2*pi*(t-7)/15))*sin(-2*pi*t/11)",
                "eta((t-7)/5)*(0.6-0.2*cos(2*pi*(t-7)/15))*cos(-2*pi*t/11)",
            ),
            src(
                P3,
                "eta((t-18)/8)*(1-eta((t-45)/9))*cos(2*pi*t/8)",
                "eta((t-18)/8)*(1-eta((t-45)/9))*sin(2*pi*t/8)",
            ),
        ],
        recon: benchmark_recon(),
    }
}

pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "point3" => Some(point3()),
        "dipole3" => Some(dipole3()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn point_source_one_at_start() {
        let s = point3();
        let (p, q) = s.sources[0].eval(0.0).unwrap();
        assert!((p - Vec3::new(0.8, -0.3, 0.6)).norm() < 1e-15);
        assert_eq!(q, Strength::Point(0.0));
    }

    #[test]
    fn point_source_three_plateau() {
        let s = point3();
        assert_eq!(s.sources[2].strength(33.0).unwrap(), Strength::Point(-1.5));
    }

    #[test]
    fn dipole_source_one_at_twenty() {
        let s = dipole3();
        let m = s.sources[0].strength(20.0).unwrap().as_complex();
        let expect = C64::new(0.5 * libm::cos(4.0 * PI), 0.5 * libm::sin(4.0 * PI));
        assert!((m - expect).norm() < 1e-14);
    }

    #[test]
    fn builtins_validate() {
        point3().validate().unwrap();
        dipole3().validate().unwrap();
    }

    #[test]
    fn ground_truth_counts() {
        assert_eq!(point3().true_count(30.0).unwrap(), 3);
        assert_eq!(dipole3().true_count(1.0).unwrap(), 0);
        assert_eq!(point3().true_count(5.0).unwrap(), 1);
        assert_eq!(point3().true_count(50.0).unwrap(), 2);
    }

    #[test]
    fn point3_speeds() {
        let s = point3();
        let mut vmax = [0.0f64; 3];
        for i in 0..=70_000 {
            let t = i as f64 * 1e-3;
            for (k, src) in s.sources.iter().enumerate() {
                vmax[k] = vmax[k].max(src.velocity(t).unwrap().norm());
            }
        }
        // The bound 0.425 is stated to three digits.
        assert!(libm::round(vmax[1] * 1000.0) <= 425.0, "{vmax:?}");
        assert!(vmax.iter().all(|&v| v < s.c));
    }

    #[test]
    fn validation_rejects() {
        let mut s = point3();
        s.horizon = 7.0;
        assert!(s.validate().is_err());
        let mut s = point3();
        s.sources.push(SourceSpec::point("1.99*cos(t)", "0", "0.5", "1").unwrap());
        assert!(s.validate().is_err());
        let mut s = point3();
        s.sources.push(dipole3().sources[0].clone());
        assert!(s.validate().is_err());
        let mut s = point3();
        s.sources.push(SourceSpec::point("0.9*sin(1.2*t)", "0", "0", "1").unwrap());
        assert!(s.validate().is_err());
    }
}
