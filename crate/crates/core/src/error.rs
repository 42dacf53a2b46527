use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("division by (near) zero while evaluating an expression at t = {t}")]
    DivisionByZero { t: f64 },
    #[error("sample count mismatch: expected {expected}, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("retarded-time solve did not converge (t = {t}, residual = {residual:e})")]
    NoConvergence { t: f64, residual: f64 },
    #[error("evaluation point lies within {distance:e} of a source")]
    NearSource { distance: f64 },
    #[error("source at distance {distance} is outside the domain of radius {radius}")]
    SourceOutsideDomain { distance: f64, radius: f64 },
    #[error("source speed {speed} is not below the wave speed {c}")]
    Superluminal { speed: f64, c: f64 },
    #[error("time {t} is outside the recorded window [0, {t_max}]")]
    OutOfRange { t: f64, t_max: f64 },
    #[error("marching step {step} failed to converge (residual {residual:e})")]
    MarchDiverged { step: usize, residual: f64 },
    #[error("singular matrix ({0})")]
    Singular(&'static str),
    #[error("root finder did not converge")]
    RootFinding,
    #[error("eigenvalue residual check failed ({0:e})")]
    EigenResidual(f64),
    #[error("too few moments: need {need}, have {have}")]
    TooFewMoments { need: usize, have: usize },
    #[error("missing state for a correction term: {0}")]
    MissingState(&'static str),
    #[error("{0}")]
    Invalid(String),
}
