//! File formats, parallel execution and the command-line front end for
//! `wavesrc-core`.

pub mod commands;
pub mod exec;
pub mod field_file;
pub mod frames_file;
pub mod report_file;
pub mod scenario_file;
pub mod verify;

/// Float formatting for every CSV: round-trips exactly.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}
