//! Time-domain reconstruction of moving point and dipole sources of the 3-D
//! scalar wave equation from boundary measurements on a sphere.
//!
//! The crate is `no_std` (with `alloc`). Heavy loops are driven through the
//! [`exec::Executor`] trait so callers can plug in a thread pool.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod exec;
pub mod expr;
pub mod forward;
pub mod geom;
pub mod grid;
pub mod harmonic;
pub mod interp;
pub mod inversion;
pub mod linalg;
pub mod oracle;
pub mod pipeline;
pub mod poly;
pub mod report;
pub mod rgf;
pub mod scenario;
pub mod tracking;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
