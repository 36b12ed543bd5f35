//! Online optimal power flow pursuit on distribution feeders.
//!
//! Inverter setpoints are driven toward the solution of a time-varying
//! convex surrogate of AC optimal power flow by a projected primal-dual
//! controller that reads voltage measurements from the plant, here an AC
//! power-flow solve. The crate provides the feeder model, the AC solver and
//! its linearization, the controllers, a Volt/VAr droop baseline, the
//! closed-loop simulator and the certification of the tracking bound.
//!
//! Per-unit quantities throughout. Injections are positive, loads are
//! positive when consuming, and reactive absorption is negative.

pub mod baseline;
pub mod cases;
pub mod cli;
pub mod config;
pub mod controller;
pub mod feeder;
pub mod powerflow;
pub mod sim;

use std::path::PathBuf;

use thiserror::Error;

/// Complex scalar used for phasors, admittances and impedances.
pub type C64 = nalgebra::Complex<f64>;

/// File and format errors.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}
