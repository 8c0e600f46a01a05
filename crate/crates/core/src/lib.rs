//! Reduced-order simulation of wheel-loader bucket filling.
//!
//! The crate is organised the way a loading campaign runs:
//!
//! - [`config`]: soil, pile, machine and control specifications, the factorial
//!   action grid and campaign manifests.
//! - [`terrain`]: planar height-field pile with wedge digging resistance,
//!   excavation bookkeeping and angle-of-repose relaxation.
//! - [`machine`]: longitudinal vehicle dynamics and the boom/bucket joints.
//! - [`controller`]: the force-triggered loading state machine.
//! - [`sim`]: one loading cycle from approach to reverse, plus metrics.
//! - [`sweep`]: parallel, resumable campaign execution.
//! - [`analysis`]: Pareto fronts, points of interest, histograms and trends.

pub mod analysis;
pub mod config;
pub mod controller;
pub mod error;
pub mod machine;
pub mod sim;
pub mod sweep;
pub mod terrain;

pub use error::{Error, Result};

/// Standard gravity (m/s²).
pub const GRAVITY: f64 = 9.81;
