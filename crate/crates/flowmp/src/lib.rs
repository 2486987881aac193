//! Desk-scale laboratory for guided flow-matching sampling.
//!
//! The crate builds analytic data worlds (weighted labeled point clouds) whose
//! posterior means, ideal velocity fields, and smoothed distance potentials
//! have closed forms, then runs guided Euler samplers on top of them:
//!
//! - vanilla classifier-free guidance (`cfg`),
//! - guidance with an incremental manifold-projection phase per step
//!   (`cfg-mp`),
//! - the same with windowed Anderson acceleration of the projection
//!   fixed-point iteration (`cfg-mp-plus`).
//!
//! Because every expectation over a point cloud is an exact finite sum, the
//! identities the samplers rely on (ideal fields as loss minimizers, the
//! potential-gradient identity, the guidance error decomposition) are
//! directly checkable; see the `verify` module and the `examples/` directory.

pub mod anderson;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod projection;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod verify;
pub mod world;

pub use error::{Error, Result};
