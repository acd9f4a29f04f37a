//! Structure-preserving time stepping for the inhomogeneous Doi model of
//! active rodlike suspensions in two space dimensions.
//!
//! The configuration density `ψ(x, φ)` lives on a cell-centred grid times an
//! equispaced orientation grid on the unit circle; the velocity lives on a
//! staggered (MAC) grid. Each time step solves a linearized Navier–Stokes
//! problem and a linearized Smoluchowski problem inside a Picard loop.
//!
//! Entry points: [`driver::Simulation`] for programmatic runs,
//! [`config::parse_config`] plus [`app::execute_run`] for file-driven runs,
//! and [`check::run_checks`] for the built-in invariant suites.

pub mod error;
pub mod grid;
pub mod field;
pub mod sparse;
pub mod krylov;
pub mod ops;
pub mod sphere;
pub mod regularization;
pub mod mollifier;
pub mod potential;
pub mod params;
pub mod flow;
pub mod smoluchowski;
pub mod diagnostics;
pub mod init;
pub mod driver;
pub mod output;
pub mod config;
pub mod check;
pub mod app;

pub use error::{Error, Result};
