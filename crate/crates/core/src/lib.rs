//! Primal-dual interior-point methods for bound-constrained convex problems,
//! with approximate Newton directions built from active-set estimates.

pub mod active_sets;
pub mod approx;
pub mod cli;
pub mod error;
pub mod harness;
pub mod ipm;
pub mod newton;
pub mod problem;
pub mod residual;
pub mod sparse;

pub use error::{Error, Result};
