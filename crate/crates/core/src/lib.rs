//! Joint-EKF cooperative localization for planar robot teams, with
//! communication-free landmark scheduling.
//!
//! Each robot estimates its 2D position from wheel odometry and a compass,
//! and refines it with relative range-bearing measurements of teammates.
//! The team belief is a stacked position estimate plus the full `2N x 2N`
//! joint covariance. When a robot may only process `q` measurements per
//! step, [`scheduling`] decides which teammates it should observe, either
//! from robot-local covariance blocks ([`scheduling::select_alg1`])
//! or with the baselines that need the whole joint covariance.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the Monte Carlo
//! driver and the command line live in the `coopsched` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod belief;
pub mod bounds;
mod error;
pub mod fusion;
pub mod kinematics;
pub mod linalg;
mod params;
pub mod scenario;
pub mod scheduling;
pub mod sensing;
pub mod streams;

#[cfg(test)]
pub(crate) mod testutil;

pub use belief::{JointBelief, Validity};
pub use error::{Error, Result};
pub use linalg::{Mat2, Vec2};
pub use params::SensorParams;
pub use scenario::{run_scenario, CooperativeFilter, RunTrace, ScenarioConfig};
pub use scheduling::Policy;

