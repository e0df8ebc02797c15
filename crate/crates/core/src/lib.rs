//! Manipulation planning for tethered tools hanging from an overhead tool balancer.
//!
//! The crate is `no_std` (it needs `alloc`). It provides:
//!
//! - [`geometry`]: vectors, rotation matrices and rigid poses.
//! - [`robot`]: a dual-arm, 6-DOF-per-arm kinematic model with forward kinematics,
//!   geometric Jacobian and damped-least-squares inverse kinematics.
//! - [`collision`]: capsule / sphere / box distance queries and the robot collision checker.
//! - [`cable`]: the cable bend-angle constraint and the straight-line cable obstacle.
//! - [`planner`]: grasp sampling, the regrasp graph with dual-arm handovers, lazy
//!   uniform-cost search and per-waypoint validation.
//! - [`torque`]: joint torques induced by the balancer cable along a plan.
//! - [`audit`]: an independent post-hoc re-check of emitted plans.
//!
//! File formats, the benchmark sweep and the command line live in the `tetherplan` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audit;
pub mod cable;
pub mod collision;
mod error;
pub mod geometry;
mod linalg;
mod math;
pub mod planner;
pub mod presets;
pub mod robot;
pub mod torque;

pub use error::Error;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;
