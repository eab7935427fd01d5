//! Headless 2D crowd simulator with behavior-driven pedestrians, robot local
//! planners and a social-navigation metric evaluator.
// Negated comparisons are used on purpose so that NaN inputs fail the guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod behavior;
pub mod error;
pub mod geom;
pub mod metrics;
pub mod planner;
pub mod scenario;
pub mod sfm;
pub mod trace;
pub mod world;

pub use error::{Error, Result};
