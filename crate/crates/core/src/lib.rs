//! Search-based motion planning for serial-chain manipulators.

// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod collision;
pub mod error;
pub mod fixtures;
pub mod heuristics;
pub mod kinematics;
pub mod lattice;
pub mod multirobot;
pub mod planner_api;
pub mod search;

pub use error::{Error, Result};
