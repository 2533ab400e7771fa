//! Single-layer QAOA and classical baselines for bounded-degree Boolean
//! constraint satisfaction problems.
//!
//! Conventions used throughout the crate:
//!
//! * Boolean values are spins `±1`. In truth tables and state-vector indices,
//!   bit `i` of the index holds coordinate `i` and a cleared bit means `+1`.
//! * Subsets of coordinates are `u64` bitmasks.
//! * Coordinates and variables are 0-based.
//! * Degree caps follow the "at most `D + 1` constraints per variable" rule;
//!   `D` is the excess degree that enters every `1/sqrt(D)` formula.

pub mod analytic;
pub mod boolfn;
pub mod csp;
pub mod error;
pub mod greedy;
pub mod qaoa;
pub mod rng;

pub use error::{Error, Result};
