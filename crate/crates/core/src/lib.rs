//! Numerical laboratory for Sobolev spaces on double cones.

// Parameter checks are written `!(p >= 1.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod checks;
pub mod config;
pub mod cz;
pub mod density;
pub mod dump;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod grid;
pub mod quad;
pub mod rearrangement;
pub mod report;

pub use error::{ConeError, Result};
