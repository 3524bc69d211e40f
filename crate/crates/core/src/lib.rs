//! Numerical toolkit for harmonic maps into manifolds with boundary and the
//! associated scalar obstacle problems.

pub mod constraint_map;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod global2d;
pub mod obstacle;
pub mod polynomial;
pub mod potential;
pub mod regularity;
pub mod runner;

pub use error::{Error, Result};
