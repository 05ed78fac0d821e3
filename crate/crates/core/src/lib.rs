//! Hypersurfaces of `S^n x R` and `H^n x R`: compatibility equations,
//! reconstruction of immersions by moving frames, and the associate family
//! of minimal surfaces in `M^2 x R`.

pub mod ambient;
pub mod associate;
pub mod catalog;
pub mod chart;
pub mod dual;
pub mod error;
pub mod frames;
pub mod fundamental;
pub mod grid;
pub mod hopf;
pub mod io;

pub use error::{Error, Result};
