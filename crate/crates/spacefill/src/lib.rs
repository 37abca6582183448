//! Adaptive k^d spacetree grids ordered by discrete space-filling curves, with
//! exact classification and surface-to-volume analysis of curve partitions.

pub mod error;
pub mod geometry;
pub mod spacetree;
pub mod sfc;
pub mod partition;
pub mod metrics;
pub mod generators;
pub mod analysis;
pub mod cli;

pub use error::{Error, Result};
