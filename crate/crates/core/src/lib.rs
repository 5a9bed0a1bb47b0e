//! CPU progressive-refinement radiosity baker for lightmaps.

pub mod cli;
pub mod error;
pub mod fixtures;
pub mod hemisampler;
pub mod io;
pub mod math;
pub mod metrics;
pub mod scene;
pub mod solver;
pub mod tracer;
pub mod uvraster;
pub mod voxel;

pub use error::{Error, Result};
