//! Simulation core for heuristic search of amorphous target regions.
//!
//! The crate is organised bottom-up:
//!
//! - [`imgproc`]: binary and grayscale raster kernels (threshold, blur,
//!   closing, connected components, area resampling, PGM I/O).
//! - [`worldgen`]: procedural soil terrains.
//! - [`simenv`]: the episode state machine and the height-dependent
//!   observation model.
//! - [`policies`]: the two fixed search patterns and the centroid-seeking
//!   heuristic built on top of them.
//! - [`bench`]: the seeded, parallel Monte-Carlo harness and its CSV formats.

pub mod bench;
pub mod error;
pub mod imgproc;
pub mod policies;
pub mod seeds;
pub mod simenv;
pub mod worldgen;

pub use bench::{BenchConfig, SummaryRow, TrialRecord, TrialStatus};
pub use error::{Error, Result};
pub use imgproc::{BinaryImage, ComponentStats, GrayImage};
pub use policies::{Method, PolicyConfig};
pub use simenv::{Action, AgentState, EpisodeStatus, Observation, VisibilityModel};
pub use worldgen::{GenParams, TerrainMap};
