//! Synthetic facial tattoo toolkit.
//!
//! Landmark-driven placement of RGBA tattoo designs on face images, depth-map
//! displacement and multiply blending, paired dataset generation with
//! deterministic augmentation, full-reference removal-quality metrics and
//! biometric verification statistics.
//!
//! Batch work runs data-parallel on rayon when the `parallel` feature is on
//! (the default); every random draw comes from a stream keyed by the global
//! seed and the record it belongs to, so results never depend on the worker
//! count.

pub mod biometric;
pub mod blending;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod imaging;
pub mod placement;
pub mod quality;
pub mod rng;
pub mod synthetic;

mod nonfinite;

pub use error::{Error, Result};

/// Crate version, recorded in manifests and run banners.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
