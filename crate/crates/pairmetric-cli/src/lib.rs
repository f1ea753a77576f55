//! Command-line harness for the pairwise multimodal metric-learning core:
//! dataset generation, metric training, risk and complexity estimation,
//! bound evaluation, experiment sweeps, verification suites, and plot-data
//! emission.
//!
//! Exposed as a library so the integration and acceptance tests drive the
//! same code paths as the binary.

pub mod demo;
pub mod error;
pub mod formats;
pub mod plot;
pub mod sweep;
pub mod verify;
