//! File formats, signal processing, run configuration and batch commands
//! on top of `lambid-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod signal;

pub use error::{Error, Result};
pub use lambid_core;
