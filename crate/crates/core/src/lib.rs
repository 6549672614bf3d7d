//! Lamb-wave dispersion curves of orthotropic plates by Legendre polynomial
//! expansion, and Bayesian identification of the elastic constants from
//! observed dispersion points.
//!
//! The crate is `no_std` with `alloc`. File formats, FFT-based signal
//! processing and the command-line front end live in the `lambid` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod bayes;
pub mod curves;
pub mod eigen;
pub mod error;
pub mod legendre;
pub mod material;
pub mod poly;
pub mod posterior;
pub mod sampler;
pub mod system;
pub mod wavefield;

pub use error::{AnalysisError, LegendreError, MaterialError, SamplerError, SignalError, SolverError};
pub use material::{ElasticConstants, EngineeringConstants, PlateSpec};
pub use nalgebra;
