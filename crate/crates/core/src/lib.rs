//! Block band random matrices: sampling, resolvent chains, fractional
//! moments, spectral statistics and a reproducible experiment harness.

pub mod ensemble;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod moments;
pub mod parallel;
pub mod resolvent;
pub mod rng;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};
