//! Multiscale spectral regression for areal data with unmeasured spatial
//! confounding.
//!
//! Data on a graph are projected onto the eigenvectors of the CAR structure
//! matrix. Exposure effects are allowed to vary smoothly over the eigenvalue
//! axis through a B-spline basis whose coefficients form a low-rank CP tensor
//! (basis x exposure x outcome) under horseshoe shrinkage. The most local
//! scale carries the adjusted estimate.

pub mod baselines;
pub mod car;
pub mod cp;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod sampler;
pub mod simulation;
pub mod spline;
pub mod study;
pub mod tensor;

pub use error::{ErrorCategory, MsmError, Result};
