//! Bartlett spectral measures, number variances and hyperuniformity verdicts
//! for invariant point processes and random distributions on Euclidean space
//! and the hyperbolic plane, cross-checked against seeded Monte Carlo.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaussdist;
pub mod geometry;
pub mod mclab;
pub mod heat;
pub mod io;
pub mod processes;
pub mod quad;
pub mod spectral;
pub mod specfun;
pub mod sphtransform;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
