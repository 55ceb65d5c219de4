//! Dimension-truncation error studies for elliptic PDEs with lognormal and
//! affine random coefficients.
//!
//! The crate combines a β-Gaussian distribution family, randomly shifted
//! rank-1 lattice rules, a P1 finite element solver on the unit square and
//! the study drivers that measure how fast the truncation error decays in
//! the number of retained parameters.

pub mod betagauss;
pub mod config;
pub mod error;
pub mod fem;
pub mod lattice;
pub mod randfield;
pub mod registry;
pub mod special;
pub mod study;

pub use error::{Error, Result};
