//! Uncertainty quantification for linear imaging inverse problems with a
//! total-variation prior and convex constraints.
//!
//! Three samplers share one forward model and one prior:
//! randomize-then-optimize (RTO), the Moreau-Yosida unadjusted Langevin
//! algorithm (MYULA), and a hierarchical Gibbs sampler over noise precision
//! and TV weight.

pub mod chain;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod image;
pub mod ops;
pub mod regularizers;
pub mod rng;
pub mod samplers;
pub mod scalar_demo;
pub mod solvers;

pub use error::{Error, Result};
pub use image::Image;
