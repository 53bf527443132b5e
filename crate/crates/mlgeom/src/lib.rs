//! Likelihood geometry toolkit.
//!
//! Builds the likelihood critical equations of projective statistical models
//! and solves them by homotopy continuation. Linear, toric, rank and
//! ML-degree-one models additionally get exact or convex fast paths.

pub mod catalog;
pub mod critsys;
pub mod error;
pub mod horn;
pub mod linalg;
pub mod linmatroid;
pub mod mldeg;
pub mod poly;
pub mod rankdual;
pub mod rng;
pub mod toric;
pub mod tracker;

pub use error::{Error, Result};
pub use num::BigRational;
pub use num_complex::Complex64;

/// Complex double used throughout the numerical code.
pub type C64 = Complex64;
