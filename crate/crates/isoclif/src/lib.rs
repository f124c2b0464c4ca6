//! Clifford systems, isoparametric hypersurfaces of OT-FKM type, their
//! (almost) complex structures, and numerical integrability checks.
//!
//! The numeric kernels and Clifford constructions are generic over the
//! scalar; the geometry modules work in `f64`.

pub mod acs;
pub mod cli;
pub mod clifford;
pub mod error;
pub mod homog;
pub mod isopgeom;
pub mod nijenhuis;
pub mod numkernel;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod suite;

pub use error::{Error, Result};
pub use report::{Verdict, VerificationReport};
pub use scalar::{Real, Scalar};

pub type DenseMatrix = numkernel::Matrix<f64>;
pub type IntMatrix = numkernel::Matrix<i64>;
pub type Subspace = numkernel::Subspace<f64>;
