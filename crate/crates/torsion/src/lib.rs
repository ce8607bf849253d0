//! Spectra, heat traces and zeta-regularized determinants of Laplacians on
//! line bundles over the Riemann sphere with S¹-invariant metrics.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod eigen;
pub mod error;
pub mod heat;
pub mod linalg;
pub mod opcalc;
pub mod profiles;
pub mod quad;
pub mod zeta;

pub use error::{Error, Result};
