//! Generalized eigenproblems Qx = λMx for tridiagonal pencils, merged spectra,
//! eigenvalue comparison across metric families and isoperimetric estimates.

mod cheeger;
mod family;
mod solver;
mod spectrum;

pub use cheeger::{cheeger_estimate, circle_length, tx_ratio_range, CheegerEstimate};
pub use family::{equivalence_range, lambda1_family, Lambda1Report, PairCheck};
pub use solver::{backward_error, count_below, eigenvalue, eigenvalues_below, eigenvector, m_dot, rayleigh, residual, solve_mode, Eigenpair};
pub use spectrum::{compute_spectrum, mode_operator, Group, Spectrum, SpectrumEntry, SpectrumOptions, KERNEL_THRESHOLD, MERGE_TOL};
