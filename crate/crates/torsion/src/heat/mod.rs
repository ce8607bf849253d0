//! Heat traces, small-time expansions, the heat semigroup and its variation under
//! changes of the metric.

mod bounds;
mod convergence;
pub mod dense;
mod duhamel;
mod fit;
mod semigroup;
mod theta;
mod variation;

pub use bounds::{cos_half_integral, kernel_variation_constant, variation_bounds, BoundCheck, VariationReport};
pub use convergence::{semigroup_convergence, ConvergenceTable, MetricPair};
pub use duhamel::{duhamel_check, DuhamelLevel, DuhamelReport};
pub use fit::{fit_expansion, fit_function, Expansion, FitOptions, FitWindow};
pub use semigroup::HeatSemigroup;
pub use theta::{ThetaSeries, WeylLaw};
pub use variation::{duhamel_kernel, duhamel_kernel_quadrature, Variation, VariedPencil};

use crate::eigen::Spectrum;
use crate::error::Result;

/// Kernel-excluded heat trace of a spectrum at t.
pub fn theta(spec: &Spectrum, t: f64) -> Result<f64> {
    ThetaSeries::from_spectrum(spec)?.eval(t)
}
