use crate::eigen::Spectrum;
use crate::error::{invalid, Result};
use serde::Serialize;

/// Power law N(λ) ≈ c·λ^α for the eigenvalue counting function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeylLaw {
    pub c: f64,
    pub alpha: f64,
}

/// Heat trace over positive eigenvalues, complete below `cutoff`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaSeries {
    lambdas: Vec<f64>,
    /// None for a complete (finite) spectrum.
    cutoff: Option<f64>,
    weyl: Option<WeylLaw>,
}

impl ThetaSeries {
    /// `cutoff`: the resolved spectrum is complete below it; None if the list is the whole spectrum.
    pub fn new(mut lambdas: Vec<f64>, cutoff: Option<f64>) -> Result<Self> {
        if lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return invalid("lambdas", "eigenvalues must be positive and finite");
        }
        if lambdas.is_empty() {
            return invalid("lambdas", "empty spectrum");
        }
        lambdas.sort_by(f64::total_cmp);
        let weyl = match cutoff {
            Some(c) if c.is_finite() => {
                if lambdas.last().is_some_and(|&l| l >= c) {
                    return invalid("cutoff", "eigenvalues must lie below the cutoff");
                }
                fit_weyl(&lambdas, c)
            }
            _ => None,
        };
        Ok(Self { lambdas, cutoff: cutoff.filter(|c| c.is_finite()), weyl })
    }

    /// Kernel-excluded heat trace of a computed spectrum.
    pub fn from_spectrum(spec: &Spectrum) -> Result<Self> {
        Self::new(spec.positive(), Some(spec.cutoff))
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    pub fn weyl(&self) -> Option<WeylLaw> {
        self.weyl
    }

    pub fn lambda1(&self) -> f64 {
        self.lambdas[0]
    }

    /// Σ e^{−λt} over the resolved eigenvalues.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return invalid("t", format!("need t > 0, got {t}"));
        }
        Ok(self.sum(t))
    }

    pub(crate) fn sum(&self, t: f64) -> f64 {
        // ascending order: stop once terms are below round-off of the partial sum
        let mut s = 0.0;
        for &l in &self.lambdas {
            let e = (-l * t).exp();
            if e < 1e-18 * s {
                break;
            }
            s += e;
        }
        s
    }

    /// Estimate of Σ_{λ ≥ Λ} e^{−λt} from the Weyl fit: c·α·t^{−α}·Γ(α, Λt).
    pub fn tail_bound(&self, t: f64) -> f64 {
        match (self.cutoff, self.weyl) {
            (Some(cap), Some(WeylLaw { c, alpha })) => {
                let x = cap * t;
                let upper = statrs::function::gamma::gamma_ur(alpha, x) * statrs::function::gamma::gamma(alpha);
                c * alpha * t.powf(-alpha) * upper
            }
            _ => 0.0,
        }
    }
}

/// Least squares of log N(λ) on log λ over [Λ/4, Λ).
fn fit_weyl(lambdas: &[f64], cap: f64) -> Option<WeylLaw> {
    let lo = 0.25 * cap;
    let pts: Vec<(f64, f64)> = lambdas
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= lo)
        .map(|(i, &l)| (l.ln(), ((i + 1) as f64).ln()))
        .collect();
    if pts.len() < 8 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let alpha = sxy / sxx;
    Some(WeylLaw { c: (my - alpha * mx).exp(), alpha })
}
