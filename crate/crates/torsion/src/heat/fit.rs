use super::ThetaSeries;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Fit window [τ, span·τ].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitWindow {
    pub tau: f64,
    pub span: f64,
}

impl FitWindow {
    /// Multiple of 1/Λ where truncated spectra are fitted; the tail is then O(e^{−25})·θ.
    pub const TRUNCATED_SCALE: f64 = 25.0;
    /// Multiple of 1/λ_max for complete finite spectra, where θ is analytic at 0.
    pub const COMPLETE_SCALE: f64 = 0.01;

    pub fn new(tau: f64, span: f64) -> Result<Self> {
        if !(tau > 0.0 && span > 1.0) {
            return Err(Error::Invalid { what: "window", why: format!("need τ > 0 and span > 1, got {tau}, {span}") });
        }
        Ok(Self { tau, span })
    }

    pub fn for_theta(theta: &ThetaSeries) -> Self {
        let tau = match theta.cutoff() {
            Some(c) => Self::TRUNCATED_SCALE / c,
            None => Self::COMPLETE_SCALE / theta.lambdas().last().copied().unwrap_or(1.0),
        };
        Self { tau, span: 8.0 }
    }

    /// Common window for a family: the most restrictive member decides.
    pub fn for_family(thetas: &[ThetaSeries]) -> Self {
        thetas.iter().map(Self::for_theta).fold(Self { tau: 0.0, span: 8.0 }, |a, b| if b.tau > a.tau { b } else { a })
    }

    fn doubled(self) -> Self {
        Self { tau: 2.0 * self.tau, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitOptions {
    /// Include t^{1/2}, t^{3/2} in the basis.
    pub half_powers: bool,
    /// Combine fits on [τ, sτ] and [2τ, 2sτ].
    pub richardson: bool,
    pub samples: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { half_powers: false, richardson: true, samples: 48 }
    }
}

/// θ(t) ≈ b₋₁/t + b₀ + Σ c_j t^{β_j} near t = 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expansion {
    pub b_minus1: f64,
    pub b0: f64,
    /// (β_j, c_j) for the positive powers.
    pub higher: Vec<(f64, f64)>,
    /// RMS relative residual of the fit on the first window.
    pub residual: f64,
    pub window: FitWindow,
    /// Difference of (b₋₁, b₀) between the two windows before extrapolation.
    pub window_spread: (f64, f64),
}

impl Expansion {
    /// The fitted part b₋₁/t + b₀ + Σ c_j t^{β_j}.
    pub fn model(&self, t: f64) -> f64 {
        self.b_minus1 / t + self.b0 + self.higher_part(t)
    }

    pub fn higher_part(&self, t: f64) -> f64 {
        self.higher.iter().map(|(b, c)| c * t.powf(*b)).sum()
    }
}

fn exponents(opts: &FitOptions) -> Vec<f64> {
    if opts.half_powers {
        vec![-1.0, 0.0, 0.5, 1.0, 1.5, 2.0]
    } else {
        vec![-1.0, 0.0, 1.0, 2.0]
    }
}

/// Weighted least squares on log-spaced samples, relative error weights.
fn fit_once(f: &dyn Fn(f64) -> f64, window: FitWindow, betas: &[f64], samples: usize) -> Result<(Vec<f64>, f64)> {
    let n = samples.max(betas.len() + 4);
    let ts: Vec<f64> = (0..n).map(|i| window.tau * window.span.powf(i as f64 / (n - 1) as f64)).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let a = DMatrix::from_fn(n, betas.len(), |i, j| (ts[i] / window.tau).powf(betas[j]) / ys[i].abs().max(f64::MIN_POSITIVE));
    let b = DVector::from_fn(n, |i, _| ys[i].signum());
    let svd = a.clone().svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > 1e-12 * smax) {
        return Err(Error::IllConditioned(format!("singular values {smax:e} / {smin:e}")));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::IllConditioned(e.to_string()))?;
    let r = &a * &x - &b;
    let coeffs = betas.iter().enumerate().map(|(j, &beta)| x[j] / window.tau.powf(beta)).collect();
    Ok((coeffs, (r.norm_squared() / n as f64).sqrt()))
}

pub fn fit_expansion(theta: &ThetaSeries, window: FitWindow, opts: FitOptions) -> Result<Expansion> {
    fit_function(&|t| theta.sum(t), window, opts)
}

/// Same fit for an arbitrary function of t.
pub fn fit_function(f: &dyn Fn(f64) -> f64, window: FitWindow, opts: FitOptions) -> Result<Expansion> {
    let betas = exponents(&opts);
    let (c1, residual) = fit_once(f, window, &betas, opts.samples)?;
    let (coeffs, spread) = if opts.richardson {
        let (c2, _) = fit_once(f, window.doubled(), &betas, opts.samples)?;
        // error in the coefficient of t^β from the first omitted power t^γ scales like τ^{γ−β}
        let gamma = if opts.half_powers { 2.5 } else { 3.0 };
        let c = betas
            .iter()
            .enumerate()
            .map(|(j, &beta)| {
                let r = 2f64.powf(gamma - beta);
                (r * c1[j] - c2[j]) / (r - 1.0)
            })
            .collect::<Vec<_>>();
        (c, (c1[0] - c2[0], c1[1] - c2[1]))
    } else {
        (c1, (0.0, 0.0))
    };
    Ok(Expansion {
        b_minus1: coeffs[0],
        b0: coeffs[1],
        higher: betas[2..].iter().copied().zip(coeffs[2..].iter().copied()).collect(),
        residual,
        window,
        window_spread: spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_spectrum_calibration() {
        // θ(t) = 1/(e^t − 1) = 1/t − 1/2 + t/12 − …
        let lam: Vec<f64> = (1..=100_000).map(|j| j as f64).collect();
        let th = ThetaSeries::new(lam, Some(100_000.5)).unwrap();
        let e = fit_expansion(&th, FitWindow::for_theta(&th), FitOptions::default()).unwrap();
        assert!((e.b_minus1 - 1.0).abs() < 1e-6, "{}", e.b_minus1);
        assert!((e.b0 + 0.5).abs() < 1e-6, "{}", e.b0);
    }

    #[test]
    fn exact_function_is_recovered() {
        let f = |t: f64| 2.0 / t + 0.25 - 0.5 * t + 0.1 * t * t;
        let e = fit_function(&f, FitWindow::new(0.01, 8.0).unwrap(), FitOptions::default()).unwrap();
        assert!((e.b_minus1 - 2.0).abs() < 1e-10 && (e.b0 - 0.25).abs() < 1e-10);
        assert!(e.residual < 1e-12);
    }

    #[test]
    fn degenerate_window_is_rejected() {
        let f = |t: f64| 1.0 / t;
        assert!(FitWindow::new(0.0, 8.0).is_err());
        let w = FitWindow::new(1.0, 1.0 + 1e-15);
        assert!(w.is_err() || fit_function(&f, w.unwrap(), FitOptions::default()).is_err());
    }
}
