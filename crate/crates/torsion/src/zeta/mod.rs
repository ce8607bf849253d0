//! Spectral zeta functions: direct sums for Re s > 1, the Mellin continuation
//! through the small-time expansion, ζ′(0) and its limit along metric families.

mod limit;

pub use limit::{torsion_limit, TorsionLimit};

use crate::error::{invalid, Error, Result};
use crate::heat::{fit_expansion, Expansion, FitOptions, FitWindow, ThetaSeries};
use crate::quad::{self, exp_int_e1, EULER_GAMMA};
use serde::Serialize;

/// Smallest admissible s for the direct sum.
pub const MIN_DIRECT_S: f64 = 1.05;
/// Fits with a larger RMS relative residual are refused.
pub const MAX_FIT_RESIDUAL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaValue {
    pub s: f64,
    pub value: f64,
    /// Weyl-law estimate of Σ_{λ ≥ Λ} λ^{−s}, included in `value`.
    pub tail: f64,
}

/// Σ λ^{−s} over the resolved eigenvalues plus the Weyl tail c·α·Λ^{α−s}/(s−α).
pub fn zeta_at(theta: &ThetaSeries, s: f64) -> Result<ZetaValue> {
    if !(s > MIN_DIRECT_S) {
        return invalid("s", format!("the direct sum needs s > {MIN_DIRECT_S}, got {s}"));
    }
    let sum: f64 = theta.lambdas().iter().rev().map(|l| l.powf(-s)).sum();
    let tail = match (theta.cutoff(), theta.weyl()) {
        (Some(cap), Some(w)) if s > w.alpha => w.c * w.alpha * cap.powf(w.alpha - s) / (s - w.alpha),
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 0.0,
    };
    Ok(ZetaValue { s, value: sum + tail, tail })
}

/// Γ(s, x) for s > −1, x > 0.
fn upper_gamma(s: f64, x: f64) -> f64 {
    use statrs::function::gamma::{gamma, gamma_ur};
    if s > 0.0 {
        gamma_ur(s, x) * gamma(s)
    } else if s == 0.0 {
        exp_int_e1(x)
    } else {
        // Γ(s, x) = (Γ(s+1, x) − x^s e^{−x}) / s
        (upper_gamma(s + 1.0, x) - x.powf(s) * (-x).exp()) / s
    }
}

/// Where the Mellin integral is split and how accurately it is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Split point T between the expansion region and the exponential tail.
    pub split: f64,
    pub abs_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { split: 1.0, abs_tol: 1e-10 }
    }
}

/// ζ(s) by the split Mellin transform, valid for −1 < s, s ∉ {0, 1}:
/// Γ(s)ζ(s) = b₋₁T^{s−1}/(s−1) + b₀T^s/s + ∫₀ᵀ t^{s−1}ρ dt + Σ λ^{−s}Γ(s, λT).
pub fn zeta_continued(theta: &ThetaSeries, exp: &Expansion, s: f64, q: QuadratureSpec) -> Result<f64> {
    if !(s > -1.0) || s == 0.0 || s == 1.0 {
        return invalid("s", format!("continuation evaluated only on (−1, ∞) without 0 and 1, got {s}"));
    }
    let t_split = q.split;
    let tau = exp.window.tau;
    let head = exp.b_minus1 * t_split.powf(s - 1.0) / (s - 1.0) + exp.b0 * t_split.powf(s) / s;
    let model: f64 = exp.higher.iter().map(|(b, c)| c * tau.powf(s + b) / (s + b)).sum();
    let (mid, _) = quad::integrate(
        |t| t.powf(s - 1.0) * (theta.sum(t) - exp.b_minus1 / t - exp.b0),
        tau,
        t_split,
        q.abs_tol,
        1e-12,
    )?;
    let tail: f64 = theta.lambdas().iter().map(|&l| l.powf(-s) * upper_gamma(s, l * t_split)).sum();
    Ok((head + model + mid + tail) / statrs::function::gamma::gamma(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaPrime {
    pub value: f64,
    /// Σ E₁(λT)
    pub large_t: f64,
    /// ∫₀^τ ρ_model/t
    pub model_part: f64,
    /// ∫_τ^T ρ/t
    pub small_t: f64,
    /// −b₋₁/T + b₀(γ + log T)
    pub polar: f64,
}

/// ζ′(0) = Σ E₁(λT) + ∫₀ᵀ ρ(t)/t dt − b₋₁/T + b₀(γ + log T), with ρ = θ − b₋₁/t − b₀.
pub fn zeta_prime0(theta: &ThetaSeries, exp: &Expansion, q: QuadratureSpec) -> Result<ZetaPrime> {
    if !(exp.residual < MAX_FIT_RESIDUAL) {
        return Err(Error::IllConditioned(format!(
            "fit residual {:e} exceeds {MAX_FIT_RESIDUAL:e}; ρ(t)/t is not reliably integrable",
            exp.residual
        )));
    }
    if exp.higher.iter().any(|(b, _)| *b <= 0.0) {
        return invalid("expansion", "higher exponents must be positive");
    }
    let t_split = q.split;
    let tau = exp.window.tau;
    if !(tau < t_split) {
        return invalid("split", format!("split T = {t_split} must exceed the fit window start τ = {tau}"));
    }
    let large_t: f64 = theta.lambdas().iter().rev().map(|&l| exp_int_e1(l * t_split)).sum();
    let model_part: f64 = exp.higher.iter().map(|(b, c)| c * tau.powf(*b) / b).sum();
    let (small_t, _) = quad::integrate(|t| (theta.sum(t) - exp.b_minus1 / t - exp.b0) / t, tau, t_split, q.abs_tol, 1e-12)?;
    let polar = -exp.b_minus1 / t_split + exp.b0 * (EULER_GAMMA + t_split.ln());
    Ok(ZetaPrime { value: large_t + model_part + small_t + polar, large_t, model_part, small_t, polar })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZetaReport {
    pub a_minus1: f64,
    pub a_0: f64,
    pub fit_residual: f64,
    pub window: FitWindow,
    pub zeta_samples: Vec<ZetaValue>,
    /// ζ(s) from the continuation at the same s, for comparison with the direct sums
    pub mellin_samples: Vec<(f64, f64)>,
    pub zeta0: f64,
    pub zeta_prime0: f64,
    pub quadrature: QuadratureSpec,
}

/// Full zeta analysis of one heat trace.
pub fn zeta_report(theta: &ThetaSeries, window: FitWindow, fit: FitOptions, q: QuadratureSpec, s_samples: &[f64]) -> Result<ZetaReport> {
    let exp = fit_expansion(theta, window, fit)?;
    let zp = zeta_prime0(theta, &exp, q)?;
    let zeta_samples = s_samples.iter().map(|&s| zeta_at(theta, s)).collect::<Result<Vec<_>>>()?;
    let mellin_samples =
        s_samples.iter().map(|&s| zeta_continued(theta, &exp, s, q).map(|v| (s, v))).collect::<Result<Vec<_>>>()?;
    // ζ(0) = b₀ is forced by the continuation; evaluate it through the same formula near 0
    let zeta0 = 0.5 * (zeta_continued(theta, &exp, 1e-7, q)? + zeta_continued(theta, &exp, -1e-7, q)?);
    Ok(ZetaReport {
        a_minus1: exp.b_minus1,
        a_0: exp.b0,
        fit_residual: exp.residual,
        window,
        zeta_samples,
        mellin_samples,
        zeta0,
        zeta_prime0: zp.value,
        quadrature: q,
    })
}

/// One member of a metric family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FamilyRow {
    pub p: f64,
    pub zeta0: f64,
    pub zeta_prime0: f64,
    pub lambda1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyZeta {
    pub window: FitWindow,
    pub rows: Vec<FamilyRow>,
    pub limit_row: Option<FamilyRow>,
    pub limit: TorsionLimit,
}

impl FamilyZeta {
    /// |ζ′_p(0) − L| with L the direct limit value, else the extrapolated one.
    pub fn gap_to_limit(&self) -> Vec<f64> {
        let target = self.limit.direct.or(self.limit.extrapolated.map(|e| e.0));
        self.rows.iter().map(|r| target.map_or(f64::NAN, |l| (r.zeta_prime0 - l).abs())).collect()
    }
}

fn member_row(p: f64, theta: &ThetaSeries, window: FitWindow, fit: FitOptions, q: QuadratureSpec) -> Result<FamilyRow> {
    let exp = fit_expansion(theta, window, fit)?;
    let zp = zeta_prime0(theta, &exp, q)?;
    Ok(FamilyRow { p, zeta0: exp.b0, zeta_prime0: zp.value, lambda1: theta.lambda1() })
}

/// ζ′(0) along a family of heat traces labelled by p, fitted on one common window,
/// compared with the limit metric's own value when given.
pub fn zeta_family(
    members: &[(f64, ThetaSeries)],
    limit: Option<&ThetaSeries>,
    fit: FitOptions,
    q: QuadratureSpec,
) -> Result<FamilyZeta> {
    if members.len() < 4 {
        return invalid("family", format!("need at least 4 members, got {}", members.len()));
    }
    let mut all: Vec<ThetaSeries> = members.iter().map(|m| m.1.clone()).collect();
    all.extend(limit.cloned());
    let window = FitWindow::for_family(&all);
    let rows = members.iter().map(|(p, th)| member_row(*p, th, window, fit, q)).collect::<Result<Vec<_>>>()?;
    let limit_row = limit.map(|th| member_row(f64::INFINITY, th, window, fit, q)).transpose()?;
    let seq: Vec<(f64, f64)> = rows.iter().map(|r| (r.p, r.zeta_prime0)).collect();
    let limit = torsion_limit(&seq, limit_row.map(|r| r.zeta_prime0));
    Ok(FamilyZeta { window, rows, limit_row, limit })
}
