use super::dense::DensePencil;
use super::variation::{duhamel_kernel, duhamel_kernel_quadrature, Variation};
use crate::assembly::Discretization;
use crate::error::{invalid, Result};
use nalgebra::DMatrix;
use serde::Serialize;

/// Panel halvings towards each end of [0, t] in the s-quadrature.
pub const GRADED_LEVELS: usize = 48;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DuhamelLevel {
    pub eps: f64,
    /// ‖LHS − RHS‖/‖RHS‖, RHS with the closed-form s-integral
    pub residual: f64,
    /// same with the Gauss–Legendre s-integral
    pub residual_quadrature: f64,
    pub rhs_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DuhamelReport {
    pub s: f64,
    pub t: f64,
    pub modes: Vec<i32>,
    /// worst mode per ε
    pub levels: Vec<DuhamelLevel>,
    /// log-log slope of the residual against ε
    pub order: f64,
}

/// Compares (e^{−tA(s+ε)} − e^{−tA(s−ε)})/2ε with −∫₀ᵗ e^{−(t−σ)A}A′e^{−σA}dσ,
/// A′ = (A(s+ε) − A(s−ε))/2ε, in the M(s) operator norm.
pub fn duhamel_check(var: &Variation, s: f64, t: f64, eps: &[f64], modes: &[i32], d: &Discretization) -> Result<DuhamelReport> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return invalid("eps", "need positive steps");
    }
    if let Some(&e) = eps.iter().find(|&&e| e < 1e-7) {
        return invalid("eps", format!("ε = {e} is too small; cancellation dominates"));
    }
    let mut levels: Vec<DuhamelLevel> = eps
        .iter()
        .map(|&e| DuhamelLevel { eps: e, residual: 0.0, residual_quadrature: 0.0, rhs_norm: 0.0 })
        .collect();
    for &k in modes {
        let center = DensePencil::new(&var.mode(s, k, d)?)?;
        for level in levels.iter_mut() {
            let e = level.eps;
            let plus = DensePencil::new(&var.mode(s + e, k, d)?)?;
            let minus = DensePencil::new(&var.mode(s - e, k, d)?)?;
            let lhs = (plus.heat(t) - minus.heat(t)) / (2.0 * e);
            let da = center.to_eigenbasis(&((plus.a() - minus.a()) / (2.0 * e)));
            let lam = center.lambda.as_slice();
            let rhs = center.from_eigenbasis(&(-da.component_mul(&duhamel_kernel(lam, t))));
            let rhs_q = center.from_eigenbasis(&(-da.component_mul(&duhamel_kernel_quadrature(lam, t, GRADED_LEVELS))));
            let n = center.norm(&rhs);
            let r = relative(&center, &lhs, &rhs, n);
            let rq = relative(&center, &lhs, &rhs_q, n);
            if r > level.residual {
                level.residual = r;
                level.rhs_norm = n;
            }
            level.residual_quadrature = level.residual_quadrature.max(rq);
        }
    }
    let order = slope(&levels);
    Ok(DuhamelReport { s, t, modes: modes.to_vec(), levels, order })
}

fn relative(p: &DensePencil, a: &DMatrix<f64>, b: &DMatrix<f64>, scale: f64) -> f64 {
    if scale == 0.0 {
        return if p.norm(&(a - b)) == 0.0 { 0.0 } else { f64::INFINITY };
    }
    p.norm(&(a - b)) / scale
}

fn slope(levels: &[DuhamelLevel]) -> f64 {
    let pts: Vec<(f64, f64)> = levels.iter().filter(|l| l.residual > 0.0).map(|l| (l.eps.ln(), l.residual.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
