//! Isoperimetric estimates over parallel circles for rotation-invariant base metrics.
//!
//! With the Riemannian metric 4w(du² + dθ²), the circle u = c has length 4π√w(c)
//! and the region u < c has area 8π∫_{−∞}^c w.

use crate::error::{invalid, Result};
use crate::profiles::{BaseProfile, UGrid};
use crate::quad;
use serde::Serialize;
use std::f64::consts::PI;

/// Tails beyond this |u| carry e^{−2|u|}-small area and are dropped.
const FAR: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheegerEstimate {
    /// min over circles of length / smaller area
    pub h: f64,
    /// minimizing circle
    pub c_star: f64,
    pub area: f64,
}

pub fn circle_length(base: &BaseProfile, c: f64) -> f64 {
    4.0 * PI * base.w(c).sqrt()
}

/// h over the circles u = c of the grid.
pub fn cheeger_estimate(base: &BaseProfile, grid: &UGrid) -> Result<CheegerEstimate> {
    let w = |u: f64| base.w(u);
    let (total, _) = quad::integrate(w, -FAR, FAR, 1e-14, 1e-13)?;
    let (mut below, _) = quad::integrate(w, -FAR, grid.u_min, 1e-16, 1e-13)?;
    let (gx, gw) = quad::gauss_legendre(8);
    let mut best = CheegerEstimate { h: f64::INFINITY, c_star: f64::NAN, area: 8.0 * PI * total };
    let mut prev = grid.u_min;
    for c in grid.points() {
        if c > prev {
            let (mid, half) = (0.5 * (prev + c), 0.5 * (c - prev));
            below += gx.iter().zip(&gw).map(|(x, wq)| wq * half * w(mid + half * x)).sum::<f64>();
        }
        prev = c;
        let small = below.min(total - below);
        if !(small > 0.0) {
            continue;
        }
        let h = circle_length(base, c) / (8.0 * PI * small);
        if h < best.h {
            best.h = h;
            best.c_star = c;
        }
    }
    if !best.h.is_finite() {
        return invalid("base", "degenerate volume split on the grid");
    }
    Ok(best)
}

/// Pointwise range of h_{X,q}/h_{X,p} = w_q/w_p over the grid for the power family.
pub fn tx_ratio_range(q: f64, p: f64, grid: &UGrid) -> Result<(f64, f64)> {
    let (a, b) = (BaseProfile::tx_power(q)?, BaseProfile::tx_power(p)?);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for u in grid.points() {
        let r = (a.log_w(u) - b.log_w(u)).exp();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}
