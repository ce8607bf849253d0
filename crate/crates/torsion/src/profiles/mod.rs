//! Radial hermitian metrics on O(m) → P¹ and on TP¹.
//!
//! A metric on O(m) is stored through its log-profile ψ(u) = log h(1,1)(e^{-u}),
//! with u = -log|z|, so u → +∞ is the pole z = 0 and u → -∞ is z = ∞.
//! A base metric on TP¹ is stored through w(u) = h_X(∂_z,∂_z)(e^{-u})·e^{-2u}.

mod base;
mod diagnostics;
mod dynamical;
mod family;
mod spline;

pub use base::{BaseKind, BaseProfile};
pub use diagnostics::{
    concavity_report, diagnostics, log_bound_check, ConcavityReport, FamilyDiagnostics, LogBoundReport,
};
pub use dynamical::{make_dynamical, pointwise_gradient, Polynomial, PointwiseGradient};
pub use family::{blend_metrics, ContinuousFamily, Cutoff, LogDensity};
pub use spline::UniformSpline;

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// ln(1 + e^x) without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// 1/(1 + e^{-x}).
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Quintic smoothstep 6x⁵ − 15x⁴ + 10x³, clamped to [0, 1].
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

pub fn smoothstep_deriv(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    30.0 * x * x * (x - 1.0) * (x - 1.0)
}

/// Largest slope of the quintic smoothstep, attained at x = 1/2.
pub const SMOOTHSTEP_MAX_SLOPE: f64 = 1.875;

/// Uniform sampling grid in u.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UGrid {
    pub u_min: f64,
    pub u_max: f64,
    pub n: usize,
}

impl Default for UGrid {
    fn default() -> Self {
        Self { u_min: -12.0, u_max: 12.0, n: 4096 }
    }
}

impl UGrid {
    pub fn new(u_min: f64, u_max: f64, n: usize) -> Result<Self> {
        if !(u_min < u_max) || !u_min.is_finite() || !u_max.is_finite() {
            return invalid("grid", format!("need u_min < u_max, got [{u_min}, {u_max}]"));
        }
        if n < 2 {
            return invalid("grid", "need at least two samples");
        }
        Ok(Self { u_min, u_max, n })
    }

    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn step(&self) -> f64 {
        (self.u_max - self.u_min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.u_max
        } else {
            self.u_min + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }
}

/// The increasing exponent map p ↦ χ(p).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiMap {
    /// χ(p) = p
    Linear,
    /// χ(p) = 2^p
    Power2,
    /// χ(p) = values[p - first]
    Table { first: i32, values: Vec<f64> },
}

impl ChiMap {
    pub fn validate(&self) -> Result<()> {
        if let ChiMap::Table { values, .. } = self {
            if values.windows(2).any(|w| !(w[1] > w[0])) {
                return invalid("family.chi", "χ must be strictly increasing");
            }
            if values.iter().any(|v| !v.is_finite()) {
                return invalid("family.chi", "χ must be finite");
            }
        }
        Ok(())
    }

    pub fn at(&self, p: i32) -> Result<f64> {
        self.validate()?;
        let v = match self {
            ChiMap::Linear => p as f64,
            ChiMap::Power2 => 2f64.powi(p),
            ChiMap::Table { first, values } => {
                let idx = p - first;
                if idx < 0 || idx as usize >= values.len() {
                    return invalid("family.chi", format!("p = {p} outside the table"));
                }
                values[idx as usize]
            }
        };
        if !(v >= 1.0) {
            return invalid("family.chi", format!("χ({p}) = {v} < 1"));
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    FubiniStudy,
    Pnorm { chi: f64 },
    Canonical,
    Dynamical { coeffs: Vec<[f64; 2]>, iterations: u32 },
    Blended,
    Interpolated { param: f64 },
    Cusp { amplitude: f64, width: f64 },
    CustomSampled,
}

impl ProfileKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ProfileKind::FubiniStudy => "fubini_study",
            ProfileKind::Pnorm { .. } => "pnorm",
            ProfileKind::Canonical => "canonical",
            ProfileKind::Dynamical { .. } => "dynamical",
            ProfileKind::Blended => "blended",
            ProfileKind::Interpolated { .. } => "interpolated",
            ProfileKind::Cusp { .. } => "cusp",
            ProfileKind::CustomSampled => "custom_sampled",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Repr {
    FubiniStudy,
    Pnorm { chi: f64 },
    Canonical,
    /// a·β(u)·√|1 − e^{-u}|, β a bump equal to 1 on |u| ≤ width/2 and 0 for |u| ≥ width
    Cusp { amplitude: f64, width: f64 },
    Sampled(Arc<UniformSpline>),
    /// log((1 − r)e^{ψ_a} + r e^{ψ_b})
    Mix { a: Arc<MetricProfile>, b: Arc<MetricProfile>, r: f64 },
    /// ρψ_s + (1 − ρ)ψ_n
    Blend { singular: Arc<MetricProfile>, smooth: Arc<MetricProfile>, cutoff: Cutoff },
    Shift { inner: Arc<MetricProfile>, c: f64 },
}

/// A radial metric on O(m) given by its log-profile.
#[derive(Clone, Debug)]
pub struct MetricProfile {
    degree: u32,
    kind: ProfileKind,
    pub(crate) repr: Repr,
}

pub fn make_fubini_study(m: i64) -> Result<MetricProfile> {
    let degree = check_degree(m)?;
    Ok(MetricProfile { degree, kind: ProfileKind::FubiniStudy, repr: Repr::FubiniStudy })
}

pub fn make_canonical(m: i64) -> Result<MetricProfile> {
    let degree = check_degree(m)?;
    Ok(MetricProfile { degree, kind: ProfileKind::Canonical, repr: Repr::Canonical })
}

/// ψ_p(u) = −(2m/χ(p))·log(1 + e^{−χ(p)u}).
pub fn make_pnorm(m: i64, chi: &ChiMap, p: i32) -> Result<MetricProfile> {
    let degree = check_degree(m)?;
    let c = chi.at(p)?;
    Ok(MetricProfile::pnorm_with_chi(degree, c))
}

/// Cusp profile on the trivial bundle, non-integrable at |z| = 1.
pub fn make_cusp(amplitude: f64, width: f64) -> Result<MetricProfile> {
    if !(width > 0.0) || !amplitude.is_finite() {
        return invalid("cusp", "need width > 0 and finite amplitude");
    }
    Ok(MetricProfile {
        degree: 0,
        kind: ProfileKind::Cusp { amplitude, width },
        repr: Repr::Cusp { amplitude, width },
    })
}

fn check_degree(m: i64) -> Result<u32> {
    if m < 0 {
        return invalid("degree", format!("bundle degree must be ≥ 0, got {m}"));
    }
    u32::try_from(m).or_else(|_| invalid("degree", "degree too large"))
}

fn cusp_bump(u: f64, width: f64) -> (f64, f64) {
    let half = 0.5 * width;
    let x = (u.abs() - half) / half;
    let b = 1.0 - smoothstep(x);
    let db = -smoothstep_deriv(x) / half * u.signum();
    (b, db)
}

impl MetricProfile {
    pub(crate) fn pnorm_with_chi(degree: u32, chi: f64) -> Self {
        Self { degree, kind: ProfileKind::Pnorm { chi }, repr: Repr::Pnorm { chi } }
    }

    /// Profile from samples on a uniform grid, interpolated by a natural cubic spline.
    pub fn sampled(degree: u32, grid: UGrid, psi: Vec<f64>) -> Result<Self> {
        Self::sampled_with_kind(degree, grid, psi, ProfileKind::CustomSampled)
    }

    pub(crate) fn sampled_with_kind(degree: u32, grid: UGrid, psi: Vec<f64>, kind: ProfileKind) -> Result<Self> {
        if psi.len() != grid.n {
            return invalid("psi", format!("expected {} samples, got {}", grid.n, psi.len()));
        }
        if let Some(i) = psi.iter().position(|v| !v.is_finite()) {
            return Err(crate::error::Error::NonFinite { what: "psi sample", u: grid.point(i) });
        }
        let spline = UniformSpline::new(grid.u_min, grid.step(), psi);
        Ok(Self { degree, kind, repr: Repr::Sampled(Arc::new(spline)) })
    }

    pub(crate) fn from_parts(degree: u32, kind: ProfileKind, repr: Repr) -> Self {
        Self { degree, kind, repr }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn psi(&self, u: f64) -> f64 {
        let m = self.degree as f64;
        match &self.repr {
            Repr::FubiniStudy => -m * softplus(-2.0 * u),
            Repr::Pnorm { chi } => -(2.0 * m / chi) * softplus(-chi * u),
            Repr::Canonical => 2.0 * m * u.min(0.0),
            Repr::Cusp { amplitude, width } => {
                let (b, _) = cusp_bump(u, *width);
                amplitude * b * (-u).exp_m1().abs().sqrt()
            }
            Repr::Sampled(s) => s.eval(u),
            Repr::Mix { a, b, r } => mix_log(a.psi(u), b.psi(u), *r),
            Repr::Blend { singular, smooth, cutoff } => {
                let rho = cutoff.value(u);
                if rho == 0.0 {
                    smooth.psi(u)
                } else if rho == 1.0 {
                    singular.psi(u)
                } else {
                    rho * singular.psi(u) + (1.0 - rho) * smooth.psi(u)
                }
            }
            Repr::Shift { inner, c } => inner.psi(u) + c,
        }
    }

    /// dψ/du. At kinks the one-sided average is returned.
    pub fn dpsi(&self, u: f64) -> f64 {
        let m = self.degree as f64;
        match &self.repr {
            Repr::FubiniStudy => 2.0 * m * logistic(-2.0 * u),
            Repr::Pnorm { chi } => 2.0 * m * logistic(-chi * u),
            Repr::Canonical => {
                if u < 0.0 {
                    2.0 * m
                } else if u > 0.0 {
                    0.0
                } else {
                    m
                }
            }
            Repr::Cusp { amplitude, width } => {
                let (b, db) = cusp_bump(u, *width);
                let g = (-u).exp_m1().abs();
                if g == 0.0 {
                    return 0.0;
                }
                // d/du |1 − e^{-u}| = sign(u)·e^{-u}
                let dg = u.signum() * (-u).exp();
                amplitude * (db * g.sqrt() + b * dg / (2.0 * g.sqrt()))
            }
            Repr::Sampled(s) => s.deriv(u),
            Repr::Mix { a, b, r } => {
                let (pa, pb) = (a.psi(u), b.psi(u));
                let wb = mix_weight(pa, pb, *r);
                (1.0 - wb) * a.dpsi(u) + wb * b.dpsi(u)
            }
            Repr::Blend { singular, smooth, cutoff } => {
                let rho = cutoff.value(u);
                let drho = cutoff.deriv(u);
                let ps = if rho == 0.0 && drho == 0.0 { 0.0 } else { singular.psi(u) };
                let pn = smooth.psi(u);
                let dps = if rho == 0.0 { 0.0 } else { singular.dpsi(u) };
                rho * dps + (1.0 - rho) * smooth.dpsi(u) + drho * (ps - pn)
            }
            Repr::Shift { inner, .. } => inner.dpsi(u),
        }
    }

    /// Metric value h(1,1)(e^{-u}) = e^{ψ(u)}.
    pub fn h(&self, u: f64) -> f64 {
        self.psi(u).exp()
    }

    /// Points in u where the profile fails to be smooth.
    pub fn singular_points(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Canonical if self.degree > 0 => vec![0.0],
            Repr::Cusp { .. } => vec![0.0],
            Repr::Mix { a, b, .. } => {
                let mut v = a.singular_points();
                v.extend(b.singular_points());
                v
            }
            Repr::Blend { singular, smooth, cutoff } => {
                let mut v: Vec<f64> = singular.singular_points().into_iter().filter(|&u| cutoff.value(u) > 0.0).collect();
                v.extend(smooth.singular_points());
                v
            }
            Repr::Shift { inner, .. } => inner.singular_points(),
            _ => Vec::new(),
        }
    }

    pub fn samples(&self, grid: &UGrid) -> Vec<f64> {
        grid.points().map(|u| self.psi(u)).collect()
    }

    /// Profile shifted by a constant, ψ + c.
    pub fn shifted(&self, c: f64) -> MetricProfile {
        MetricProfile {
            degree: self.degree,
            kind: self.kind.clone(),
            repr: Repr::Shift { inner: Arc::new(self.clone()), c },
        }
    }
}

/// log((1 − r)e^a + r e^b), stable for large |a − b|.
pub(crate) fn mix_log(a: f64, b: f64, r: f64) -> f64 {
    if r == 0.0 {
        return a;
    }
    if r == 1.0 {
        return b;
    }
    let hi = a.max(b);
    hi + ((1.0 - r) * (a - hi).exp() + r * (b - hi).exp()).ln()
}

/// Fraction of the mixture carried by the second member, r e^b / ((1 − r)e^a + r e^b).
pub(crate) fn mix_weight(a: f64, b: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    if r == 1.0 {
        return 1.0;
    }
    let hi = a.max(b);
    let ea = (1.0 - r) * (a - hi).exp();
    let eb = r * (b - hi).exp();
    eb / (ea + eb)
}
