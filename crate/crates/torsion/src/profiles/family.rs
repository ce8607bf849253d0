use super::{smoothstep, smoothstep_deriv, BaseProfile, MetricProfile, ProfileKind, Repr, UGrid, SMOOTHSTEP_MAX_SLOPE};
use crate::error::{invalid, Error, Result};
use std::sync::Arc;

/// Anything that is a positive density described by its logarithm:
/// ψ for bundle metrics, log w for base metrics.
pub trait LogDensity: Clone {
    fn log_value(&self, u: f64) -> f64;
    fn dlog_value(&self, u: f64) -> f64;
    /// Pointwise (1 − r)·a + r·b of the densities themselves.
    fn mix(a: &Self, b: &Self, r: f64, param: f64) -> Self;
}

impl LogDensity for MetricProfile {
    fn log_value(&self, u: f64) -> f64 {
        self.psi(u)
    }
    fn dlog_value(&self, u: f64) -> f64 {
        self.dpsi(u)
    }
    fn mix(a: &Self, b: &Self, r: f64, param: f64) -> Self {
        MetricProfile::from_parts(
            a.degree(),
            ProfileKind::Interpolated { param },
            Repr::Mix { a: Arc::new(a.clone()), b: Arc::new(b.clone()), r },
        )
    }
}

impl LogDensity for BaseProfile {
    fn log_value(&self, u: f64) -> f64 {
        self.log_w(u)
    }
    fn dlog_value(&self, u: f64) -> f64 {
        self.dlog_w(u)
    }
    fn mix(a: &Self, b: &Self, r: f64, param: f64) -> Self {
        BaseProfile::mix(a, b, r, param)
    }
}

/// Smooth one-parameter family through a discrete sequence:
/// H(s) = (1 − ρ₁(s − n))·h_n + ρ₁(s − n)·h_{n+1} for s ∈ [n, n+1].
#[derive(Clone, Debug)]
pub struct ContinuousFamily<T> {
    members: Vec<T>,
    first: i32,
}

struct Slot {
    lower: usize,
    r: f64,
    dr: f64,
}

impl<T: LogDensity> ContinuousFamily<T> {
    /// `first` is the parameter value of the first member.
    pub fn new(members: Vec<T>, first: i32) -> Result<Self> {
        if members.len() < 2 {
            return invalid("family", "need at least two members");
        }
        Ok(Self { members, first })
    }

    pub fn members(&self) -> &[T] {
        &self.members
    }

    pub fn first(&self) -> i32 {
        self.first
    }

    pub fn last(&self) -> i32 {
        self.first + self.members.len() as i32 - 1
    }

    pub fn member(&self, n: i32) -> Option<&T> {
        usize::try_from(n - self.first).ok().and_then(|i| self.members.get(i))
    }

    fn slot(&self, s: f64) -> Result<Slot> {
        if !(s >= self.first as f64 && s <= self.last() as f64) {
            return invalid("family.param", format!("{s} outside [{}, {}]", self.first, self.last()));
        }
        let lower = ((s.floor() as i32 - self.first) as usize).min(self.members.len() - 2);
        let x = s - (self.first + lower as i32) as f64;
        Ok(Slot { lower, r: smoothstep(x), dr: smoothstep_deriv(x) })
    }

    /// H(s). Integer parameters return the member itself.
    pub fn at(&self, s: f64) -> Result<T> {
        let Slot { lower, r, .. } = self.slot(s)?;
        Ok(match r {
            0.0 => self.members[lower].clone(),
            1.0 => self.members[lower + 1].clone(),
            r => T::mix(&self.members[lower], &self.members[lower + 1], r, s),
        })
    }

    /// k(s, u) = ∂_s log H(s)(u).
    pub fn dlog_ds(&self, s: f64, u: f64) -> Result<f64> {
        let Slot { lower, r, dr } = self.slot(s)?;
        if dr == 0.0 {
            return Ok(0.0);
        }
        let d = self.members[lower + 1].log_value(u) - self.members[lower].log_value(u);
        Ok(dr * ratio_term(d, r))
    }

    /// ∂_u k(s, u).
    pub fn d2log_ds_du(&self, s: f64, u: f64) -> Result<f64> {
        let Slot { lower, r, dr } = self.slot(s)?;
        if dr == 0.0 {
            return Ok(0.0);
        }
        let (a, b) = (&self.members[lower], &self.members[lower + 1]);
        let d = b.log_value(u) - a.log_value(u);
        let dd = b.dlog_value(u) - a.dlog_value(u);
        // ∂_u (e^d − 1)/(1 − r + r e^d) = d′ e^d / (1 − r + r e^d)²
        let core = if d > 0.0 {
            let e = (-d).exp();
            e / ((1.0 - r) * e + r).powi(2)
        } else {
            let e = d.exp();
            e / (1.0 - r + r * e).powi(2)
        };
        Ok(dr * dd * core)
    }

    /// Checks |∂_s log H(s)| ≤ M·sup_u |(h_{⌊s⌋+1} − h_{⌊s⌋})/h_{⌊s⌋}| on the grid, M = max ρ₁′.
    /// Returns (lhs, rhs).
    pub fn derivative_bound(&self, s: f64, grid: &UGrid) -> Result<(f64, f64)> {
        let Slot { lower, .. } = self.slot(s)?;
        let (a, b) = (&self.members[lower], &self.members[lower + 1]);
        let mut lhs = 0.0f64;
        let mut rhs = 0.0f64;
        for u in grid.points() {
            lhs = lhs.max(self.dlog_ds(s, u)?.abs());
            rhs = rhs.max((b.log_value(u) - a.log_value(u)).exp_m1().abs());
        }
        Ok((lhs, SMOOTHSTEP_MAX_SLOPE * rhs))
    }
}

/// (e^d − 1)/(1 − r + r e^d) without overflow.
fn ratio_term(d: f64, r: f64) -> f64 {
    if d > 0.0 {
        let e = (-d).exp();
        (1.0 - e) / ((1.0 - r) * e + r)
    } else {
        d.exp_m1() / (1.0 + r * d.exp_m1())
    }
}

/// Radial cutoff ρ(u) in [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff {
    Zero,
    One,
    /// ρ = 0 on u ∈ [u_lo, u_hi], 1 outside [u_lo − width, u_hi + width].
    Annulus { u_lo: f64, u_hi: f64, width: f64 },
}

impl Cutoff {
    /// Cutoff vanishing on r ≤ |z| ≤ R.
    pub fn annulus(r: f64, big_r: f64, width: f64) -> Result<Self> {
        if !(0.0 < r && r < big_r) || !(width > 0.0) {
            return invalid("cutoff", format!("need 0 < r < R and width > 0, got r={r}, R={big_r}, width={width}"));
        }
        Ok(Cutoff::Annulus { u_lo: -big_r.ln(), u_hi: -r.ln(), width })
    }

    pub fn value(&self, u: f64) -> f64 {
        match *self {
            Cutoff::Zero => 0.0,
            Cutoff::One => 1.0,
            Cutoff::Annulus { u_lo, u_hi, width } => {
                if u < u_lo {
                    smoothstep((u_lo - u) / width)
                } else if u > u_hi {
                    smoothstep((u - u_hi) / width)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn deriv(&self, u: f64) -> f64 {
        match *self {
            Cutoff::Zero | Cutoff::One => 0.0,
            Cutoff::Annulus { u_lo, u_hi, width } => {
                if u < u_lo {
                    -smoothstep_deriv((u_lo - u) / width) / width
                } else if u > u_hi {
                    smoothstep_deriv((u - u_hi) / width) / width
                } else {
                    0.0
                }
            }
        }
    }
}

/// ψ_{n,ρ} = ρψ + (1 − ρ)ψ_n for each member of the smooth sequence.
pub fn blend_metrics(singular: &MetricProfile, smooth_seq: &[MetricProfile], cutoff: Cutoff) -> Result<Vec<MetricProfile>> {
    if let Cutoff::Annulus { .. } = cutoff {
        if let Some(&u) = singular.singular_points().iter().find(|&&u| cutoff.value(u) != 0.0) {
            return Err(Error::CutoffSupport(u));
        }
    }
    let singular = Arc::new(singular.clone());
    smooth_seq
        .iter()
        .map(|s| {
            if s.degree() != singular.degree() {
                return invalid("blend", "degrees differ");
            }
            Ok(match cutoff {
                Cutoff::Zero => s.clone(),
                Cutoff::One => (*singular).clone(),
                c => MetricProfile::from_parts(
                    s.degree(),
                    ProfileKind::Blended,
                    Repr::Blend { singular: Arc::clone(&singular), smooth: Arc::new(s.clone()), cutoff: c },
                ),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{make_canonical, make_fubini_study, make_pnorm, ChiMap};

    fn pnorm_family(m: i64, chi: ChiMap, ps: std::ops::RangeInclusive<i32>) -> ContinuousFamily<MetricProfile> {
        let first = *ps.start();
        let members = ps.map(|p| make_pnorm(m, &chi, p).unwrap()).collect();
        ContinuousFamily::new(members, first).unwrap()
    }

    #[test]
    fn integer_parameters_reproduce_members_exactly() {
        let fam = pnorm_family(1, ChiMap::Power2, 2..=5);
        for n in 2..=5 {
            let h = fam.at(n as f64).unwrap();
            let member = fam.member(n).unwrap();
            for u in [-3.0, -0.1, 0.0, 0.7, 4.0] {
                assert_eq!(h.psi(u).to_bits(), member.psi(u).to_bits());
            }
        }
    }

    #[test]
    fn half_step_lies_between_neighbours() {
        let fam = pnorm_family(2, ChiMap::Linear, 2..=3);
        let h = fam.at(2.5).unwrap();
        for u in UGrid::symmetric(6.0, 241).unwrap().points() {
            let (a, b) = (fam.members()[0].psi(u), fam.members()[1].psi(u));
            let v = h.psi(u);
            assert!(v >= a.min(b) - 1e-14 && v <= a.max(b) + 1e-14);
        }
    }

    #[test]
    fn empty_or_single_family_rejected() {
        assert!(ContinuousFamily::<MetricProfile>::new(vec![], 1).is_err());
        assert!(ContinuousFamily::new(vec![make_fubini_study(1).unwrap()], 1).is_err());
    }

    #[test]
    fn parameter_derivative_bound_for_dyadic_family() {
        let fam = pnorm_family(1, ChiMap::Power2, 1..=6);
        let grid = UGrid::default();
        for j in 0..=40 {
            let s = 1.0 + j as f64 * 0.125;
            let (lhs, rhs) = fam.derivative_bound(s, &grid).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-12), "s={s}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn analytic_parameter_derivatives_match_differences() {
        let fam = pnorm_family(2, ChiMap::Power2, 2..=4);
        for s in [2.3, 2.5, 3.8] {
            for u in [-1.3, -0.05, 0.2, 2.0] {
                let e = 1e-6;
                let fd = (fam.at(s + e).unwrap().psi(u) - fam.at(s - e).unwrap().psi(u)) / (2.0 * e);
                assert!((fd - fam.dlog_ds(s, u).unwrap()).abs() < 1e-7);
                let fdu = (fam.dlog_ds(s, u + e).unwrap() - fam.dlog_ds(s, u - e).unwrap()) / (2.0 * e);
                assert!((fdu - fam.d2log_ds_du(s, u).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn blending_with_trivial_cutoffs() {
        let sing = make_canonical(1).unwrap();
        let seq: Vec<_> = (2..5).map(|p| make_pnorm(1, &ChiMap::Power2, p).unwrap()).collect();
        let zero = blend_metrics(&sing, &seq, Cutoff::Zero).unwrap();
        let one = blend_metrics(&sing, &seq, Cutoff::One).unwrap();
        for u in [-2.0, 0.0, 1.5] {
            for (a, b) in zero.iter().zip(&seq) {
                assert_eq!(a.psi(u), b.psi(u));
            }
            for a in &one {
                assert_eq!(a.psi(u), sing.psi(u));
            }
        }
    }

    #[test]
    fn cutoff_must_vanish_at_the_kink() {
        let sing = make_canonical(1).unwrap();
        let seq = vec![make_pnorm(1, &ChiMap::Power2, 3).unwrap()];
        // annulus 2 ≤ |z| ≤ 3 misses |z| = 1
        let bad = Cutoff::annulus(2.0, 3.0, 0.5).unwrap();
        assert!(matches!(blend_metrics(&sing, &seq, bad), Err(Error::CutoffSupport(_))));
        let good = Cutoff::annulus(0.5, 2.0, 0.5).unwrap();
        let out = blend_metrics(&sing, &seq, good).unwrap();
        assert!(out[0].singular_points().is_empty());
    }

    #[test]
    fn blending_never_increases_log_ratios() {
        let sing = make_canonical(1).unwrap();
        let seq: Vec<_> = (1..=8).map(|p| make_pnorm(1, &ChiMap::Power2, p).unwrap()).collect();
        let cut = Cutoff::annulus(0.6, 1.7, 0.8).unwrap();
        let out = blend_metrics(&sing, &seq, cut).unwrap();
        let grid = UGrid::symmetric(10.0, 2001).unwrap();
        for n in 1..seq.len() {
            let sup = |a: &MetricProfile, b: &MetricProfile| {
                grid.points().map(|u| (a.psi(u) - b.psi(u)).abs()).fold(0.0, f64::max)
            };
            assert!(sup(&out[n], &out[n - 1]) <= sup(&seq[n], &seq[n - 1]) + 1e-15);
        }
    }
}
