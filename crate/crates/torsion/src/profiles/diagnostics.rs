use super::{BaseProfile, ContinuousFamily, MetricProfile, UGrid};
use crate::error::{invalid, Result};
use serde::Serialize;

/// Sup-norm diagnostics of a metric sequence on a fixed u-grid.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyDiagnostics {
    pub grid: UGrid,
    /// Sequence index n for each entry of the per-step vectors.
    pub index: Vec<i32>,
    /// ‖h_n/h_{n−1} − 1‖_sup
    pub ratio_norms: Vec<f64>,
    /// ‖h_X^{-1/2} ∂ log(h_n/h_{n−1})‖_sup
    pub grad_norms: Vec<f64>,
    /// Partial sums of ‖h_n/h_{n−1} − 1‖^{1/2}.
    pub sum_sqrt_ratio: Vec<f64>,
    /// Interpolation parameter samples for δ_E and π_E.
    pub s: Vec<f64>,
    /// sup_u |∂_s log H(s)|
    pub delta_e: Vec<f64>,
    /// sup_u h_X^{-1/2}|∂_z ∂_s log H(s)|
    pub pi_e: Vec<f64>,
}

impl FamilyDiagnostics {
    /// CSV with header `n,ratio_norm,grad_norm,sum_sqrt_ratio`.
    pub fn rows(&self) -> impl Iterator<Item = (i32, f64, f64, f64)> + '_ {
        (0..self.index.len()).map(|i| (self.index[i], self.ratio_norms[i], self.grad_norms[i], self.sum_sqrt_ratio[i]))
    }
}

/// Parameter samples per unit step used for δ_E and π_E.
pub const SAMPLES_PER_STEP: usize = 8;

pub fn diagnostics(family: &ContinuousFamily<MetricProfile>, base: &BaseProfile, grid: &UGrid) -> FamilyDiagnostics {
    let us: Vec<f64> = grid.points().collect();
    // radial g: h_X^{-1/2}|∂_z g| = |g′(u)| / (2√w)
    let scale: Vec<f64> = us.iter().map(|&u| 0.5 / base.w(u).sqrt()).collect();
    let members = family.members();
    let mut out = FamilyDiagnostics {
        grid: *grid,
        index: Vec::new(),
        ratio_norms: Vec::new(),
        grad_norms: Vec::new(),
        sum_sqrt_ratio: Vec::new(),
        s: Vec::new(),
        delta_e: Vec::new(),
        pi_e: Vec::new(),
    };
    let mut acc = 0.0;
    for (j, pair) in members.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        let ratio = sup(us.iter().map(|&u| (next.psi(u) - prev.psi(u)).exp_m1().abs()));
        let grad = sup(us.iter().zip(&scale).map(|(&u, s)| (next.dpsi(u) - prev.dpsi(u)).abs() * s));
        acc += ratio.sqrt();
        out.index.push(family.first() + j as i32 + 1);
        out.ratio_norms.push(ratio);
        out.grad_norms.push(grad);
        out.sum_sqrt_ratio.push(acc);
    }
    let steps = (family.last() - family.first()) as usize * SAMPLES_PER_STEP;
    for i in 0..=steps {
        let s = family.first() as f64 + i as f64 / SAMPLES_PER_STEP as f64;
        let d = sup(us.iter().map(|&u| family.dlog_ds(s, u).map_or(f64::NAN, f64::abs)));
        let p = sup(us.iter().zip(&scale).map(|(&u, sc)| family.d2log_ds_du(s, u).map_or(f64::NAN, |v| v.abs() * sc)));
        out.s.push(s);
        out.delta_e.push(d);
        out.pi_e.push(p);
    }
    out
}

/// Supremum that propagates NaN instead of dropping it.
fn sup(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

/// Pointwise check of (1/(1+2ε))|log φ| ≤ |φ − 1| ≤ (1/(1−2ε))|log φ|.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogBoundReport {
    pub holds: bool,
    /// min over samples of |φ−1| − |log φ|/(1+2ε)
    pub lower_slack: f64,
    /// min over samples of |log φ|/(1−2ε) − |φ−1|
    pub upper_slack: f64,
}

pub fn log_bound_check(phi: &[f64], eps: f64) -> Result<LogBoundReport> {
    if !(eps > 0.0 && eps < 0.5) {
        return invalid("eps", format!("need 0 < ε < 1/2, got {eps}"));
    }
    let dev = phi.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    if !(dev < eps) || phi.iter().any(|p| !p.is_finite()) {
        return invalid("phi", format!("‖φ − 1‖_sup = {dev} is not below ε = {eps}"));
    }
    let (mut lower, mut upper) = (f64::INFINITY, f64::INFINITY);
    for &p in phi {
        let l = p.ln().abs();
        let d = (p - 1.0).abs();
        lower = lower.min(d - l / (1.0 + 2.0 * eps));
        upper = upper.min(l / (1.0 - 2.0 * eps) - d);
    }
    Ok(LogBoundReport { holds: lower >= 0.0 && upper >= 0.0, lower_slack: lower, upper_slack: upper })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub is_concave_on_grid: bool,
    /// Largest second difference ψ(u−h) − 2ψ(u) + ψ(u+h).
    pub max_second_difference: f64,
    /// e^U ψ′(U) at the right end of the grid.
    pub pole_derivative: f64,
    pub zero_derivative_at_pole: bool,
}

/// Tolerance on second differences; ψ is O(mU) so this is a few ulps.
pub const CONCAVITY_TOL: f64 = 1e-10;

pub fn concavity_report(p: &MetricProfile, grid: &UGrid) -> ConcavityReport {
    let psi = p.samples(grid);
    let max2 = psi.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::NEG_INFINITY, f64::max);
    let u = grid.u_max;
    let pole = u.exp() * p.dpsi(u);
    // the continuum quantity decays like e^{-u}; at u = U it must be well below one
    let scale = f64::from(p.degree().max(1));
    ConcavityReport {
        is_concave_on_grid: max2 <= CONCAVITY_TOL,
        max_second_difference: max2,
        pole_derivative: pole,
        zero_derivative_at_pole: pole.abs() <= 1e-3 * scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{make_canonical, make_fubini_study, make_pnorm, ChiMap};

    fn pnorm_family(m: i64, chi: &ChiMap, first: i32, last: i32) -> ContinuousFamily<MetricProfile> {
        let members = (first..=last).map(|p| make_pnorm(m, chi, p).unwrap()).collect();
        ContinuousFamily::new(members, first).unwrap()
    }

    #[test]
    fn ratio_norms_obey_the_closed_form_bound() {
        let grid = UGrid::default();
        for (chi, m) in [(ChiMap::Linear, 1), (ChiMap::Power2, 1), (ChiMap::Power2, 3), (ChiMap::Linear, 2)] {
            let fam = pnorm_family(m, &chi, 1, 10);
            let d = diagnostics(&fam, &BaseProfile::fubini_study(), &grid);
            for (i, &n) in d.index.iter().enumerate() {
                let (a, b) = (chi.at(n - 1).unwrap(), chi.at(n).unwrap());
                let c0 = 2f64.powi(m as i32) * 2f64.powf(1.0 / a) * (2.0 * 2f64.ln() + (-1f64).exp());
                assert!(d.ratio_norms[i] <= c0 * (1.0 / a - 1.0 / b), "{chi:?} n={n}");
            }
        }
    }

    #[test]
    fn gradient_lower_bound() {
        let grid = UGrid::default();
        for chi in [ChiMap::Linear, ChiMap::Power2] {
            let fam = pnorm_family(1, &chi, 1, 10);
            let d = diagnostics(&fam, &BaseProfile::fubini_study(), &grid);
            for (i, &n) in d.index.iter().enumerate() {
                let lb = (-1f64).exp() * (1.0 - chi.at(n - 1).unwrap() / chi.at(n).unwrap()).abs();
                assert!(d.grad_norms[i] >= lb, "{chi:?} n={n}: {} < {lb}", d.grad_norms[i]);
            }
        }
    }

    #[test]
    fn linear_chi_gradients_decay_but_doubling_does_not() {
        let grid = UGrid::default();
        let lin = diagnostics(&pnorm_family(1, &ChiMap::Linear, 1, 40), &BaseProfile::fubini_study(), &grid);
        let dbl = diagnostics(&pnorm_family(1, &ChiMap::Power2, 1, 9), &BaseProfile::fubini_study(), &grid);
        assert!(lin.grad_norms.last().unwrap() < &0.05);
        assert!(dbl.grad_norms.iter().skip(3).all(|&g| g > 0.15));
    }

    #[test]
    fn pi_e_stays_bounded_on_the_doubling_family() {
        let grid = UGrid::default();
        let d = diagnostics(&pnorm_family(1, &ChiMap::Power2, 1, 8), &BaseProfile::fubini_study(), &grid);
        let bound = crate::profiles::SMOOTHSTEP_MAX_SLOPE * d.grad_norms.iter().cloned().fold(0.0, f64::max) * 1.5;
        assert!(d.pi_e.iter().all(|&p| p.is_finite() && p <= bound));
        assert!(d.delta_e.iter().all(|&p| p >= 0.0));
        assert_eq!(d.sum_sqrt_ratio.len(), d.ratio_norms.len());
    }

    #[test]
    fn log_bound_cases() {
        let r = log_bound_check(&[1.0; 10], 0.1).unwrap();
        assert!(r.holds && r.lower_slack == 0.0 && r.upper_slack == 0.0);
        let eps = 0.3;
        let r = log_bound_check(&[1.0 + eps / 2.0, 1.0 - eps / 2.0], eps).unwrap();
        assert!(r.holds && r.lower_slack > 0.0 && r.upper_slack > 0.0);
        assert!(log_bound_check(&[1.0], 0.5).is_err());
        assert!(log_bound_check(&[1.3], 0.2).is_err());
    }

    #[test]
    fn concavity_of_standard_profiles() {
        let grid = UGrid::default();
        let fs = concavity_report(&make_fubini_study(2).unwrap(), &grid);
        assert!(fs.is_concave_on_grid && fs.zero_derivative_at_pole);
        let can = concavity_report(&make_canonical(2).unwrap(), &grid);
        assert!(can.is_concave_on_grid && can.pole_derivative == 0.0);
    }

    #[test]
    fn difference_of_pnorms_is_not_concave() {
        let grid = UGrid::default();
        let a = make_pnorm(1, &ChiMap::Linear, 2).unwrap();
        let b = make_pnorm(1, &ChiMap::Linear, 6).unwrap();
        let samples: Vec<f64> = grid.points().map(|u| b.psi(u) - a.psi(u)).collect();
        let diff = crate::profiles::MetricProfile::sampled(0, grid, samples).unwrap();
        assert!(!concavity_report(&diff, &grid).is_concave_on_grid);
    }
}
