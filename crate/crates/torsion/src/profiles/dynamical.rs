//! Metrics obtained by pulling back along a polynomial: ψ_n(z) = d^{-n}·ψ₀(P^n(z)).

use super::{BaseProfile, MetricProfile, ProfileKind, UGrid};
use crate::error::{invalid, Result};
use num_complex::Complex64;

/// Number of angles in the trapezoid rule used for radial averaging.
pub const ANGULAR_POINTS: usize = 512;

/// Monic polynomial with coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 3 {
            return invalid("polynomial", "degree must be at least 2");
        }
        if (coeffs[coeffs.len() - 1] - Complex64::new(1.0, 0.0)).norm() > 0.0 {
            return invalid("polynomial", "leading coefficient must be 1");
        }
        Ok(Self { coeffs })
    }

    /// z^d + c.
    pub fn unicritical(d: usize, c: Complex64) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); d + 1];
        coeffs[0] = c;
        coeffs[d] = Complex64::new(1.0, 0.0);
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// (P(z), P′(z)) by Horner.
    pub fn eval_with_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Orbits leaving this disc are continued with the exact asymptotic potential.
    pub fn escape_radius(&self) -> f64 {
        let cmax = self.coeffs[..self.degree()].iter().map(|c| c.norm()).fold(0.0, f64::max);
        1e10 * (1.0 + cmax)
    }
}

/// d^{-n}·ψ₀(P^n(z)) at a single point.
fn potential(poly: &Polynomial, n: u32, base: &MetricProfile, z: Complex64, radius: f64) -> f64 {
    let d = poly.degree() as f64;
    let mut w = z;
    for j in 0..n {
        if w.norm() > radius {
            // log|P^{n-j}(w)| = d^{n-j} log|w| up to O(|w|^{-d})
            let u = -d.powi((n - j) as i32) * w.norm().ln();
            return base.psi(u) / d.powi(n as i32);
        }
        w = poly.eval_with_deriv(w).0;
    }
    base.psi(-w.norm().ln()) / d.powi(n as i32)
}

/// Radial profile of the pulled-back metric after n iterations, averaged over circles.
/// Returns the profile and the escape radius used for clamping.
pub fn make_dynamical(poly: &Polynomial, n: u32, base: &MetricProfile, grid: &UGrid) -> Result<(MetricProfile, f64)> {
    let radius = poly.escape_radius();
    if n == 0 {
        return Ok((base.clone(), radius));
    }
    let angles: Vec<Complex64> = (0..ANGULAR_POINTS)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / ANGULAR_POINTS as f64))
        .collect();
    let psi: Vec<f64> = grid
        .points()
        .map(|u| {
            let r = (-u).exp();
            angles.iter().map(|e| potential(poly, n, base, e * r, radius)).sum::<f64>() / ANGULAR_POINTS as f64
        })
        .collect();
    let kind = ProfileKind::Dynamical { coeffs: poly.coeffs.iter().map(|c| [c.re, c.im]).collect(), iterations: n };
    Ok((MetricProfile::sampled_with_kind(base.degree(), *grid, psi, kind)?, radius))
}

/// Un-averaged gradient data at a point z for the sequence ψ_n, n = 0..=n_max.
#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseGradient {
    pub n: u32,
    /// ∂_z ψ_n(z)
    pub dlog_h: Complex64,
    /// h_X(∂,∂)^{-1/2}·|∂_z log(h_n/h_{n-1})|(z); zero for n = 0
    pub grad_ratio: f64,
}

pub fn pointwise_gradient(
    poly: &Polynomial,
    n_max: u32,
    base_e: &MetricProfile,
    base_x: &BaseProfile,
    z: Complex64,
) -> Vec<PointwiseGradient> {
    let d = poly.degree() as f64;
    let hx = base_x.inv_sqrt_hx(-z.norm().ln());
    let mut w = z;
    let mut dw = Complex64::new(1.0, 0.0);
    let mut prev: Option<Complex64> = None;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        // ∂_w ψ₀(w) = ψ₀′(u)·(−1/(2w)), u = −log|w|
        let u = -w.norm().ln();
        let dpsi0 = -base_e.dpsi(u) / (2.0 * w);
        let g = dpsi0 * dw / d.powi(n as i32);
        let grad_ratio = prev.map_or(0.0, |p| hx * (g - p).norm());
        out.push(PointwiseGradient { n, dlog_h: g, grad_ratio });
        prev = Some(g);
        let (pw, dpw) = poly.eval_with_deriv(w);
        dw *= dpw;
        w = pw;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{make_canonical, make_fubini_study};

    #[test]
    fn zero_iterations_return_the_base() {
        let base = make_fubini_study(1).unwrap();
        let poly = Polynomial::unicritical(2, Complex64::new(-2.0, 0.0)).unwrap();
        let grid = UGrid::symmetric(4.0, 101).unwrap();
        let (p, _) = make_dynamical(&poly, 0, &base, &grid).unwrap();
        for u in grid.points() {
            assert_eq!(p.psi(u).to_bits(), base.psi(u).to_bits());
        }
    }

    #[test]
    fn squaring_map_converges_to_the_canonical_metric() {
        let base = make_fubini_study(1).unwrap();
        let can = make_canonical(1).unwrap();
        let poly = Polynomial::unicritical(2, Complex64::new(0.0, 0.0)).unwrap();
        let grid = UGrid::symmetric(12.0, 257).unwrap();
        let mut last = f64::INFINITY;
        for n in [1u32, 2, 3, 4, 5] {
            let (p, _) = make_dynamical(&poly, n, &base, &grid).unwrap();
            let err = grid.points().map(|u| (p.psi(u) - can.psi(u)).abs()).fold(0.0, f64::max);
            // closed form: 2^{-n} log 2
            assert!((err - 2f64.ln() / 2f64.powi(n as i32)).abs() < 1e-12);
            assert!(err <= last / 2.0 + 1e-15);
            last = err;
        }
    }

    #[test]
    fn chebyshev_gradient_at_the_fixed_point() {
        let base = make_fubini_study(1).unwrap();
        let poly = Polynomial::unicritical(2, Complex64::new(-2.0, 0.0)).unwrap();
        let rows = pointwise_gradient(&poly, 10, &base, &BaseProfile::canonical(), Complex64::new(2.0, 0.0));
        for r in &rows {
            let expected = 2f64.powi(r.n as i32 + 1) / 5.0;
            assert!((r.dlog_h.norm() - expected).abs() <= 1e-12 * expected);
            if r.n > 0 {
                let e2 = 0.8 * 2f64.powi(r.n as i32);
                assert!((r.grad_ratio - e2).abs() <= 1e-12 * e2);
            }
        }
    }

    #[test]
    fn rejects_non_monic_or_linear() {
        assert!(Polynomial::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).is_err());
        assert!(Polynomial::new(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)]).is_err());
    }
}
