use super::variation::{Variation, VariedPencil};
use crate::assembly::Discretization;
use crate::error::Result;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub bound_name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs
    pub slack: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { bound_name: name.into(), lhs, rhs, slack: rhs - lhs, pass: lhs <= rhs }
    }

    /// rhs / lhs
    pub fn ratio(&self) -> f64 {
        self.rhs / self.lhs
    }
}

/// ∫₀^{π/2} cos^{1/2}θ dθ = √π Γ(3/4) / (2Γ(5/4)).
pub fn cos_half_integral() -> f64 {
    use crate::quad::gamma;
    std::f64::consts::PI.sqrt() * gamma(0.75) / (2.0 * gamma(1.25))
}

/// Constant c in ‖∂_s e^{−tΔ}‖ ≤ c·√(δ_E π_E)·t^{1/4}: 2^{3/4}·I + 4 with I from [`cos_half_integral`].
pub fn kernel_variation_constant() -> f64 {
    2f64.powf(0.75) * cos_half_integral() + 4.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationReport {
    pub s: f64,
    pub delta: f64,
    pub pi: f64,
    pub checks: Vec<BoundCheck>,
    /// smallest c making the kernel-variation bound hold at every tested t and mode
    pub fitted_c: Option<f64>,
    /// exact discrete sup of ‖Dx‖²_M / (π² xᵀQx), for comparison with the random sampling
    pub worst_energy_ratio: Option<f64>,
}

/// Discrete analogues of the metric-variation estimates at parameter s.
///
/// Bundle variation: ‖Dx‖²_M ≤ π²xᵀQx over random x, ‖De^{−tA}‖ ≤ e^{−1/2}t^{−1/2}π,
/// ‖∂_s e^{−tA}‖ ≤ c√(δπ)t^{1/4}.
/// Base variation: ‖A′x‖_M ≤ δ‖Ax‖_M over random x and ‖A′e^{−tA}‖ ≤ δ/(et).
pub fn variation_bounds(
    var: &Variation,
    s: f64,
    ts: &[f64],
    modes: &[i32],
    d: &Discretization,
    n_random: usize,
    seed: u64,
) -> Result<VariationReport> {
    let delta = var.delta(s, d)?;
    let pi = var.pi(s, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bundle = matches!(var, Variation::Bundle { .. });
    let c = kernel_variation_constant();
    let mut worst_random = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    let mut per_t: Vec<(f64, f64, f64)> = ts.iter().map(|&t| (t, 0.0, 0.0)).collect();
    let mut fitted_c: f64 = 0.0;
    let mut worst_energy: f64 = 0.0;
    for &k in modes {
        let vp = VariedPencil::new(var, s, k, d)?;
        let p = &vp.pencil;
        let a = p.a();
        let n = p.dim();
        for _ in 0..n_random {
            let x = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let dx = &vp.d * &x;
            let (lhs, rhs) = if bundle {
                (p.vec_norm(&dx).powi(2), pi * pi * x.dot(&(&p.q * &x)))
            } else {
                (p.vec_norm(&dx), delta * p.vec_norm(&(&a * &x)))
            };
            if lhs - rhs > worst_random.2 {
                worst_random = (lhs, rhs, lhs - rhs);
            }
        }
        if bundle {
            worst_energy = worst_energy.max(energy_ratio(&vp, pi));
        }
        for entry in per_t.iter_mut() {
            let t = entry.0;
            let op = &vp.d * p.heat(t);
            entry.1 = entry.1.max(p.norm(&op));
            if bundle {
                let dh = p.norm(&vp.heat_derivative(t));
                entry.2 = entry.2.max(dh);
                let scale = (delta * pi).sqrt() * t.powf(0.25);
                if scale > 0.0 {
                    fitted_c = fitted_c.max(dh / scale);
                }
            }
        }
    }
    let mut checks = Vec::new();
    if bundle {
        checks.push(BoundCheck::new("energy_variation", worst_random.0, worst_random.1));
        for &(t, dh, dk) in &per_t {
            checks.push(BoundCheck::new(format!("smoothed_variation_t={t}"), dh, (-0.5f64).exp() * pi / t.sqrt()));
            checks.push(BoundCheck::new(format!("kernel_variation_t={t}"), dk, c * (delta * pi).sqrt() * t.powf(0.25)));
        }
    } else {
        checks.push(BoundCheck::new("base_variation", worst_random.0, worst_random.1));
        for &(t, dh, _) in &per_t {
            checks.push(BoundCheck::new(format!("base_smoothed_variation_t={t}"), dh, delta / (std::f64::consts::E * t)));
        }
    }
    Ok(VariationReport {
        s,
        delta,
        pi,
        checks,
        fitted_c: bundle.then_some(fitted_c),
        worst_energy_ratio: bundle.then_some(worst_energy),
    })
}

/// max over x ⊥ ker of ‖Dx‖²_M / (π² xᵀQx), from the eigenbasis of the pencil.
fn energy_ratio(vp: &VariedPencil, pi: f64) -> f64 {
    let p = &vp.pencil;
    // in eigen-coordinates y: xᵀQx = Σλ_i y_i², ‖Dx‖²_M = ‖D̃y‖²
    let dt = p.to_eigenbasis(&vp.d);
    let lmax = p.lambda.max();
    let cols: Vec<usize> = (0..p.dim()).filter(|&i| p.lambda[i] > 1e-9 * lmax).collect();
    if cols.is_empty() || pi == 0.0 {
        return 0.0;
    }
    let b = nalgebra::DMatrix::from_fn(p.dim(), cols.len(), |r, c| dt[(r, cols[c])] / p.lambda[cols[c]].sqrt());
    let s = crate::heat::dense::spectral_norm(&b);
    s * s / (pi * pi)
}
