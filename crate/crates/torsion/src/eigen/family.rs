use super::Spectrum;
use crate::assembly::Discretization;
use crate::error::{Error, Result};
use crate::profiles::MetricProfile;
use crate::quad::GAUSS3_NODES;
use serde::Serialize;

/// Range [a, b] of e^{ψ_p − ψ_q} over the quadrature points of the discretization.
/// Both discrete forms are weighted sums over these points, so
/// a·x̂ᵀQ_q x̂ ≤ x̂ᵀQ_p x̂ ≤ b·x̂ᵀQ_q x̂ and likewise for M.
pub fn equivalence_range(p: &MetricProfile, q: &MetricProfile, d: &Discretization) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in 0..d.n_nodes - 1 {
        let (a, b) = (d.node(c), d.node(c + 1));
        for x in GAUSS3_NODES {
            let u = a + x * (b - a);
            let r = (p.psi(u) - q.psi(u)).exp();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCheck {
    pub p: usize,
    pub q: usize,
    /// λ_{1,q}/λ_{1,p}
    pub ratio: f64,
    pub alpha: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lambda1Report {
    pub lambda1: Vec<f64>,
    pub pairs: Vec<PairCheck>,
    pub min_lambda1: f64,
    pub all_pass: bool,
}

/// Checks α ≤ λ_{1,q}/λ_{1,p} ≤ 1/α for all pairs, α = a/b from [`equivalence_range`].
pub fn lambda1_family(profiles: &[MetricProfile], spectra: &[Spectrum], d: &Discretization) -> Result<Lambda1Report> {
    if profiles.len() != spectra.len() {
        return Err(Error::Invalid { what: "spectra", why: "one spectrum per profile".into() });
    }
    let lambda1 = spectra.iter().map(Spectrum::lambda1).collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for p in 0..profiles.len() {
        for q in p..profiles.len() {
            let (a, b) = equivalence_range(&profiles[p], &profiles[q], d);
            let alpha = a / b;
            let ratio = lambda1[q] / lambda1[p];
            pairs.push(PairCheck { p, q, ratio, alpha, pass: alpha <= ratio && ratio <= 1.0 / alpha });
        }
    }
    let min_lambda1 = lambda1.iter().cloned().fold(f64::INFINITY, f64::min);
    let all_pass = pairs.iter().all(|c| c.pass) && min_lambda1 > 0.0;
    Ok(Lambda1Report { lambda1, pairs, min_lambda1, all_pass })
}
