use super::solver::{eigenvalue, eigenvalues_below, eigenvector};
use crate::assembly::{default_boundaries, CellQuadrature, Discretization, ModeOperator};
use crate::error::{Error, Result};
use crate::profiles::{BaseProfile, MetricProfile};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub mode: i32,
    /// Position within its mode, so the eigenvector can be recomputed.
    pub index_in_mode: usize,
}

/// Default relative threshold separating kernel from nonzero eigenvalues.
pub const KERNEL_THRESHOLD: f64 = 1e-8;
/// Default relative tolerance for merging equal eigenvalues.
pub const MERGE_TOL: f64 = 1e-7;
/// Largest kernel dimension considered.
const MAX_KERNEL: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub kernel_dim: usize,
    pub kernel_threshold: f64,
    /// λ_{kernel_dim} / max kernel |λ|; infinite when the kernel is exactly zero or empty.
    pub gap_ratio: f64,
    /// Eigenvalues are complete below this value.
    pub cutoff: f64,
    pub meta: String,
}

/// A cluster of merged eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Group {
    pub lambda: f64,
    pub multiplicity: usize,
    pub modes: Vec<i32>,
}

impl Spectrum {
    /// Sorts, classifies the kernel and records provenance.
    pub fn merge(mut entries: Vec<SpectrumEntry>, cutoff: f64, kernel_threshold: f64, meta: impl Into<String>) -> Self {
        entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.mode.cmp(&b.mode)));
        let (kernel_dim, gap_ratio) = classify_kernel(&entries, kernel_threshold);
        Self { entries, kernel_dim, kernel_threshold, gap_ratio, cutoff, meta: meta.into() }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    /// Nonzero eigenvalues.
    pub fn positive(&self) -> Vec<f64> {
        self.entries[self.kernel_dim..].iter().map(|e| e.lambda).collect()
    }

    /// First nonzero eigenvalue.
    pub fn lambda1(&self) -> Result<f64> {
        self.entries.get(self.kernel_dim).map(|e| e.lambda).ok_or(Error::NoNonzeroEigenvalue)
    }

    /// Nonzero eigenvalues merged into groups with relative tolerance `tol`.
    pub fn groups(&self, tol: f64) -> Vec<Group> {
        let mut out: Vec<Group> = Vec::new();
        let mut sum = 0.0;
        for e in &self.entries[self.kernel_dim..] {
            match out.last_mut() {
                Some(g) if (e.lambda - g.lambda).abs() <= tol * e.lambda.abs() => {
                    sum += e.lambda;
                    g.multiplicity += 1;
                    g.modes.push(e.mode);
                    g.lambda = sum / g.multiplicity as f64;
                }
                _ => {
                    sum = e.lambda;
                    out.push(Group { lambda: e.lambda, multiplicity: 1, modes: vec![e.mode] });
                }
            }
        }
        out
    }

    /// Rows `index,lambda,mode,multiplicity_group,is_kernel`.
    pub fn rows(&self, tol: f64) -> Vec<(usize, f64, i32, usize, bool)> {
        let mut group_of = vec![0usize; self.entries.len()];
        let mut g = 0;
        for (i, slot) in group_of.iter_mut().enumerate().skip(self.kernel_dim) {
            if i > self.kernel_dim {
                let (a, b) = (self.entries[i - 1].lambda, self.entries[i].lambda);
                if (b - a).abs() > tol * b.abs() {
                    g += 1;
                }
            }
            *slot = g + 1;
        }
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| (i, e.lambda, e.mode, group_of[i], i < self.kernel_dim))
            .collect()
    }
}

/// Largest j ≤ 64 such that every earlier |λ_i| is below threshold·λ_j.
fn classify_kernel(entries: &[SpectrumEntry], threshold: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    let mut max_abs = 0.0f64;
    for (j, e) in entries.iter().enumerate().take(MAX_KERNEL + 1) {
        if e.lambda > 0.0 && max_abs < threshold * e.lambda {
            best = (j, if max_abs > 0.0 { e.lambda / max_abs } else { f64::INFINITY });
        }
        max_abs = max_abs.max(e.lambda.abs());
    }
    best
}

/// Options for [`compute_spectrum`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub kernel_threshold: f64,
    /// Cap on the resolved eigenvalues; the effective cutoff is the smaller of this and
    /// the lowest eigenvalue of the first excluded modes ±(k_max + 1).
    pub max_lambda: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { kernel_threshold: KERNEL_THRESHOLD, max_lambda: f64::INFINITY }
    }
}

/// All eigenvalues of modes |k| ≤ k_max below the resolution cutoff.
pub fn compute_spectrum(
    psi: &MetricProfile,
    base: &BaseProfile,
    d: &Discretization,
    opts: SpectrumOptions,
) -> Result<Spectrum> {
    d.check_degree(psi.degree())?;
    let cq = CellQuadrature::new(psi, base, d)?;
    let m = psi.degree();
    let k_max = d.k_max as i32;
    let op = |k: i32| {
        let (l, r) = default_boundaries(k, m);
        cq.mode(k, l, r)
    };
    let mut cutoff = opts.max_lambda;
    for k in [-(k_max + 1), k_max + 1] {
        if let Some(l) = eigenvalue(&op(k)?, 0) {
            cutoff = cutoff.min(l);
        }
    }
    // a mode inside the range may be isospectral to an excluded one (k ↔ m − k)
    cutoff *= 1.0 - 1e-9;
    let per_mode = |k: i32| -> Result<Vec<SpectrumEntry>> {
        let o = op(k)?;
        let mut vals = eigenvalues_below(&o, cutoff);
        // refine the lowest value, where bisection has only absolute accuracy
        if let Some(first) = vals.first_mut() {
            // a near-singular shift can hand back a poor vector; keep the refinement
            // only when it sharpens a kernel value or agrees with bisection
            if let Ok(p) = eigenvector(&o, *first) {
                if p.lambda.abs() < first.abs() || (p.lambda - *first).abs() <= 1e-8 * first.abs() {
                    *first = p.lambda;
                }
            }
        }
        vals.retain(|&l| l < cutoff);
        Ok(vals.into_iter().enumerate().map(|(i, lambda)| SpectrumEntry { lambda, mode: k, index_in_mode: i }).collect())
    };
    #[cfg(feature = "parallel")]
    let all: Vec<Vec<SpectrumEntry>> = {
        use rayon::prelude::*;
        (-k_max..=k_max).into_par_iter().map(per_mode).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let all: Vec<Vec<SpectrumEntry>> = (-k_max..=k_max).map(per_mode).collect::<Result<_>>()?;
    let meta = format!(
        "{} m={} grid=[{},{}]x{} kmax={}",
        psi.kind().tag(),
        m,
        d.u_min,
        d.u_max,
        d.n_nodes,
        d.k_max
    );
    Ok(Spectrum::merge(all.into_iter().flatten().collect(), cutoff, opts.kernel_threshold, meta))
}

/// Mode operators for a spectrum's provenance, for eigenvector recovery.
pub fn mode_operator(psi: &MetricProfile, base: &BaseProfile, d: &Discretization, k: i32) -> Result<ModeOperator> {
    crate::assembly::reduce_mode(psi, base, k, d)
}
