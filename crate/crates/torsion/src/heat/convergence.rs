use super::dense::{norm_in, DensePencil};
use crate::assembly::{default_boundaries, CellQuadrature, Discretization};
use crate::error::{invalid, Result};
use crate::profiles::{BaseProfile, MetricProfile};
use nalgebra::DMatrix;
use serde::Serialize;

/// A metric pair (bundle, base) for one member of a family.
pub type MetricPair = (MetricProfile, BaseProfile);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub t: f64,
    pub modes: Vec<i32>,
    /// ‖e^{−tA_p} − e^{−tA_∞}‖ per member, max over modes
    pub heat_to_limit: Vec<f64>,
    /// ‖(I + A_p)^{−1} − (I + A_∞)^{−1}‖ per member
    pub resolvent_to_limit: Vec<f64>,
    /// (i, j, ‖e^{−tA_i} − e^{−tA_j}‖) for consecutive members
    pub cauchy: Vec<(usize, usize, f64)>,
}

struct ModeSet {
    pencils: Vec<DensePencil>,
}

fn pencils(pair: &MetricPair, modes: &[i32], d: &Discretization) -> Result<ModeSet> {
    let cq = CellQuadrature::new(&pair.0, &pair.1, d)?;
    let m = pair.0.degree();
    let pencils = modes
        .iter()
        .map(|&k| {
            let (l, r) = default_boundaries(k, m);
            DensePencil::new(&cq.mode(k, l, r)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeSet { pencils })
}

fn resolvent(p: &DensePencil) -> DMatrix<f64> {
    p.function(|l| 1.0 / (1.0 + l))
}

/// Operator-norm distances measured in the limit metric's mass inner product.
pub fn semigroup_convergence(
    members: &[MetricPair],
    limit: &MetricPair,
    t: f64,
    modes: &[i32],
    d: &Discretization,
) -> Result<ConvergenceTable> {
    if members.is_empty() {
        return invalid("family", "need at least one member");
    }
    if !(t > 0.0) {
        return invalid("t", format!("need t > 0, got {t}"));
    }
    let lim = pencils(limit, modes, d)?;
    let lim_heat: Vec<DMatrix<f64>> = lim.pencils.iter().map(|p| p.heat(t)).collect();
    let lim_res: Vec<DMatrix<f64>> = lim.pencils.iter().map(resolvent).collect();
    let mut heat_to_limit = Vec::with_capacity(members.len());
    let mut resolvent_to_limit = Vec::with_capacity(members.len());
    let mut heats: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(members.len());
    for pair in members {
        let set = pencils(pair, modes, d)?;
        let h: Vec<DMatrix<f64>> = set.pencils.iter().map(|p| p.heat(t)).collect();
        let mut dh: f64 = 0.0;
        let mut dr: f64 = 0.0;
        for (i, p) in set.pencils.iter().enumerate() {
            let l = &lim.pencils[i].l;
            dh = dh.max(norm_in(l, &(&h[i] - &lim_heat[i])));
            dr = dr.max(norm_in(l, &(resolvent(p) - &lim_res[i])));
        }
        heat_to_limit.push(dh);
        resolvent_to_limit.push(dr);
        heats.push(h);
    }
    let cauchy = (1..members.len())
        .map(|j| {
            let dist = (0..modes.len())
                .map(|i| norm_in(&lim.pencils[i].l, &(&heats[j][i] - &heats[j - 1][i])))
                .fold(0.0, f64::max);
            (j - 1, j, dist)
        })
        .collect();
    Ok(ConvergenceTable { t, modes: modes.to_vec(), heat_to_limit, resolvent_to_limit, cauchy })
}
