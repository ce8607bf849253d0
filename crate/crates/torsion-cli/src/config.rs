//! Experiment configuration: JSON schema, frozen defaults and validation.

use serde::{Deserialize, Serialize};
use std::fmt;
use torsion::assembly::Discretization;
use torsion::profiles::ChiMap;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    #[default]
    Spectrum,
    Theta,
    Zeta,
    Converge,
    Diagnose,
    Dynamical,
    Bounds,
}

/// Metric on O(m). Pnorm members take χ from `family.chi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    FubiniStudy {
        #[serde(default = "one")]
        degree: u32,
    },
    Canonical {
        #[serde(default = "one")]
        degree: u32,
    },
    Pnorm {
        #[serde(default = "one")]
        degree: u32,
        #[serde(default = "default_p")]
        p: i32,
    },
    /// Pull-back of Fubini-Study under z^power + c, iterated.
    Dynamical {
        #[serde(default = "one")]
        degree: u32,
        #[serde(default = "two")]
        power: u32,
        #[serde(default = "default_c")]
        c: [f64; 2],
        #[serde(default = "default_iterations")]
        iterations: u32,
    },
}

impl Default for MetricSpec {
    fn default() -> Self {
        MetricSpec::FubiniStudy { degree: 1 }
    }
}

impl MetricSpec {
    pub fn degree(&self) -> u32 {
        match *self {
            MetricSpec::FubiniStudy { degree }
            | MetricSpec::Canonical { degree }
            | MetricSpec::Pnorm { degree, .. }
            | MetricSpec::Dynamical { degree, .. } => degree,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSpec {
    #[default]
    FubiniStudy,
    TxPower {
        p: f64,
    },
    Canonical,
}

/// Assembly window and truncation. `k_max` defaults to degree + 24.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub u_min: f64,
    pub u_max: f64,
    pub n: usize,
    pub k_max: Option<u32>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            u_min: -Discretization::DEFAULT_HALF_WIDTH,
            u_max: Discretization::DEFAULT_HALF_WIDTH,
            n: Discretization::DEFAULT_NODES,
            k_max: None,
        }
    }
}

impl GridSpec {
    pub fn discretization(&self, degree: u32) -> torsion::Result<Discretization> {
        Discretization::new(self.u_min, self.u_max, self.n, self.k_max.unwrap_or(degree + Discretization::DEFAULT_EXTRA_MODES))
    }
}

/// The pnorm family p_min..=p_max, of degree `metric.degree`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySpec {
    pub chi: ChiMap,
    pub p_min: i32,
    pub p_max: i32,
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self { chi: ChiMap::Power2, p_min: 3, p_max: 9 }
    }
}

impl FamilySpec {
    pub fn range(&self) -> std::ops::RangeInclusive<i32> {
        self.p_min..=self.p_max
    }
}

/// Log-spaced sample times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl Default for TGrid {
    fn default() -> Self {
        Self { t_min: 0.01, t_max: 10.0, n: 31 }
    }
}

impl TGrid {
    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.t_max } else { (a + (b - a) * i as f64 / (self.n - 1) as f64).exp() })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSpec {
    /// Cap on resolved eigenvalues; null keeps everything below the truncation cutoff.
    pub max_lambda: Option<f64>,
    /// Relative tolerance for multiplicity groups.
    pub group_tol: f64,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        Self { max_lambda: None, group_tol: torsion::eigen::MERGE_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZetaSpec {
    /// Points where ζ is compared between the direct sum and the continuation.
    pub s_samples: Vec<f64>,
}

impl Default for ZetaSpec {
    fn default() -> Self {
        Self { s_samples: vec![1.5, 2.0, 3.0] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseSpec {
    /// Point z where the un-averaged gradient of a dynamical sequence is traced.
    pub point: [f64; 2],
    /// Sampling grid for sup norms.
    pub u_min: f64,
    pub u_max: f64,
    pub n: usize,
}

impl Default for DiagnoseSpec {
    fn default() -> Self {
        Self { point: [2.0, 0.0], u_min: -12.0, u_max: 12.0, n: 4096 }
    }
}

/// Dense checks run on a coarse window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSpec {
    pub grid: GridSpec,
    /// Family parameter where the variation is taken.
    pub s: f64,
    pub t: Vec<f64>,
    pub modes: Vec<i32>,
    pub samples: usize,
    pub operator_triples: usize,
    pub operator_traces: usize,
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self {
            grid: GridSpec { u_min: -8.0, u_max: 8.0, n: 160, k_max: Some(6) },
            s: 5.5,
            t: vec![0.25, 1.0, 4.0],
            modes: vec![-2, -1, 0, 1, 2, 3],
            samples: 200,
            operator_triples: 500,
            operator_traces: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub recipe: Recipe,
    pub metric: MetricSpec,
    pub base: BaseSpec,
    pub grid: GridSpec,
    pub family: FamilySpec,
    pub t_grid: TGrid,
    pub spectrum: SpectrumSpec,
    pub zeta: ZetaSpec,
    pub diagnose: DiagnoseSpec,
    pub bounds: BoundsSpec,
    pub out: String,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            recipe: Recipe::default(),
            metric: MetricSpec::default(),
            base: BaseSpec::default(),
            grid: GridSpec::default(),
            family: FamilySpec::default(),
            t_grid: TGrid::default(),
            spectrum: SpectrumSpec::default(),
            zeta: ZetaSpec::default(),
            diagnose: DiagnoseSpec::default(),
            bounds: BoundsSpec::default(),
            out: "out".into(),
            seed: 0,
        }
    }
}

fn one() -> u32 {
    1
}
fn two() -> u32 {
    2
}
fn default_p() -> i32 {
    6
}
fn default_c() -> [f64; 2] {
    [-2.0, 0.0]
}
fn default_iterations() -> u32 {
    10
}

/// One violation, located by a dotted path into the config.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

pub const MAX_DEGREE: u32 = 16;

impl ExperimentConfig {
    /// Parses JSON; structural errors carry the path of the offending key.
    pub fn from_json(text: &str) -> Result<Self, Violation> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Violation { path: if path == "." { String::new() } else { path }, message: e.into_inner().to_string() }
        })
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Range checks and canonicalization. Every violation is reported.
    pub fn validate(mut self) -> Result<Self, Vec<Violation>> {
        let mut errs = Vec::new();
        let mut bad = |path: &str, message: String| errs.push(Violation { path: path.into(), message });
        let m = self.metric.degree();
        if m > MAX_DEGREE {
            bad("metric.degree", format!("degree {m} exceeds {MAX_DEGREE}"));
        }
        match &self.metric {
            MetricSpec::Pnorm { p, .. } => {
                if let Err(e) = self.family.chi.at(*p) {
                    bad("metric.p", e.to_string());
                }
            }
            MetricSpec::Dynamical { power, c, iterations, .. } => {
                if *power < 2 {
                    bad("metric.power", format!("need power ≥ 2, got {power}"));
                }
                if !c.iter().all(|v| v.is_finite()) {
                    bad("metric.c", "c must be finite".into());
                }
                if *iterations > 64 {
                    bad("metric.iterations", format!("at most 64 iterations, got {iterations}"));
                }
            }
            _ => {}
        }
        match (&self.recipe, &self.metric) {
            (Recipe::Dynamical, MetricSpec::Dynamical { .. }) => {}
            (Recipe::Dynamical, _) => bad("metric.kind", "the dynamical recipe needs a dynamical metric".into()),
            (Recipe::Diagnose, MetricSpec::Dynamical { iterations: 0, .. }) => {
                bad("metric.iterations", "diagnostics need at least one iteration".into())
            }
            _ => {}
        }
        if let BaseSpec::TxPower { p } = self.base {
            if !(p > 0.0 && p.is_finite()) {
                bad("base.p", format!("need p > 0, got {p}"));
            }
        }
        grid_checks("grid", &self.grid, m, &mut bad);
        if let Err(e) = self.family.chi.validate() {
            bad("family.chi", strip(&e));
        } else if self.family.p_min <= self.family.p_max {
            if let Some(e) = self.family.range().find_map(|p| self.family.chi.at(p).err()) {
                bad("family.chi", strip(&e));
            }
        }
        if self.family.p_min > self.family.p_max {
            bad("family.p_max", format!("need p_min ≤ p_max, got {}..{}", self.family.p_min, self.family.p_max));
        } else if matches!(self.recipe, Recipe::Converge) && self.family.range().count() < 4 {
            bad("family.p_max", "convergence needs at least four members".into());
        }
        let t = &self.t_grid;
        if !(t.t_min > 0.0 && t.t_min < t.t_max && t.t_max.is_finite()) {
            bad("t_grid", format!("need 0 < t_min < t_max, got [{}, {}]", t.t_min, t.t_max));
        }
        if t.n < 2 {
            bad("t_grid.n", "need at least two times".into());
        }
        if let Some(l) = self.spectrum.max_lambda {
            if !(l > 0.0) {
                bad("spectrum.max_lambda", format!("need a positive cap, got {l}"));
            }
        }
        if !(self.spectrum.group_tol >= 0.0 && self.spectrum.group_tol < 1.0) {
            bad("spectrum.group_tol", "need 0 ≤ tol < 1".into());
        }
        for (i, &s) in self.zeta.s_samples.iter().enumerate() {
            if !(s >= torsion::zeta::MIN_DIRECT_S && s.is_finite()) {
                bad(&format!("zeta.s_samples[{i}]"), format!("need s ≥ {}, got {s}", torsion::zeta::MIN_DIRECT_S));
            }
        }
        let dg = &self.diagnose;
        if !(dg.u_min < dg.u_max) || dg.n < 2 {
            bad("diagnose", format!("need u_min < u_max and n ≥ 2, got [{}, {}] x {}", dg.u_min, dg.u_max, dg.n));
        }
        if !dg.point.iter().all(|v| v.is_finite()) || dg.point == [0.0, 0.0] {
            bad("diagnose.point", "need a finite nonzero point".into());
        }
        let b = &self.bounds;
        grid_checks("bounds.grid", &b.grid, m, &mut bad);
        let in_range = b.s >= self.family.p_min as f64 && b.s <= self.family.p_max as f64;
        if self.recipe == Recipe::Bounds && !in_range {
            bad("bounds.s", format!("s = {} outside the family range {}..{}", b.s, self.family.p_min, self.family.p_max));
        }
        if b.t.is_empty() || b.t.iter().any(|t| !(*t > 0.0)) {
            bad("bounds.t", "need positive times".into());
        }
        if b.modes.is_empty() {
            bad("bounds.modes", "need at least one mode".into());
        }
        if b.samples == 0 {
            bad("bounds.samples", "need at least one sample".into());
        }
        if self.out.is_empty() {
            bad("out", "empty output directory".into());
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        self.grid.k_max.get_or_insert(m + Discretization::DEFAULT_EXTRA_MODES);
        Ok(self)
    }
}

fn grid_checks(path: &str, g: &GridSpec, degree: u32, bad: &mut impl FnMut(&str, String)) {
    if !(g.u_min < g.u_max) {
        bad(path, format!("need u_min < u_max, got [{}, {}]", g.u_min, g.u_max));
    } else if !(g.u_min < 0.0 && 0.0 < g.u_max) || !g.u_min.is_finite() || !g.u_max.is_finite() {
        bad(path, format!("window must contain u = 0, got [{}, {}]", g.u_min, g.u_max));
    }
    if g.n < 16 {
        bad(&format!("{path}.n"), format!("need at least 16 nodes, got {}", g.n));
    }
    if let Some(k) = g.k_max {
        if k < degree {
            bad(&format!("{path}.k_max"), format!("k_max = {k} must be at least the degree {degree}"));
        }
    }
}

/// The library message without its own location prefix.
fn strip(e: &torsion::Error) -> String {
    match e {
        torsion::Error::Invalid { why, .. } => why.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paths(r: Result<ExperimentConfig, Vec<Violation>>) -> Vec<String> {
        r.unwrap_err().into_iter().map(|v| v.path).collect()
    }

    #[test]
    fn empty_config_is_default() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        let v = c.validate().unwrap();
        assert_eq!(v.grid.k_max, Some(25));
    }

    #[test]
    fn canonical_json_round_trips() {
        let c = ExperimentConfig::default().validate().unwrap();
        let text = c.to_canonical_json();
        let back = ExperimentConfig::from_json(&text).unwrap().validate().unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_canonical_json(), text);
    }

    #[test]
    fn non_monotone_chi_is_located() {
        let c = ExperimentConfig::from_json(r#"{"family":{"chi":{"table":{"first":3,"values":[8,4,16,32]}},"p_max":6}}"#)
            .unwrap();
        assert_eq!(paths(c.validate()), ["family.chi"]);
    }

    #[test]
    fn reversed_grid_is_located() {
        let c = ExperimentConfig::from_json(r#"{"grid":{"u_min":3,"u_max":-3}}"#).unwrap();
        assert_eq!(paths(c.validate()), ["grid"]);
    }

    #[test]
    fn unknown_keys_carry_their_path() {
        let e = ExperimentConfig::from_json(r#"{"metric":{"kind":"pnorm","q":3}}"#).unwrap_err();
        assert_eq!(e.path, "metric");
        let e = ExperimentConfig::from_json(r#"{"grid":{"n":"many"}}"#).unwrap_err();
        assert_eq!(e.path, "grid.n");
        let e = ExperimentConfig::from_json(r#"{"recipe":"plot"}"#).unwrap_err();
        assert_eq!(e.path, "recipe");
    }

    #[test]
    fn all_violations_are_reported() {
        let c = ExperimentConfig::from_json(r#"{"recipe":"converge","family":{"p_min":3,"p_max":5},"t_grid":{"t_min":-1}}"#)
            .unwrap();
        assert_eq!(paths(c.validate()), ["family.p_max", "t_grid"]);
    }

    #[test]
    fn log_times_hit_the_ends() {
        let t = TGrid { t_min: 0.1, t_max: 10.0, n: 3 }.points();
        assert!((t[1] - 1.0).abs() < 1e-15);
        assert!((t[0] - 0.1).abs() < 1e-15);
        assert_eq!(t[2], 10.0);
    }
}
