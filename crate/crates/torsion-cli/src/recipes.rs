//! One function per recipe. Each returns its artifacts and the numerical
//! assertions it checked; nothing is written until the recipe has finished.

use crate::config::{BaseSpec, ExperimentConfig, MetricSpec, Recipe};
use crate::output::{Cell, Csv};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use torsion::assembly::Discretization;
use torsion::eigen::{compute_spectrum, Spectrum, SpectrumOptions};
use torsion::heat::{variation_bounds, FitOptions, FitWindow, ThetaSeries, Variation};
use torsion::opcalc::norm_inequality_suite;
use torsion::profiles::{
    diagnostics, make_canonical, make_dynamical, make_fubini_study, make_pnorm, pointwise_gradient, BaseProfile,
    ContinuousFamily, FamilyDiagnostics, MetricProfile, Polynomial, UGrid,
};
use torsion::zeta::{zeta_family, zeta_report, QuadratureSpec};
use torsion::Result;

/// A named condition the recipe verified on its own output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    /// (file name, contents)
    pub files: Vec<(String, String)>,
    pub assertions: Vec<Assertion>,
}

impl Outcome {
    fn file(&mut self, name: &str, body: String) {
        self.files.push((name.into(), body));
    }

    fn json(&mut self, name: &str, value: &impl Serialize) {
        self.file(name, serde_json::to_string_pretty(value).expect("report serializes") + "\n");
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion::new(name, pass, detail));
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

/// Runs a validated config.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    match cfg.recipe {
        Recipe::Spectrum => spectrum(cfg, &mut out)?,
        Recipe::Theta => theta(cfg, &mut out)?,
        Recipe::Zeta => zeta(cfg, &mut out)?,
        Recipe::Converge => converge(cfg, &mut out)?,
        Recipe::Diagnose => diagnose(cfg, &mut out)?,
        Recipe::Dynamical => dynamical(cfg, &mut out)?,
        Recipe::Bounds => bounds(cfg, &mut out)?,
    }
    Ok(out)
}

fn base_profile(spec: &BaseSpec) -> Result<BaseProfile> {
    match *spec {
        BaseSpec::FubiniStudy => Ok(BaseProfile::fubini_study()),
        BaseSpec::TxPower { p } => BaseProfile::tx_power(p),
        BaseSpec::Canonical => Ok(BaseProfile::canonical()),
    }
}

fn polynomial(power: u32, c: [f64; 2]) -> Result<Polynomial> {
    Polynomial::unicritical(power as usize, Complex64::new(c[0], c[1]))
}

fn metric(cfg: &ExperimentConfig) -> Result<MetricProfile> {
    match cfg.metric {
        MetricSpec::FubiniStudy { degree } => make_fubini_study(degree.into()),
        MetricSpec::Canonical { degree } => make_canonical(degree.into()),
        MetricSpec::Pnorm { degree, p } => make_pnorm(degree.into(), &cfg.family.chi, p),
        MetricSpec::Dynamical { degree, power, c, iterations } => {
            let g = &cfg.grid;
            let grid = UGrid::new(g.u_min, g.u_max, g.n)?;
            Ok(make_dynamical(&polynomial(power, c)?, iterations, &make_fubini_study(degree.into())?, &grid)?.0)
        }
    }
}

fn pnorm_family(cfg: &ExperimentConfig) -> Result<Vec<MetricProfile>> {
    let m = cfg.metric.degree().into();
    cfg.family.range().map(|p| make_pnorm(m, &cfg.family.chi, p)).collect()
}

fn discretization(cfg: &ExperimentConfig) -> Result<Discretization> {
    cfg.grid.discretization(cfg.metric.degree())
}

fn solve(cfg: &ExperimentConfig, psi: &MetricProfile, base: &BaseProfile, d: &Discretization) -> Result<Spectrum> {
    let max_lambda = cfg.spectrum.max_lambda.unwrap_or(f64::INFINITY);
    compute_spectrum(psi, base, d, SpectrumOptions { max_lambda, ..Default::default() })
}

fn spectrum_csv(s: &Spectrum, tol: f64) -> String {
    let mut csv = Csv::new(&["index", "lambda", "mode", "multiplicity_group", "is_kernel"]);
    for (i, lambda, mode, group, kernel) in s.rows(tol) {
        csv.row([Cell::Int(i as i64), lambda.into(), Cell::Int(mode.into()), Cell::Int(group as i64), kernel.into()]);
    }
    csv.finish()
}

fn kernel_check(out: &mut Outcome, s: &Spectrum, degree: u32) {
    let want = degree as usize + 1;
    out.check(
        "kernel_dimension",
        s.kernel_dim == want,
        format!("kernel dimension {} (expected {want}), gap ratio {:.3e}", s.kernel_dim, s.gap_ratio),
    );
}

fn spectrum(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let s = solve(cfg, &metric(cfg)?, &base_profile(&cfg.base)?, &discretization(cfg)?)?;
    out.file("spectrum.csv", spectrum_csv(&s, cfg.spectrum.group_tol));
    kernel_check(out, &s, cfg.metric.degree());
    Ok(())
}

fn theta(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let s = solve(cfg, &metric(cfg)?, &base_profile(&cfg.base)?, &discretization(cfg)?)?;
    let th = ThetaSeries::from_spectrum(&s)?;
    let mut csv = Csv::new(&["t", "theta", "tail_bound"]);
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for t in cfg.t_grid.points() {
        let v = th.eval(t)?;
        monotone &= v > 0.0 && v < prev;
        prev = v;
        csv.row([t.into(), v.into(), th.tail_bound(t).into()]);
    }
    out.file("theta.csv", csv.finish());
    out.check("theta_decreasing", monotone, "θ positive and strictly decreasing on the t-grid");
    Ok(())
}

fn zeta(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let s = solve(cfg, &metric(cfg)?, &base_profile(&cfg.base)?, &discretization(cfg)?)?;
    let th = ThetaSeries::from_spectrum(&s)?;
    let r = zeta_report(&th, FitWindow::for_theta(&th), FitOptions::default(), QuadratureSpec::default(), &cfg.zeta.s_samples)?;
    // a₀ = ζ(0) + dim ker; the smooth-metric value is m/2 + 1/3
    let m = cfg.metric.degree() as f64;
    let geometric = m / 2.0 + 1.0 / 3.0;
    let measured = r.a_0 + s.kernel_dim as f64;
    let worst = r
        .zeta_samples
        .iter()
        .zip(&r.mellin_samples)
        .map(|(d, (_, c))| (d.value - c).abs() / d.value.abs())
        .fold(0.0, f64::max);
    out.json(
        "zeta.json",
        &json!({
            "metric": s.meta,
            "kernel_dim": s.kernel_dim,
            "lambda1": s.lambda1()?,
            "eigenvalues": th.lambdas().len(),
            "cutoff": th.cutoff(),
            "report": r,
            "a0_comparison": {
                "geometric": geometric,
                "measured": measured,
                "difference": measured - geometric,
            },
        }),
    );
    out.check("continuation_consistency", worst < 1e-3, format!("direct vs continued ζ(s), worst relative gap {worst:.3e}"));
    Ok(())
}

fn converge(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let base = base_profile(&cfg.base)?;
    let d = discretization(cfg)?;
    let members = pnorm_family(cfg)?
        .iter()
        .zip(cfg.family.range())
        .map(|(psi, p)| ThetaSeries::from_spectrum(&solve(cfg, psi, &base, &d)?).map(|t| (p as f64, t)))
        .collect::<Result<Vec<_>>>()?;
    let limit = ThetaSeries::from_spectrum(&solve(cfg, &make_canonical(cfg.metric.degree().into())?, &base, &d)?)?;
    let fam = zeta_family(&members, Some(&limit), FitOptions::default(), QuadratureSpec::default())?;
    let mut csv = Csv::new(&["p", "zeta0", "zeta_prime0", "gap_to_limit"]);
    for (row, gap) in fam.rows.iter().zip(fam.gap_to_limit()) {
        csv.row([Cell::Int(row.p as i64), row.zeta0.into(), row.zeta_prime0.into(), gap.into()]);
    }
    out.file("zeta_family.csv", csv.finish());
    out.json("zeta.json", &fam);
    out.check("cauchy", fam.limit.cauchy, format!("consecutive gaps {:?}", fam.limit.gaps));
    Ok(())
}

fn diagnostics_csv(d: &FamilyDiagnostics) -> String {
    let mut csv = Csv::new(&["n", "ratio_norm", "grad_norm", "sum_sqrt_ratio"]);
    for (n, r, g, s) in d.rows() {
        csv.row([Cell::Int(n.into()), r.into(), g.into(), s.into()]);
    }
    csv.finish()
}

fn diagnose(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let base = base_profile(&cfg.base)?;
    let dg = &cfg.diagnose;
    let grid = UGrid::new(dg.u_min, dg.u_max, dg.n)?;
    let family = match cfg.metric {
        MetricSpec::Dynamical { degree, power, c, iterations } => {
            let poly = polynomial(power, c)?;
            let psi0 = make_fubini_study(degree.into())?;
            let seq = (0..=iterations)
                .map(|n| make_dynamical(&poly, n, &psi0, &grid).map(|r| r.0))
                .collect::<Result<Vec<_>>>()?;
            let z = Complex64::new(dg.point[0], dg.point[1]);
            let mut csv = Csv::new(&["n", "dlog_h_at_z", "grad_ratio_at_z"]);
            for r in pointwise_gradient(&poly, iterations, &psi0, &base, z) {
                csv.row([Cell::Int(r.n.into()), r.dlog_h.norm().into(), r.grad_ratio.into()]);
            }
            out.file("pointwise.csv", csv.finish());
            ContinuousFamily::new(seq, 0)?
        }
        _ => ContinuousFamily::new(pnorm_family(cfg)?, cfg.family.p_min)?,
    };
    let d = diagnostics(&family, &base, &grid);
    let finite = d.rows().all(|(_, r, g, s)| r.is_finite() && g.is_finite() && s.is_finite());
    out.file("diagnostics.csv", diagnostics_csv(&d));
    out.check("finite_diagnostics", finite, "all sup norms finite");
    Ok(())
}

fn dynamical(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let psi = metric(cfg)?;
    let g = &cfg.grid;
    let grid = UGrid::new(g.u_min, g.u_max, g.n)?;
    out.json(
        "profile.json",
        &json!({ "kind": psi.kind(), "degree": psi.degree(), "grid": grid, "psi": psi.samples(&grid) }),
    );
    let s = solve(cfg, &psi, &base_profile(&cfg.base)?, &discretization(cfg)?)?;
    out.file("spectrum.csv", spectrum_csv(&s, cfg.spectrum.group_tol));
    kernel_check(out, &s, cfg.metric.degree());
    Ok(())
}

fn bounds(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let b = &cfg.bounds;
    let base = base_profile(&cfg.base)?;
    let family = ContinuousFamily::new(pnorm_family(cfg)?, cfg.family.p_min)?;
    let d = b.grid.discretization(cfg.metric.degree())?;
    let var = Variation::Bundle { family: &family, base: &base };
    let r = variation_bounds(&var, b.s, &b.t, &b.modes, &d, b.samples, cfg.seed)?;
    let suite = norm_inequality_suite(b.operator_triples, b.operator_traces, cfg.seed);
    out.json("bounds.json", &r.checks);
    out.json(
        "variation.json",
        &json!({ "s": r.s, "delta": r.delta, "pi": r.pi, "fitted_c": r.fitted_c, "worst_energy_ratio": r.worst_energy_ratio }),
    );
    out.json("suite.json", &suite);
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.pass).map(|c| c.bound_name.as_str()).collect();
    out.check("variation_bounds", failed.is_empty(), format!("{} checks, failing: {failed:?}", r.checks.len()));
    out.check("operator_suite", suite.all_pass(), format!("{} instances", suite.instances));
    Ok(())
}
