//! Acceptance run: each criterion prints one PASS/FAIL line, and the process
//! exits non-zero if any fails.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;
use torsion::assembly::*;
use torsion::eigen::*;
use torsion::heat::*;
use torsion::opcalc::*;
use torsion::profiles::*;
use torsion::zeta::*;

fn sci(v: &[f64], digits: usize) -> String {
    v.iter().map(|x| format!("{x:.digits$e}")).collect::<Vec<_>>().join(", ")
}

type Outcome = Result<(bool, String), torsion::Error>;

fn spectrum(psi: &MetricProfile, base: &BaseProfile, max_lambda: f64) -> Result<Spectrum, torsion::Error> {
    let d = Discretization::for_degree(psi.degree());
    compute_spectrum(psi, base, &d, SpectrumOptions { max_lambda, ..Default::default() })
}

fn pnorm_family(m: i64, ps: std::ops::RangeInclusive<i32>) -> Vec<MetricProfile> {
    ps.map(|p| make_pnorm(m, &ChiMap::Power2, p).unwrap()).collect()
}

fn kernel_dimension() -> Outcome {
    let fs = BaseProfile::fubini_study();
    let mut worst_gap = f64::INFINITY;
    let mut bad = Vec::new();
    for m in 0..=3i64 {
        let metrics = [
            make_fubini_study(m)?,
            make_canonical(m)?,
            make_pnorm(m, &ChiMap::Power2, 6)?,
        ];
        for psi in &metrics {
            let s = spectrum(psi, &fs, 50.0)?;
            worst_gap = worst_gap.min(s.gap_ratio);
            let separated = s.gap_ratio > 1e6;
            if s.kernel_dim != m as usize + 1 || !separated {
                bad.push(format!("{} m={m}: dim {} gap {:.1e}", psi.kind().tag(), s.kernel_dim, s.gap_ratio));
            }
        }
    }
    Ok((bad.is_empty(), format!("12 metrics, smallest gap ratio {worst_gap:.2e} {}", bad.join("; "))))
}

fn sphere_harmonics() -> Outcome {
    let s = spectrum(&make_fubini_study(0)?, &BaseProfile::fubini_study(), 50.0)?;
    // the kernel is the first group; the nonzero groups follow
    let groups: Vec<Group> = s.groups(1e-3).into_iter().take(5).collect();
    let mut mults = vec![s.kernel_dim];
    mults.extend(groups.iter().map(|g| g.multiplicity));
    let ok = mults == [1, 3, 5, 7, 9, 11];
    let l1 = groups[0].lambda;
    let worst = groups
        .iter()
        .zip(1..)
        .map(|(g, l)| {
            let target = (l * (l + 1)) as f64 / 2.0;
            (g.lambda / l1 - target).abs() / target
        })
        .fold(0.0, f64::max);
    Ok((ok && worst < 1e-3, format!("multiplicities {mults:?}, worst ratio error {worst:.2e}")))
}

fn heat_coefficients() -> Outcome {
    let th = ThetaSeries::new((1..=100_000).map(|j| j as f64).collect(), Some(100_000.5))?;
    let e = fit_expansion(&th, FitWindow::for_theta(&th), FitOptions::default())?;
    let synthetic = (e.b_minus1 - 1.0).abs() < 1e-3 && (e.b0 + 0.5).abs() < 1e-3;
    let family = ContinuousFamily::new(pnorm_family(1, 3..=9), 3)?;
    let fs = BaseProfile::fubini_study();
    let d = Discretization::for_degree(1);
    let mut thetas = Vec::new();
    for s in [3.0, 4.5, 6.0, 7.5, 9.0] {
        let psi = family.at(s)?;
        thetas.push(ThetaSeries::from_spectrum(&compute_spectrum(&psi, &fs, &d, SpectrumOptions::default())?)?);
    }
    let w = FitWindow::for_family(&thetas);
    let b: Vec<f64> = thetas.iter().map(|t| fit_expansion(t, w, FitOptions::default()).map(|e| e.b_minus1)).collect::<Result<_, _>>()?;
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    let spread = b.iter().map(|x| (x - mean).abs() / mean).fold(0.0, f64::max);
    Ok((
        synthetic && spread < 0.02,
        format!("synthetic b₋₁={:.6} b₀={:.6}; family b₋₁ {:.5?} spread {spread:.1e}", e.b_minus1, e.b0, b),
    ))
}

fn zeta_oracles() -> Outcome {
    let mut worst_single = 0.0f64;
    for lam in [0.5, 1.0, 2.0, 5.0] {
        let th = ThetaSeries::new(vec![lam], None)?;
        let e = fit_expansion(&th, FitWindow::for_theta(&th), FitOptions::default())?;
        let v = zeta_prime0(&th, &e, QuadratureSpec::default())?.value;
        worst_single = worst_single.max((v + lam.ln()).abs());
    }
    let th = ThetaSeries::new((1..=100_000).map(|j| j as f64).collect(), Some(100_000.5))?;
    let e = fit_expansion(&th, FitWindow::for_theta(&th), FitOptions::default())?;
    let v = zeta_prime0(&th, &e, QuadratureSpec::default())?.value;
    let riemann = (v + 0.5 * (2.0 * PI).ln()).abs();
    Ok((worst_single < 1e-4 && riemann < 1e-3, format!("single eigenvalue err {worst_single:.1e}, integers err {riemann:.1e}")))
}

struct FamilyRun {
    profiles: Vec<MetricProfile>,
    spectra: Vec<Spectrum>,
    zeta: FamilyZeta,
}

fn family_run() -> Result<FamilyRun, torsion::Error> {
    let fs = BaseProfile::fubini_study();
    let d = Discretization::for_degree(1);
    let profiles = pnorm_family(1, 3..=9);
    let spectra = profiles
        .iter()
        .map(|p| compute_spectrum(p, &fs, &d, SpectrumOptions::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let members = spectra
        .iter()
        .zip(3..)
        .map(|(s, p)| ThetaSeries::from_spectrum(s).map(|t| (p as f64, t)))
        .collect::<Result<Vec<_>, _>>()?;
    let limit = ThetaSeries::from_spectrum(&compute_spectrum(&make_canonical(1)?, &fs, &d, SpectrumOptions::default())?)?;
    let zeta = zeta_family(&members, Some(&limit), FitOptions::default(), QuadratureSpec::default())?;
    Ok(FamilyRun { profiles, spectra, zeta })
}

fn torsion_convergence(run: &FamilyRun) -> Outcome {
    let lim = &run.zeta.limit;
    // gaps[i] joins p = 3 + i and p = 4 + i; from p = 5 on each must shrink by 1.5
    let shrink: Vec<f64> = lim.gaps[2..].windows(2).map(|g| g[0] / g[1]).collect();
    let shrinking = shrink.iter().all(|r| *r >= 1.5);
    let disc = lim.discrepancy.unwrap_or(f64::INFINITY);
    let zp: Vec<String> = run.zeta.rows.iter().map(|r| format!("{:.6}", r.zeta_prime0)).collect();
    Ok((
        lim.cauchy && shrinking && disc < 5e-3,
        format!(
            "ζ′ [{}], limit {:.6}, gap ratios {:.2?}, |last − limit| {disc:.1e}",
            zp.join(", "),
            lim.direct.unwrap_or(f64::NAN),
            shrink
        ),
    ))
}

fn lambda1_uniformity(run: &FamilyRun) -> Outcome {
    let d = Discretization::for_degree(1);
    let r = lambda1_family(&run.profiles, &run.spectra, &d)?;
    let tightest = r.pairs.iter().map(|c| c.ratio.max(1.0 / c.ratio) * c.alpha).fold(0.0, f64::max);
    Ok((
        r.all_pass,
        format!("min λ₁ {:.6}, {} pairs inside [α, 1/α], tightest α·max(ratio, 1/ratio) = {tightest:.3}", r.min_lambda1, r.pairs.len()),
    ))
}

fn duhamel() -> Outcome {
    let fs = BaseProfile::fubini_study();
    let fam = ContinuousFamily::new(pnorm_family(1, 1..=6), 1)?;
    let var = Variation::Bundle { family: &fam, base: &fs };
    let d = Discretization::new(-8.0, 8.0, 160, 6)?;
    let r = duhamel_check(&var, 2.5, 1.0, &[1e-2, 5e-3, 2.5e-3], &[-1, 0, 1, 2, 3], &d)?;
    let res: Vec<f64> = r.levels.iter().map(|l| l.residual).collect();
    let ok = res.iter().all(|x| *x < 1e-4) && (r.order - 2.0).abs() < 0.2;
    Ok((ok, format!("residuals [{}], order {:.3}", sci(&res, 2), r.order)))
}

fn variation_bounds_all() -> Outcome {
    let fs = BaseProfile::fubini_study();
    let d = Discretization::new(-8.0, 8.0, 160, 6)?;
    let ts = [0.25, 1.0, 4.0];
    let modes = [-2, -1, 0, 1, 2, 3];
    let fam = ContinuousFamily::new(pnorm_family(1, 1..=6), 1)?;
    let bundle = variation_bounds(&Variation::Bundle { family: &fam, base: &fs }, 2.5, &ts, &modes, &d, 200, 7)?;
    let bases = ContinuousFamily::new((2..=7).map(|p| BaseProfile::tx_power(p as f64).unwrap()).collect(), 2)?;
    let psi = make_fubini_study(1)?;
    let base = variation_bounds(&Variation::Base { psi: &psi, family: &bases }, 3.5, &ts, &modes, &d, 200, 7)?;
    let checks: Vec<&BoundCheck> = bundle.checks.iter().chain(&base.checks).collect();
    let min_ratio = checks.iter().map(|c| c.slack / c.rhs).fold(f64::INFINITY, f64::min);
    Ok((
        checks.iter().all(|c| c.pass),
        format!(
            "{} checks, smallest relative slack {min_ratio:.3}, fitted c {:.3}, exact worst energy ratio {:.3} (reported)",
            checks.len(),
            bundle.fitted_c.unwrap_or(f64::NAN),
            bundle.worst_energy_ratio.unwrap_or(f64::NAN)
        ),
    ))
}

fn dynamical() -> Outcome {
    let base = make_fubini_study(1)?;
    let can = make_canonical(1)?;
    let grid = UGrid::symmetric(12.0, 1025)?;
    let sq = Polynomial::unicritical(2, Complex64::new(0.0, 0.0))?;
    let (p, _) = make_dynamical(&sq, 20, &base, &grid)?;
    let err = grid.points().map(|u| (p.psi(u) - can.psi(u)).abs()).fold(0.0, f64::max);
    let cheb = Polynomial::unicritical(2, Complex64::new(-2.0, 0.0))?;
    let rows = pointwise_gradient(&cheb, 10, &base, &BaseProfile::canonical(), Complex64::new(2.0, 0.0));
    let rel = rows
        .iter()
        .map(|r| {
            let e = 2f64.powi(r.n as i32 + 1) / 5.0;
            (r.dlog_h.norm() - e).abs() / e
        })
        .fold(0.0, f64::max);
    Ok((err < 1e-6 && rel < 1e-9, format!("z² sup error {err:.2e} at n=20, z²−2 gradient rel. error {rel:.1e}")))
}

fn supporting_inequalities() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut log_failures = 0;
    for _ in 0..1000 {
        let eps = rng.random_range(0.01..0.49);
        let n = rng.random_range(1..50);
        let phi: Vec<f64> = (0..n).map(|_| 1.0 + eps * rng.random_range(-0.999..0.999)).collect();
        if !log_bound_check(&phi, eps)?.holds {
            log_failures += 1;
        }
    }
    ok &= log_failures == 0;
    notes.push(format!("log bounds {}/1000", 1000 - log_failures));

    let d = Discretization::new(-15.0, 15.0, 3000, 4)?;
    let phi = |u: f64| {
        let g = (-0.5 * u * u).exp();
        [g, -u * g, (u * u - 1.0) * g]
    };
    let psi = |u: f64| {
        let c = 1.0 / u.cosh();
        let th = u.tanh();
        [c * c, -2.0 * c * c * th, c * c * (4.0 * th * th - 2.0 * c * c)]
    };
    let g = green_identity_check(&phi, &psi, &d)?;
    ok &= g.residual.abs() < 1e-6;
    notes.push(format!("Green residual {:.1e} of scale {:.3}", g.residual.abs(), g.scale));

    let suite = norm_inequality_suite(500, 200, 17);
    ok &= suite.all_pass() && suite.instances == 700;
    notes.push(format!("operator suite {} instances, failures {}", suite.instances, suite.checks.iter().map(|c| c.failures).sum::<usize>()));

    let sandwich = {
        let dd = Discretization::new(-6.0, 6.0, 120, 2)?;
        let fs = BaseProfile::fubini_study();
        let (a, b) = (reduce_mode(&make_pnorm(1, &ChiMap::Power2, 6)?, &fs, 0, &dd)?, reduce_mode(&make_pnorm(1, &ChiMap::Power2, 7)?, &fs, 0, &dd)?);
        let (u, v) = (InnerProduct::new(a.m.to_dense())?, InnerProduct::new(b.m.to_dense())?);
        let t = FiniteOperator::real(a.q.to_dense(), u.clone())?;
        metric_sandwich(&t, &u, &v)?
    };
    ok &= sandwich.holds;
    notes.push(format!("σ_n sandwich ε={:.2e}", sandwich.eps));

    let grid = UGrid::symmetric(12.0, 4801)?;
    let fs = cheeger_estimate(&BaseProfile::fubini_study(), &grid)?;
    let l1 = spectrum(&make_fubini_study(0)?, &BaseProfile::fubini_study(), 10.0)?.lambda1()?;
    ok &= l1 >= fs.h * fs.h / 4.0;
    notes.push(format!("λ₁={l1:.5} ≥ h²/4={:.4}", fs.h * fs.h / 4.0));
    let stated = 2f64.powf(-2.0 * PI * PI / 3.0);
    let mut worst = f64::INFINITY;
    for q in 2..=12 {
        for p in q..=12 {
            let (lo, hi) = tx_ratio_range(q as f64, p as f64, &grid)?;
            ok &= stated <= lo && hi <= 1.0 + 1e-12;
            worst = worst.min(lo);
        }
    }
    notes.push(format!("TX ratio min {worst:.4} ≥ {stated:.2e}"));
    let h2 = cheeger_estimate(&BaseProfile::tx_power(2.0)?, &grid)?.h;
    let h12 = cheeger_estimate(&BaseProfile::tx_power(12.0)?, &grid)?.h;
    let (lo, hi) = tx_ratio_range(2.0, 12.0, &grid)?;
    let r = h2 / h12;
    ok &= lo.sqrt() / hi <= r && r <= hi.sqrt() / lo;
    notes.push(format!("h₂/h₁₂ = {r:.4} in [{:.4}, {:.4}]", lo.sqrt() / hi, hi.sqrt() / lo));
    Ok((ok, notes.join(", ")))
}

fn divergence() -> Outcome {
    let fs = BaseProfile::fubini_study();
    let levels = [41, 401, 4001, 40001];
    let cusp = divergence_diagnostic(&make_cusp(20.0, 0.02)?, &fs, 1.0, 1.0, &levels)?;
    let smooth = divergence_diagnostic(&make_fubini_study(0)?, &fs, 1.0, 1.0, &levels)?;
    let c: Vec<f64> = cusp.iter().map(|l| l.norm2).collect();
    let s: Vec<f64> = smooth.iter().map(|l| l.norm2).collect();
    let growth = c[3] / c[0];
    let drift = s.iter().cloned().fold(0.0, f64::max) / s.iter().cloned().fold(f64::INFINITY, f64::min);
    let monotone = c.windows(2).all(|w| w[1] > w[0]);
    // per-decade increments against the logarithmic rate 400·ln 10 of the √|u| cusp
    let inc: Vec<f64> = c.windows(2).map(|w| w[1] - w[0]).collect();
    Ok((
        monotone && growth > 10.0 && drift < 1.05,
        format!("cusp ‖Δf‖² [{}] (×{growth:.1}), decade increments {inc:.0?} vs 921, smooth drift ×{drift:.5}", sci(&c, 4)),
    ))
}

fn main() {
    let started = Instant::now();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let t0 = Instant::now();
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {id:>2} {name}: {detail} ({:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
    };
    report(1, "kernel dimension", &kernel_dimension);
    report(2, "sphere harmonics", &sphere_harmonics);
    report(3, "heat-trace coefficients", &heat_coefficients);
    report(4, "zeta oracles", &zeta_oracles);
    match family_run() {
        Ok(run) => {
            report(5, "torsion convergence", &|| torsion_convergence(&run));
            report(6, "first eigenvalue uniformity", &|| lambda1_uniformity(&run));
        }
        Err(e) => {
            report(5, "torsion convergence", &|| Err(e.clone()));
            report(6, "first eigenvalue uniformity", &|| Err(e.clone()));
        }
    }
    report(7, "Duhamel formula", &duhamel);
    report(8, "variation bounds", &variation_bounds_all);
    report(9, "dynamical metrics", &dynamical);
    report(10, "supporting inequalities", &supporting_inequalities);
    report(11, "divergence diagnostic", &divergence);
    println!("acceptance: {} failed, {:.1} s total", failed, started.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
