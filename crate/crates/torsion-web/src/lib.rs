//! Browser bindings: spectra of radial metrics, ζ′(0) of an eigenvalue list and
//! the gradient trace of an iterated quadratic map. Results are JSON strings.

use num_complex::Complex64;
use serde_json::{json, Value};
use torsion::assembly::Discretization;
use torsion::eigen::{compute_spectrum, SpectrumOptions};
use torsion::heat::{fit_expansion, FitOptions, FitWindow, ThetaSeries};
use torsion::profiles::{make_canonical, make_fubini_study, make_pnorm, pointwise_gradient, BaseProfile, ChiMap, Polynomial};
use torsion::zeta::{zeta_prime0, QuadratureSpec};
use wasm_bindgen::prelude::*;

/// Relative tolerance for grouping eigenvalues in the demo; coarse grids split degeneracies at O(h²).
const GROUP_TOL: f64 = 1e-2;

pub fn spectrum_groups(kind: &str, degree: u32, p: i32, nodes: usize, extra_modes: u32, max_lambda: f64) -> torsion::Result<Value> {
    let m = degree.into();
    let psi = match kind {
        "fubini_study" => make_fubini_study(m)?,
        "canonical" => make_canonical(m)?,
        "pnorm" => make_pnorm(m, &ChiMap::Power2, p)?,
        _ => return Err(torsion::Error::Invalid { what: "kind", why: format!("unknown metric `{kind}`") }),
    };
    let d = Discretization::for_degree(degree).with_nodes(nodes)?.with_k_max(degree + extra_modes);
    let s = compute_spectrum(&psi, &BaseProfile::fubini_study(), &d, SpectrumOptions { max_lambda, ..Default::default() })?;
    let groups: Vec<Value> = s
        .groups(GROUP_TOL)
        .into_iter()
        .map(|g| json!({ "lambda": g.lambda, "multiplicity": g.multiplicity, "modes": g.modes }))
        .collect();
    Ok(json!({ "kernel_dim": s.kernel_dim, "gap_ratio": s.gap_ratio, "cutoff": s.cutoff, "groups": groups }))
}

/// ζ′(0) through the heat-trace route, next to the exact −Σ log λ of a finite list.
pub fn zeta_prime_of(lambdas: &[f64]) -> torsion::Result<Value> {
    let th = ThetaSeries::new(lambdas.to_vec(), None)?;
    let e = fit_expansion(&th, FitWindow::for_theta(&th), FitOptions::default())?;
    let zp = zeta_prime0(&th, &e, QuadratureSpec::default())?;
    let exact: f64 = -lambdas.iter().map(|l| l.ln()).sum::<f64>();
    Ok(json!({ "zeta_prime0": zp.value, "exact": exact, "b0": e.b0, "fit_residual": e.residual }))
}

/// |∂ψ_n| and the gradient ratio at z for z² + c pulling back Fubini-Study.
pub fn gradient_trace(c: Complex64, z: Complex64, n_max: u32) -> torsion::Result<Value> {
    let poly = Polynomial::unicritical(2, c)?;
    let psi0 = make_fubini_study(1)?;
    let rows: Vec<Value> = pointwise_gradient(&poly, n_max, &psi0, &BaseProfile::fubini_study(), z)
        .into_iter()
        .map(|r| json!({ "n": r.n, "dlog_h": r.dlog_h.norm(), "grad_ratio": r.grad_ratio }))
        .collect();
    Ok(Value::Array(rows))
}

fn js(r: torsion::Result<Value>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn spectrum(kind: &str, degree: u32, p: i32, nodes: usize, extra_modes: u32, max_lambda: f64) -> Result<String, JsError> {
    js(spectrum_groups(kind, degree, p, nodes, extra_modes, max_lambda))
}

#[wasm_bindgen]
pub fn zeta_prime(lambdas: &[f64]) -> Result<String, JsError> {
    js(zeta_prime_of(lambdas))
}

#[wasm_bindgen]
pub fn gradient(c_re: f64, c_im: f64, z_re: f64, z_im: f64, n_max: u32) -> Result<String, JsError> {
    js(gradient_trace(Complex64::new(c_re, c_im), Complex64::new(z_re, z_im), n_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_groups() {
        let v = spectrum_groups("fubini_study", 0, 0, 1024, 8, 15.0).unwrap();
        assert_eq!(v["kernel_dim"], 1);
        let mult: Vec<u64> = v["groups"].as_array().unwrap().iter().map(|g| g["multiplicity"].as_u64().unwrap()).collect();
        assert_eq!(mult, [3, 5, 7]);
    }

    #[test]
    fn finite_list_matches_log_determinant() {
        let v = zeta_prime_of(&[1.0, 2.0, 3.5]).unwrap();
        let (a, b) = (v["zeta_prime0"].as_f64().unwrap(), v["exact"].as_f64().unwrap());
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }

    #[test]
    fn chebyshev_gradient_doubles() {
        let v = gradient_trace(Complex64::new(-2.0, 0.0), Complex64::new(2.0, 0.0), 5).unwrap();
        for row in v.as_array().unwrap() {
            let n = row["n"].as_i64().unwrap() as i32;
            let want = 2f64.powi(n + 1) / 5.0;
            assert!((row["dlog_h"].as_f64().unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_metric_is_rejected() {
        assert!(spectrum_groups("flat", 1, 0, 64, 2, 10.0).is_err());
    }
}
