use crate::assembly::ModeOperator;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// An eigenpair with M-normalized vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair {
    pub lambda: f64,
    pub vector: Vec<f64>,
}

/// Number of generalized eigenvalues of (Q, M) strictly below σ.
pub fn count_below(op: &ModeOperator, sigma: f64) -> usize {
    op.q.shifted(&op.m, sigma).negative_count()
}

/// Relative width at which bisection stops.
const BISECTION_RTOL: f64 = 4.0 * f64::EPSILON;
const BISECTION_ATOL: f64 = 1e-300;

fn bisect(op: &ModeOperator, j: usize, mut lo: f64, mut hi: f64) -> f64 {
    // invariant: count(lo) ≤ j < count(hi)
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECTION_RTOL * lo.abs().max(hi.abs()) + BISECTION_ATOL || mid <= lo || mid >= hi {
            break;
        }
        if count_below(op, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Upper bound exceeding the (j+1)-th eigenvalue.
fn upper_bound(op: &ModeOperator, j: usize) -> f64 {
    let mut hi = 1.0;
    while count_below(op, hi) <= j {
        hi *= 4.0;
        if !hi.is_finite() || j >= op.len() {
            return f64::INFINITY;
        }
    }
    hi
}

/// The j-th (0-based) eigenvalue by Sturm bisection.
pub fn eigenvalue(op: &ModeOperator, j: usize) -> Option<f64> {
    if j >= op.len() {
        return None;
    }
    let hi = upper_bound(op, j);
    if !hi.is_finite() {
        return None;
    }
    Some(bisect(op, j, -1e-8 * hi.max(1.0), hi))
}

/// All eigenvalues strictly below Λ, ascending.
pub fn eigenvalues_below(op: &ModeOperator, cap: f64) -> Vec<f64> {
    let n = count_below(op, cap);
    let floor = -1e-8 * cap.abs().max(1.0);
    let mut out = Vec::with_capacity(n);
    slice(op, floor, count_below(op, floor), cap, n, &mut out);
    out
}

/// Spectrum slicing: fills eigenvalues with indices in [c_lo, c_hi) located in [lo, hi).
fn slice(op: &ModeOperator, lo: f64, c_lo: usize, hi: f64, c_hi: usize, out: &mut Vec<f64>) {
    if c_hi <= c_lo {
        return;
    }
    if c_hi == c_lo + 1 {
        out.push(bisect(op, c_lo, lo, hi));
        return;
    }
    let mid = 0.5 * (lo + hi);
    if hi - lo <= BISECTION_RTOL * hi.abs().max(lo.abs()) + BISECTION_ATOL || mid <= lo || mid >= hi {
        // numerically coincident cluster
        out.extend(std::iter::repeat_n(mid, c_hi - c_lo));
        return;
    }
    let c_mid = count_below(op, mid);
    slice(op, lo, c_lo, mid, c_mid, out);
    slice(op, mid, c_mid, hi, c_hi, out);
}

/// Inverse iteration at shift near λ, then a Rayleigh-quotient update.
/// Sweeps stop once the residual stagnates at round-off level.
pub fn eigenvector(op: &ModeOperator, lambda: f64) -> Result<Eigenpair> {
    const SWEEPS: usize = 50;
    let n = op.len();
    let shift = lambda - 1e-10 * lambda.abs().max(1e-300);
    let lu = op.q.shifted(&op.m, shift).lu();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 101) as f64 / 101.0).collect();
    let mut best: Option<(f64, Eigenpair)> = None;
    for sweep in 0..SWEEPS {
        let mx = op.m.matvec(&x);
        let mut y = lu.solve(&mx);
        let ny = op.m.form(&y, &y).sqrt();
        if !(ny > 0.0) || !ny.is_finite() {
            return Err(Error::NoConvergence { what: "inverse iteration", iters: sweep });
        }
        y.iter_mut().for_each(|v| *v /= ny);
        let pair = Eigenpair { lambda: op.q.form(&y, &y), vector: y.clone() };
        let r = backward_error(op, &pair);
        x = y;
        if sweep >= 2 && best.as_ref().is_some_and(|(rb, _)| r > 0.5 * rb) {
            break;
        }
        if best.as_ref().is_none_or(|(rb, _)| r < *rb) {
            best = Some((r, pair));
        }
    }
    match best {
        Some((r, pair)) if r < 1e-9 => Ok(pair),
        _ => Err(Error::NoConvergence { what: "inverse iteration", iters: SWEEPS }),
    }
}

/// ‖Qx − λMx‖ / ‖|Q||x| + |λ||M||x|‖, the residual relative to its round-off scale.
pub fn backward_error(op: &ModeOperator, p: &Eigenpair) -> f64 {
    let qx = op.q.matvec(&p.vector);
    let mx = op.m.matvec(&p.vector);
    let r: Vec<f64> = qx.iter().zip(&mx).map(|(a, b)| a - p.lambda * b).collect();
    let qa = op.q.abs_matvec(&p.vector);
    let ma = op.m.abs_matvec(&p.vector);
    let scale: Vec<f64> = qa.iter().zip(&ma).map(|(a, b)| a + p.lambda.abs() * b).collect();
    norm(&r) / norm(&scale).max(f64::MIN_POSITIVE)
}

/// The n smallest eigenpairs of Qx = λMx.
pub fn solve_mode(op: &ModeOperator, n_eigs: usize) -> Result<Vec<Eigenpair>> {
    let n_eigs = n_eigs.min(op.len());
    let hi = upper_bound(op, n_eigs.saturating_sub(1));
    let floor = -1e-8 * hi.max(1.0);
    let mut values = Vec::with_capacity(n_eigs);
    slice(op, floor, count_below(op, floor), hi, count_below(op, hi).min(n_eigs + count_below(op, floor)), &mut values);
    values.truncate(n_eigs);
    let mut pairs = values.into_iter().map(|l| eigenvector(op, l)).collect::<Result<Vec<_>>>()?;
    // enforce M-orthogonality for numerically close values (none expected for Sturm–Liouville)
    for i in 1..pairs.len() {
        let (head, tail) = pairs.split_at_mut(i);
        let v = &mut tail[0].vector;
        for p in head.iter() {
            let c = op.m.form(&p.vector, v);
            v.iter_mut().zip(&p.vector).for_each(|(a, b)| *a -= c * b);
        }
        let nv = op.m.form(v, v).sqrt();
        v.iter_mut().for_each(|a| *a /= nv);
    }
    Ok(pairs)
}

/// xᵀQx / xᵀMx
pub fn rayleigh(op: &ModeOperator, x: &[f64]) -> Result<f64> {
    op.rayleigh(x)
}

/// Relative residual ‖Qx − λMx‖/‖Mx‖.
pub fn residual(op: &ModeOperator, pair: &Eigenpair) -> f64 {
    let my = op.m.matvec(&pair.vector);
    let r: Vec<f64> = op.q.matvec(&pair.vector).iter().zip(&my).map(|(a, b)| a - pair.lambda * b).collect();
    norm(&r) / norm(&my)
}

/// M-inner product.
pub fn m_dot(op: &ModeOperator, x: &[f64], y: &[f64]) -> f64 {
    dot(x, &op.m.matvec(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{reduce_mode, Discretization};
    use crate::linalg::SymTridiagonal;
    use crate::profiles::{make_fubini_study, make_pnorm, BaseProfile, ChiMap};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// −φ″ = μφ on [0, π] with φ(0) = φ(π) = 0, linear elements on n interior nodes.
    fn sine_model(n: usize) -> ModeOperator {
        let h = std::f64::consts::PI / (n + 1) as f64;
        let q = SymTridiagonal::new(vec![2.0 / h; n], vec![-1.0 / h; n - 1]);
        let m = SymTridiagonal::new(vec![4.0 * h / 6.0; n], vec![h / 6.0; n - 1]);
        let disc = Discretization::new(-1.0, 1.0, n, 0).unwrap();
        ModeOperator::from_pencil(0, q, m, disc).unwrap()
    }

    #[test]
    fn sine_spectrum() {
        let n = 5000;
        let op = sine_model(n);
        let h = std::f64::consts::PI / (n + 1) as f64;
        let pairs = solve_mode(&op, 5).unwrap();
        for (j, p) in pairs.iter().enumerate() {
            let jf = (j + 1) as f64;
            // exact discrete eigenvalue of the linear-element pencil
            let c = (jf * h).cos();
            let discrete = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
            assert!((p.lambda - discrete).abs() < 1e-9 * discrete);
            assert!((p.lambda - jf * jf).abs() < 1e-6 * jf * jf);
            assert!(backward_error(&op, p) < 1e-13);
            // the plain residual is limited by ‖Q‖/‖M‖ ~ h⁻² times round-off
            assert!(residual(&op, p) < 1e-6);
        }
    }

    fn dense_pencil_eigenvalues(op: &ModeOperator) -> Vec<f64> {
        // M = LLᵀ, eigenvalues of L⁻¹QL⁻ᵀ
        let l = op.m.to_dense().cholesky().unwrap().l();
        let li = l.clone().try_inverse().unwrap();
        let a: DMatrix<f64> = &li * op.q.to_dense() * li.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let mut v: Vec<f64> = a.symmetric_eigenvalues().iter().cloned().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn bisection_matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = Discretization::new(-6.0, 6.0, 200, 3).unwrap();
        for trial in 0..4 {
            let psi = make_pnorm(trial, &ChiMap::Linear, 2 + trial as i32).unwrap();
            let k = rng.random_range(-2..=3);
            let op = reduce_mode(&psi, &BaseProfile::fubini_study(), k, &d).unwrap();
            let dense = dense_pencil_eigenvalues(&op);
            let cap = dense[30];
            let ours = eigenvalues_below(&op, cap * (1.0 + 1e-9));
            assert_eq!(ours.len(), 31);
            for (a, b) in ours.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn flat_problem_has_constant_ground_state() {
        let psi = make_fubini_study(0).unwrap();
        let d = Discretization::new(-8.0, 8.0, 400, 0).unwrap();
        let op = reduce_mode(&psi, &BaseProfile::fubini_study(), 0, &d).unwrap();
        let p = &solve_mode(&op, 1).unwrap()[0];
        assert!(p.lambda.abs() < 1e-10);
        let v0 = p.vector[0];
        assert!(p.vector.iter().all(|v| (v - v0).abs() < 1e-8 * v0.abs()));
    }

    #[test]
    fn rayleigh_quotients() {
        let psi = make_fubini_study(1).unwrap();
        let d = Discretization::new(-10.0, 10.0, 600, 2).unwrap();
        let op = reduce_mode(&psi, &BaseProfile::fubini_study(), 0, &d).unwrap();
        let pairs = solve_mode(&op, 3).unwrap();
        assert!(rayleigh(&op, &pairs[0].vector).unwrap().abs() < 1e-10);
        assert!((rayleigh(&op, &pairs[1].vector).unwrap() - pairs[1].lambda).abs() < 1e-12 * pairs[1].lambda);
        assert!(rayleigh(&op, &vec![0.0; op.len()]).is_err());
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((m_dot(&op, &pairs[i].vector, &pairs[j].vector) - expect).abs() < 1e-9);
            }
        }
    }
}
