//! Singular values, nuclear norms and traces of finite operators on a space with
//! a non-Euclidean inner product, and randomized checks of the standard inequalities.

use crate::error::{invalid, Error, Result};
use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

pub type CMatrix = DMatrix<Complex64>;

/// ⟨x, y⟩ = x* G y for a real symmetric positive definite G = LLᵀ.
#[derive(Clone, Debug)]
pub struct InnerProduct {
    gram: DMatrix<f64>,
    l: DMatrix<f64>,
}

impl InnerProduct {
    pub fn euclidean(n: usize) -> Self {
        Self { gram: DMatrix::identity(n, n), l: DMatrix::identity(n, n) }
    }

    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        if !gram.is_square() || gram.nrows() == 0 {
            return invalid("inner_product", "Gram matrix must be square and non-empty");
        }
        let asym = (&gram - gram.transpose()).amax();
        if asym > 1e-12 * gram.amax() {
            return invalid("inner_product", format!("Gram matrix is not symmetric (defect {asym:e})"));
        }
        let l = Cholesky::new(gram.clone())
            .ok_or(Error::NotPositiveDefinite { row: 0, pivot: f64::NAN })?
            .unpack();
        Ok(Self { gram, l })
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Lᵀ as a complex matrix: maps coordinates to an orthonormal frame.
    fn to_frame(&self) -> CMatrix {
        self.l.transpose().map(Complex64::from)
    }

    fn to_coordinates(&self) -> CMatrix {
        let inv = self.l.clone().try_inverse().expect("Cholesky factor is invertible");
        inv.transpose().map(Complex64::from)
    }

    pub fn norm(&self, x: &[Complex64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(x);
        (self.to_frame() * v).norm()
    }

    /// [a, b] such that a‖x‖_other ≤ ‖x‖_self ≤ b‖x‖_other, from the pencil (G_self, G_other).
    pub fn equivalence(&self, other: &InnerProduct) -> Result<(f64, f64)> {
        if self.dim() != other.dim() {
            return invalid("inner_product", "dimension mismatch");
        }
        let li = other.l.clone().try_inverse().expect("Cholesky factor is invertible");
        let c = &li * &self.gram * li.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let mu = c.symmetric_eigenvalues();
        Ok((mu.min().max(0.0).sqrt(), mu.max().sqrt()))
    }
}

/// A square matrix acting on (Cⁿ, ⟨·,·⟩).
#[derive(Clone, Debug)]
pub struct FiniteOperator {
    matrix: CMatrix,
    ip: InnerProduct,
}

impl FiniteOperator {
    pub fn new(matrix: CMatrix, ip: InnerProduct) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != ip.dim() {
            return invalid("matrix", format!("{}x{} does not act on dimension {}", matrix.nrows(), matrix.ncols(), ip.dim()));
        }
        Ok(Self { matrix, ip })
    }

    pub fn real(matrix: DMatrix<f64>, ip: InnerProduct) -> Result<Self> {
        Self::new(matrix.map(Complex64::from), ip)
    }

    pub fn euclidean(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, InnerProduct::euclidean(n))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn inner_product(&self) -> &InnerProduct {
        &self.ip
    }

    /// Same operator measured in another inner product.
    pub fn with_inner_product(&self, ip: InnerProduct) -> Result<Self> {
        Self::new(self.matrix.clone(), ip)
    }

    /// The matrix of the operator in an orthonormal frame: Lᵀ T L^{−T}.
    fn conjugated(&self) -> CMatrix {
        self.ip.to_frame() * &self.matrix * self.ip.to_coordinates()
    }

    /// Singular values in the inner-product geometry, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.conjugated().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub fn operator_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.singular_values().iter().sum()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Eigenvalues with multiplicity, from the complex Schur form.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let schur = nalgebra::linalg::Schur::<Complex64, Dyn>::new(self.matrix.clone());
        let (_, t) = schur.unpack();
        t.diagonal().iter().copied().collect()
    }

    /// Best approximation of rank ≤ r in the inner-product operator norm.
    pub fn truncate(&self, r: usize) -> FiniteOperator {
        let svd = self.conjugated().svd(true, true);
        let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
        let mut s = svd.singular_values.clone();
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        for &i in order.iter().skip(r) {
            s[i] = 0.0;
        }
        let framed = u * CMatrix::from_diagonal(&s.map(Complex64::from)) * vt;
        let matrix = self.ip.to_coordinates() * framed * self.ip.to_frame();
        FiniteOperator { matrix, ip: self.ip.clone() }
    }

    fn compose(&self, other: &FiniteOperator) -> FiniteOperator {
        FiniteOperator { matrix: &self.matrix * &other.matrix, ip: self.ip.clone() }
    }

    #[cfg(test)]
    fn sub(&self, other: &FiniteOperator) -> FiniteOperator {
        FiniteOperator { matrix: &self.matrix - &other.matrix, ip: self.ip.clone() }
    }

    fn add(&self, other: &FiniteOperator) -> FiniteOperator {
        FiniteOperator { matrix: &self.matrix + &other.matrix, ip: self.ip.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    /// min over instances of (rhs − lhs)/max(rhs, 1)
    pub worst_slack: f64,
}

impl InequalityCheck {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), instances: 0, failures: 0, worst_slack: f64::INFINITY }
    }

    /// Records lhs ≤ rhs, allowing round-off of size tol·max(rhs, 1).
    fn record(&mut self, lhs: f64, rhs: f64, tol: f64) {
        let scale = rhs.abs().max(1.0);
        let slack = (rhs - lhs) / scale;
        self.instances += 1;
        if slack < -tol {
            self.failures += 1;
        }
        self.worst_slack = self.worst_slack.min(slack);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub instances: usize,
    pub checks: Vec<InequalityCheck>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.failures == 0)
    }
}

const ROUNDOFF: f64 = 1e-11;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, complex: bool) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
        Complex64::new(re, im)
    })
}

/// Random SPD Gram matrix with condition number up to about 10.
pub fn random_inner_product(rng: &mut ChaCha8Rng, n: usize) -> InnerProduct {
    let b = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let g = &b * b.transpose() / n as f64 + DMatrix::identity(n, n) * 0.5;
    InnerProduct::new((&g + g.transpose()) * 0.5).expect("shifted Gram matrix is SPD")
}

/// ‖ATB‖₁ ≤ ‖A‖‖T‖₁‖B‖ on `triples` random triples, and on `traces` random operators
/// |Tr A| ≤ Σ|λ| ≤ ‖A‖₁, Σλ = Tr A, Tr(AB) = Tr(BA) and the triangle inequality.
pub fn norm_inequality_suite(triples: usize, traces: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = InequalityCheck::new("nuclear_sandwich");
    let mut trace_bound = InequalityCheck::new("trace_le_nuclear");
    let mut weyl = InequalityCheck::new("eigenvalue_sum_le_nuclear");
    let mut lidskii = InequalityCheck::new("eigenvalue_sum_eq_trace");
    let mut commute = InequalityCheck::new("trace_commutes");
    let mut triangle = InequalityCheck::new("nuclear_triangle");
    for i in 0..triples {
        let n = rng.random_range(2..=12);
        let ip = random_inner_product(&mut rng, n);
        let draw = |rng: &mut ChaCha8Rng| FiniteOperator { matrix: random_matrix(rng, n, i % 2 == 1), ip: ip.clone() };
        let (a, t, b) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let lhs = a.compose(&t).compose(&b).nuclear_norm();
        chain.record(lhs, a.operator_norm() * t.nuclear_norm() * b.operator_norm(), ROUNDOFF);
    }
    for i in 0..traces {
        let n = rng.random_range(2..=12);
        let ip = random_inner_product(&mut rng, n);
        let complex = i % 2 == 1;
        let a = FiniteOperator { matrix: random_matrix(&mut rng, n, complex), ip: ip.clone() };
        let b = FiniteOperator { matrix: random_matrix(&mut rng, n, complex), ip };
        let nuc = a.nuclear_norm();
        let eig = a.eigenvalues();
        let tr = a.trace();
        trace_bound.record(tr.norm(), nuc, ROUNDOFF);
        weyl.record(eig.iter().map(|l| l.norm()).sum(), nuc, ROUNDOFF);
        let esum: Complex64 = eig.iter().sum();
        lidskii.record((esum - tr).norm(), 1e-10 * nuc, 0.0);
        let ab = a.compose(&b).trace();
        let ba = b.compose(&a).trace();
        commute.record((ab - ba).norm(), 1e-12 * a.nuclear_norm().max(1.0) * b.nuclear_norm().max(1.0), 0.0);
        triangle.record(a.add(&b).nuclear_norm(), nuc + b.nuclear_norm(), ROUNDOFF);
    }
    SuiteReport { seed, instances: triples + traces, checks: vec![chain, trace_bound, weyl, lidskii, commute, triangle] }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    /// smallest ε with (1−ε)‖x‖_v ≤ ‖x‖_u ≤ (1+ε)‖x‖_v
    pub eps: f64,
    /// σ_n(T)_u / σ_n(T)_v for each n (NaN where σ_n(T)_v vanishes)
    pub ratios: Vec<f64>,
    pub nuclear_ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Singular values of T in two equivalent inner products stay within (1±ε)/(1∓ε).
pub fn metric_sandwich(t: &FiniteOperator, u: &InnerProduct, v: &InnerProduct) -> Result<SandwichReport> {
    let (a, b) = u.equivalence(v)?;
    let eps = (1.0 - a).max(b - 1.0);
    if !(eps < 1.0) {
        return invalid("inner_product", format!("norms differ by ε = {eps}, need ε < 1"));
    }
    let su = t.with_inner_product(u.clone())?.singular_values();
    let sv = t.with_inner_product(v.clone())?.singular_values();
    let (lower, upper) = ((1.0 - eps) / (1.0 + eps), (1.0 + eps) / (1.0 - eps));
    let tol = 1e-12;
    let holds = su.iter().zip(&sv).all(|(x, y)| lower * y <= x + tol * y && *x <= upper * y + tol * y);
    let ratios = su.iter().zip(&sv).map(|(x, y)| if *y > 0.0 { x / y } else { f64::NAN }).collect();
    let (nu, nv): (f64, f64) = (su.iter().sum(), sv.iter().sum());
    let nuclear_ratio = nu / nv;
    let holds = holds && lower <= nuclear_ratio + tol && nuclear_ratio <= upper + tol;
    Ok(SandwichReport { eps, ratios, nuclear_ratio, lower, upper, holds })
}
