use super::dense::DensePencil;
use crate::assembly::{default_boundaries, CellQuadrature, Discretization, ModeOperator};
use crate::error::Result;
use crate::linalg::SymTridiagonal;
use crate::profiles::{BaseProfile, ContinuousFamily, MetricProfile};
use nalgebra::DMatrix;

/// A one-parameter metric variation: either the bundle metric or the base metric moves.
#[derive(Clone, Copy, Debug)]
pub enum Variation<'a> {
    Bundle { family: &'a ContinuousFamily<MetricProfile>, base: &'a BaseProfile },
    Base { psi: &'a MetricProfile, family: &'a ContinuousFamily<BaseProfile> },
}

impl<'a> Variation<'a> {
    pub fn at(&self, s: f64) -> Result<(MetricProfile, BaseProfile)> {
        match *self {
            Variation::Bundle { family, base } => Ok((family.at(s)?, base.clone())),
            Variation::Base { psi, family } => Ok((psi.clone(), family.at(s)?)),
        }
    }

    pub fn degree(&self) -> u32 {
        match *self {
            Variation::Bundle { family, .. } => family.members()[0].degree(),
            Variation::Base { psi, .. } => psi.degree(),
        }
    }

    pub fn quadrature(&self, s: f64, d: &Discretization) -> Result<CellQuadrature> {
        let (psi, base) = self.at(s)?;
        CellQuadrature::new(&psi, &base, d)
    }

    pub fn mode(&self, s: f64, k: i32, d: &Discretization) -> Result<ModeOperator> {
        let (l, r) = default_boundaries(k, self.degree());
        self.quadrature(s, d)?.mode(k, l, r)
    }

    /// ∂_s log h_E(s)(u)
    pub fn dpsi(&self, s: f64, u: f64) -> f64 {
        match *self {
            Variation::Bundle { family, .. } => family.dlog_ds(s, u).unwrap_or(f64::NAN),
            Variation::Base { .. } => 0.0,
        }
    }

    /// ∂_s log w(s)(u)
    pub fn dlogw(&self, s: f64, u: f64) -> f64 {
        match *self {
            Variation::Bundle { .. } => 0.0,
            Variation::Base { family, .. } => family.dlog_ds(s, u).unwrap_or(f64::NAN),
        }
    }

    /// ∂_u ∂_s log h_E(s)(u)
    pub fn d2psi(&self, s: f64, u: f64) -> f64 {
        match *self {
            Variation::Bundle { family, .. } => family.d2log_ds_du(s, u).unwrap_or(f64::NAN),
            Variation::Base { .. } => 0.0,
        }
    }

    /// Exact (Q′, M′) for mode k.
    pub fn derivative(&self, s: f64, k: i32, d: &Discretization) -> Result<(SymTridiagonal, SymTridiagonal)> {
        let (l, r) = default_boundaries(k, self.degree());
        let cq = self.quadrature(s, d)?;
        Ok(cq.derivative(k, l, r, &|u| self.dpsi(s, u), &|u| self.dlogw(s, u)))
    }

    /// δ_E or δ_X: sup |∂_s log| over the quadrature points.
    pub fn delta(&self, s: f64, d: &Discretization) -> Result<f64> {
        let cq = self.quadrature(s, d)?;
        Ok(cq.points().map(|u| (self.dpsi(s, u) + self.dlogw(s, u)).abs()).fold(0.0, f64::max))
    }

    /// π_E = sup |∂_u∂_s ψ| / (2√w) over the quadrature points.
    pub fn pi(&self, s: f64, d: &Discretization) -> Result<f64> {
        let (_, base) = self.at(s)?;
        let cq = self.quadrature(s, d)?;
        Ok(cq.points().map(|u| self.d2psi(s, u).abs() / (2.0 * base.w(u).sqrt())).fold(0.0, f64::max))
    }
}

/// Dense pencil at s with the exact derivative D = ∂_s(M⁻¹Q) = M⁻¹(Q′ − M′A).
pub struct VariedPencil {
    pub pencil: DensePencil,
    pub d: DMatrix<f64>,
}

impl VariedPencil {
    pub fn new(var: &Variation, s: f64, k: i32, disc: &Discretization) -> Result<Self> {
        let op = var.mode(s, k, disc)?;
        let pencil = DensePencil::new(&op)?;
        let (dq, dm) = var.derivative(s, k, disc)?;
        let a = pencil.a();
        let rhs = dq.to_dense() - dm.to_dense() * &a;
        let chol = pencil.m.clone().cholesky().expect("mass matrix is positive definite");
        let d = chol.solve(&rhs);
        Ok(Self { pencil, d })
    }

    /// ∂_s e^{−tA} = −∫₀ᵗ e^{−(t−σ)A} D e^{−σA} dσ, evaluated in the eigenbasis.
    pub fn heat_derivative(&self, t: f64) -> DMatrix<f64> {
        let dt = self.pencil.to_eigenbasis(&self.d);
        let k = duhamel_kernel(self.pencil.lambda.as_slice(), t);
        self.pencil.from_eigenbasis(&(-dt.component_mul(&k)))
    }
}

/// K_ij = ∫₀ᵗ e^{−(t−σ)λ_i − σλ_j} dσ = (e^{−tλ_j} − e^{−tλ_i})/(λ_i − λ_j).
pub fn duhamel_kernel(lambda: &[f64], t: f64) -> DMatrix<f64> {
    let n = lambda.len();
    DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (lambda[i], lambda[j]);
        let lo = a.min(b);
        let x = t * (a - b).abs();
        let phi = if x < 1e-8 { 1.0 - 0.5 * x } else { -(-x).exp_m1() / x };
        t * (-t * lo).exp() * phi
    })
}

/// Same kernel by composite 32-point Gauss–Legendre on geometrically graded panels.
pub fn duhamel_kernel_quadrature(lambda: &[f64], t: f64, levels: usize) -> DMatrix<f64> {
    let n = lambda.len();
    let (x, w) = crate::quad::gauss_legendre(32);
    let mut k = DMatrix::zeros(n, n);
    for (a, b) in crate::quad::graded_panels(t, levels) {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (xi, wi) in x.iter().zip(&w) {
            let s = mid + half * xi;
            let left = nalgebra::DVector::from_iterator(n, lambda.iter().map(|l| (-(t - s) * l).exp()));
            let right = nalgebra::DVector::from_iterator(n, lambda.iter().map(|l| (-s * l).exp()));
            k.ger(wi * half, &left, &right, 1.0);
        }
    }
    k
}
