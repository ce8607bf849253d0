//! Dense functional calculus for small pencils: A = M⁻¹Q with an M-orthonormal eigenbasis.

use crate::assembly::ModeOperator;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct DensePencil {
    pub q: DMatrix<f64>,
    pub m: DMatrix<f64>,
    /// Cholesky factor M = LLᵀ.
    pub l: DMatrix<f64>,
    pub lambda: DVector<f64>,
    /// Columns M-orthonormal: VᵀMV = I.
    pub v: DMatrix<f64>,
    /// V⁻¹ = VᵀM
    pub v_inv: DMatrix<f64>,
}

impl DensePencil {
    pub fn new(op: &ModeOperator) -> Result<Self> {
        Self::from_matrices(op.q.to_dense(), op.m.to_dense())
    }

    pub fn from_matrices(q: DMatrix<f64>, m: DMatrix<f64>) -> Result<Self> {
        let l = m.clone().cholesky().ok_or(Error::NotPositiveDefinite { row: 0, pivot: f64::NAN })?.l();
        let li = l.clone().try_inverse().ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
        let c = &li * &q * li.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = c.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let lambda = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
        let u = DMatrix::from_fn(order.len(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        let v = li.transpose() * &u;
        let v_inv = u.transpose() * l.transpose();
        Ok(Self { q, m, l, lambda, v, v_inv })
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// A = M⁻¹Q
    pub fn a(&self) -> DMatrix<f64> {
        self.function(|l| l)
    }

    /// f(A) = V f(Λ) V⁻¹
    pub fn function(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut vd = self.v.clone();
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= f(self.lambda[j]);
        }
        vd * &self.v_inv
    }

    pub fn heat(&self, t: f64) -> DMatrix<f64> {
        self.function(|l| (-l * t).exp())
    }

    /// Matrix in the eigenbasis, V⁻¹XV.
    pub fn to_eigenbasis(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        &self.v_inv * x * &self.v
    }

    pub fn from_eigenbasis(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        &self.v * x * &self.v_inv
    }

    /// Operator norm in the M inner product.
    pub fn norm(&self, x: &DMatrix<f64>) -> f64 {
        spectral_norm(&self.to_eigenbasis(x))
    }

    /// ‖x‖_M
    pub fn vec_norm(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.m * x)).sqrt()
    }
}

/// Operator norm of X in the inner product with Cholesky factor L: ‖LᵀXL⁻ᵀ‖₂.
pub fn norm_in(l: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    let lt = l.transpose();
    let lti = lt.clone().try_inverse().expect("Cholesky factor is invertible");
    spectral_norm(&(lt * x * lti))
}

pub fn spectral_norm(x: &DMatrix<f64>) -> f64 {
    x.clone().singular_values().max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{reduce_mode, Discretization};
    use crate::profiles::{make_fubini_study, BaseProfile};

    fn pencil() -> DensePencil {
        let d = Discretization::new(-6.0, 6.0, 60, 2).unwrap();
        let op = reduce_mode(&make_fubini_study(1).unwrap(), &BaseProfile::fubini_study(), 0, &d).unwrap();
        DensePencil::new(&op).unwrap()
    }

    #[test]
    fn eigenbasis_is_m_orthonormal() {
        let p = pencil();
        let g = p.v.transpose() * &p.m * &p.v;
        assert!((g - DMatrix::identity(p.dim(), p.dim())).amax() < 1e-9);
        let a = p.a();
        let mq = p.m.clone().lu().solve(&p.q).unwrap();
        assert!((a - &mq).amax() < 1e-7 * mq.amax());
    }

    #[test]
    fn heat_semigroup_is_contractive() {
        let p = pencil();
        let (h1, h2, h3) = (p.heat(0.3), p.heat(0.7), p.heat(1.0));
        assert!((&h1 * &h2 - &h3).amax() < 1e-10);
        assert!(p.norm(&h1) <= 1.0 + 1e-9);
        assert!((p.norm(&p.heat(0.0)) - 1.0).abs() < 1e-9);
        assert!((norm_in(&p.l, &h1) - p.norm(&h1)).abs() < 1e-9);
    }
}
