//! Symmetric tridiagonal matrices and the few dense helpers built on them.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// |A|·|x| elementwise, the scale of round-off in A x.
    pub fn abs_matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = (self.diag[i] * x[i]).abs();
                if i > 0 {
                    s += (self.off[i - 1] * x[i - 1]).abs();
                }
                if i + 1 < n {
                    s += (self.off[i] * x[i + 1]).abs();
                }
                s
            })
            .collect()
    }

    /// xᵀ A y
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    /// self − σ·other
    pub fn shifted(&self, other: &SymTridiagonal, sigma: f64) -> SymTridiagonal {
        SymTridiagonal {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a - sigma * b).collect(),
            off: self.off.iter().zip(&other.off).map(|(a, b)| a - sigma * b).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> SymTridiagonal {
        SymTridiagonal { diag: self.diag.iter().map(|a| c * a).collect(), off: self.off.iter().map(|a| c * a).collect() }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i == j + 1 {
                self.off[j]
            } else if j == i + 1 {
                self.off[i]
            } else {
                0.0
            }
        })
    }

    /// Number of negative eigenvalues, from the pivots of LDLᵀ (Sylvester's law of inertia).
    pub fn negative_count(&self) -> usize {
        let scale = self.diag.iter().map(|d| d.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut count = 0;
        let mut d = 0.0;
        for i in 0..self.len() {
            d = if i == 0 { self.diag[0] } else { self.diag[i] - self.off[i - 1] * self.off[i - 1] / d };
            if d == 0.0 {
                d = -f64::EPSILON * scale;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Checks positive definiteness via the LDLᵀ pivots.
    pub fn check_positive_definite(&self) -> Result<()> {
        let mut d = 0.0;
        for i in 0..self.len() {
            d = if i == 0 { self.diag[0] } else { self.diag[i] - self.off[i - 1] * self.off[i - 1] / d };
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: i, pivot: d });
            }
        }
        Ok(())
    }

    /// Solves A x = b for positive definite A without pivoting.
    pub fn solve_spd(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            d[i] = if i == 0 { self.diag[0] } else { self.diag[i] - l[i - 1] * l[i - 1] * d[i - 1] };
            if !(d[i] > 0.0) {
                return Err(Error::NotPositiveDefinite { row: i, pivot: d[i] });
            }
            if i + 1 < n {
                l[i] = self.off[i] / d[i];
            }
        }
        let mut y = b.to_vec();
        for i in 1..n {
            y[i] -= l[i - 1] * y[i - 1];
        }
        for i in 0..n {
            y[i] /= d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= l[i] * y[i + 1];
        }
        Ok(y)
    }

    pub fn lu(&self) -> TridiagonalLu {
        TridiagonalLu::new(self)
    }
}

/// LU with partial pivoting of a tridiagonal matrix (fill-in on a second superdiagonal).
#[derive(Clone, Debug)]
pub struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagonalLu {
    fn new(a: &SymTridiagonal) -> Self {
        let n = a.len();
        let mut dl = a.off.clone();
        let mut d = a.diag.clone();
        let mut du = a.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * d.iter().map(|x| x.abs()).fold(f64::MIN_POSITIVE, f64::max);
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let t = du[i];
                du[i] = d[i + 1];
                d[i + 1] = t - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                swap[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self { dl, d, du, du2, swap }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.dl[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.du[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * x[i + 2];
            }
            x[i] = s / self.d[i];
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
