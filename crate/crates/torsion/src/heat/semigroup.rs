use crate::assembly::ModeOperator;
use crate::eigen::{solve_mode, Eigenpair};
use crate::error::{invalid, Result};
use crate::linalg::dot;

/// e^{−tΔ} on the span of the lowest eigenpairs of one mode.
#[derive(Clone, Debug)]
pub struct HeatSemigroup {
    op: ModeOperator,
    pairs: Vec<Eigenpair>,
}

impl HeatSemigroup {
    pub fn new(op: ModeOperator, n_eigs: usize) -> Result<Self> {
        let pairs = solve_mode(&op, n_eigs)?;
        Ok(Self { op, pairs })
    }

    pub fn pairs(&self) -> &[Eigenpair] {
        &self.pairs
    }

    /// Σ e^{−λt}⟨x, v⟩_M v
    pub fn apply(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(t >= 0.0) {
            return invalid("t", format!("need t ≥ 0, got {t}"));
        }
        if x.len() != self.op.len() {
            return invalid("x", "length does not match the operator");
        }
        let mx = self.op.m.matvec(x);
        let mut out = vec![0.0; x.len()];
        for p in &self.pairs {
            let c = (-p.lambda * t).exp() * dot(&p.vector, &mx);
            out.iter_mut().zip(&p.vector).for_each(|(o, v)| *o += c * v);
        }
        Ok(out)
    }

    /// M-orthogonal projection onto the resolved subspace.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply(0.0, x)
    }

    pub fn m_norm(&self, x: &[f64]) -> f64 {
        self.op.m.form(x, x).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{reduce_mode, Discretization};
    use crate::profiles::{make_pnorm, BaseProfile, ChiMap};

    fn semigroup() -> HeatSemigroup {
        let d = Discretization::new(-9.0, 9.0, 400, 3).unwrap();
        let op = reduce_mode(&make_pnorm(1, &ChiMap::Linear, 3).unwrap(), &BaseProfile::fubini_study(), 1, &d).unwrap();
        HeatSemigroup::new(op, 30).unwrap()
    }

    #[test]
    fn semigroup_law_and_contraction() {
        let h = semigroup();
        let x: Vec<f64> = (0..h.op.len()).map(|i| ((i * 37) % 17) as f64 - 8.0).collect();
        let x = h.project(&x).unwrap();
        let a = h.apply(0.3, &h.apply(0.45, &x).unwrap()).unwrap();
        let b = h.apply(0.75, &x).unwrap();
        let err = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10 * b.iter().map(|v| v.abs()).fold(0.0, f64::max));
        let mut last = h.m_norm(&x);
        for t in [0.0, 0.1, 0.5, 2.0] {
            let n = h.m_norm(&h.apply(t, &x).unwrap());
            assert!(n <= last * (1.0 + 1e-12));
            last = n;
        }
        let p = h.project(&x).unwrap();
        assert!(x.iter().zip(&p).all(|(u, v)| (u - v).abs() < 1e-9 * (1.0 + u.abs())));
        assert!(h.apply(-1.0, &x).is_err());
    }
}
