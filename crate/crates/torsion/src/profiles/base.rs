use super::{logistic, mix_log, mix_weight, softplus};
use crate::error::{invalid, Result};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub enum BaseKind {
    /// w = 1/(4 cosh² u), the round sphere of area 4π
    FubiniStudy,
    /// h_p(∂,∂) = (1 + |z|^p)^{-4/p}; p = 2 is Fubini–Study
    TxPower { p: f64 },
    /// w = e^{-2|u|}, the p → ∞ limit of the TxPower family
    Canonical,
    Scaled { factor: f64 },
    Interpolated { param: f64 },
}

#[derive(Clone, Debug)]
enum BaseRepr {
    FubiniStudy,
    TxPower { p: f64 },
    Canonical,
    Scaled { inner: Arc<BaseProfile>, log_factor: f64 },
    Mix { a: Arc<BaseProfile>, b: Arc<BaseProfile>, r: f64 },
}

/// A radial metric on TP¹ through its weight w(u) = h_X(∂,∂)(e^{-u}) e^{-2u}.
#[derive(Clone, Debug)]
pub struct BaseProfile {
    kind: BaseKind,
    repr: BaseRepr,
}

impl BaseProfile {
    pub fn fubini_study() -> Self {
        Self { kind: BaseKind::FubiniStudy, repr: BaseRepr::FubiniStudy }
    }

    pub fn tx_power(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return invalid("base.p", format!("need finite p ≥ 1, got {p}"));
        }
        Ok(Self { kind: BaseKind::TxPower { p }, repr: BaseRepr::TxPower { p } })
    }

    pub fn canonical() -> Self {
        Self { kind: BaseKind::Canonical, repr: BaseRepr::Canonical }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return invalid("base.factor", "scale must be positive");
        }
        Ok(Self {
            kind: BaseKind::Scaled { factor },
            repr: BaseRepr::Scaled { inner: Arc::new(self.clone()), log_factor: factor.ln() },
        })
    }

    pub(crate) fn mix(a: &BaseProfile, b: &BaseProfile, r: f64, param: f64) -> Self {
        Self {
            kind: BaseKind::Interpolated { param },
            repr: BaseRepr::Mix { a: Arc::new(a.clone()), b: Arc::new(b.clone()), r },
        }
    }

    pub fn kind(&self) -> &BaseKind {
        &self.kind
    }

    pub fn log_w(&self, u: f64) -> f64 {
        match &self.repr {
            BaseRepr::FubiniStudy => {
                let a = u.abs();
                -2.0 * a - 2.0 * (-2.0 * a).exp().ln_1p()
            }
            BaseRepr::TxPower { p } => -2.0 * u - (4.0 / p) * softplus(-p * u),
            BaseRepr::Canonical => -2.0 * u.abs(),
            BaseRepr::Scaled { inner, log_factor } => inner.log_w(u) + log_factor,
            BaseRepr::Mix { a, b, r } => mix_log(a.log_w(u), b.log_w(u), *r),
        }
    }

    pub fn w(&self, u: f64) -> f64 {
        self.log_w(u).exp()
    }

    /// d log w / du.
    pub fn dlog_w(&self, u: f64) -> f64 {
        match &self.repr {
            BaseRepr::FubiniStudy => -2.0 * u.tanh(),
            BaseRepr::TxPower { p } => -2.0 + 4.0 * logistic(-p * u),
            BaseRepr::Canonical => -2.0 * u.signum(),
            BaseRepr::Scaled { inner, .. } => inner.dlog_w(u),
            BaseRepr::Mix { a, b, r } => {
                let wb = mix_weight(a.log_w(u), b.log_w(u), *r);
                (1.0 - wb) * a.dlog_w(u) + wb * b.dlog_w(u)
            }
        }
    }

    /// h_X(∂,∂)^{-1/2} at |z| = e^{-u}.
    pub fn inv_sqrt_hx(&self, u: f64) -> f64 {
        (-u - 0.5 * self.log_w(u)).exp()
    }

    /// ∫_a^b w du by composite Gauss rule.
    pub fn mass(&self, a: f64, b: f64, cells: usize) -> f64 {
        use crate::quad::{GAUSS3_NODES, GAUSS3_WEIGHTS};
        let h = (b - a) / cells as f64;
        (0..cells)
            .map(|c| {
                let lo = a + c as f64 * h;
                GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS).map(|(x, wq)| wq * h * self.w(lo + x * h)).sum::<f64>()
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fubini_study_weight_is_symmetric_and_has_half_mass() {
        let b = BaseProfile::fubini_study();
        for u in [0.1, 1.0, 5.0, 30.0] {
            assert!((b.w(u) - b.w(-u)).abs() <= 1e-16 * b.w(u).max(1e-300));
            assert!((b.w(u) - 1.0 / (4.0 * u.cosh().powi(2))).abs() < 1e-15);
        }
        assert!((b.mass(-40.0, 40.0, 8000) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tx_power_two_is_fubini_study() {
        let a = BaseProfile::tx_power(2.0).unwrap();
        let b = BaseProfile::fubini_study();
        for u in [-7.0, -0.3, 0.0, 2.5] {
            assert!((a.log_w(u) - b.log_w(u)).abs() < 1e-13);
            assert!((a.dlog_w(u) - b.dlog_w(u)).abs() < 1e-13);
        }
    }

    #[test]
    fn tx_power_tends_to_canonical() {
        let c = BaseProfile::canonical();
        let a = BaseProfile::tx_power(200.0).unwrap();
        for u in [-3.0, -0.5, 0.5, 3.0] {
            assert!((a.log_w(u) - c.log_w(u)).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_root_metric_of_canonical_base() {
        // h_X^{-1/2} = max(1, |z|²)
        let c = BaseProfile::canonical();
        assert!((c.inv_sqrt_hx(-(2f64.ln())) - 4.0).abs() < 1e-14);
        assert!((c.inv_sqrt_hx(1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dlog_matches_finite_differences() {
        let bases = [BaseProfile::fubini_study(), BaseProfile::tx_power(5.0).unwrap()];
        for b in &bases {
            for u in [-2.0, 0.3, 1.7] {
                let e = 1e-6;
                let fd = (b.log_w(u + e) - b.log_w(u - e)) / (2.0 * e);
                assert!((fd - b.dlog_w(u)).abs() < 1e-7);
            }
        }
    }
}
