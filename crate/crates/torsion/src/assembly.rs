//! Fourier-mode reduction of Δ_Ē and its linear finite element discretization.
//!
//! For f = φ(u)e^{ikθ} the energy and mass forms are
//!   Q_k(φ) = ½∫ e^ψ (φ′ + kφ)² du,   M_k(φ) = 2∫ e^ψ w φ² du.
//! Elements are hats times the gauge factor e^{−k(u−u_i)}, so φ = e^{−ku} is
//! reproduced exactly and coefficients are nodal values.

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, SymTridiagonal};
use crate::profiles::{smoothstep, smoothstep_deriv, BaseProfile, MetricProfile, UGrid};
use crate::quad::{self, GAUSS3_NODES, GAUSS3_WEIGHTS};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub u_min: f64,
    pub u_max: f64,
    pub n_nodes: usize,
    pub k_max: u32,
}

impl Discretization {
    /// Window half-width chosen so that e^ψ·w < 1e−12 at both ends for the standard profiles.
    pub const DEFAULT_HALF_WIDTH: f64 = 14.0;
    pub const DEFAULT_NODES: usize = 4096;
    /// Modes beyond the degree kept by default.
    pub const DEFAULT_EXTRA_MODES: u32 = 24;

    pub fn new(u_min: f64, u_max: f64, n_nodes: usize, k_max: u32) -> Result<Self> {
        if !(u_min < 0.0 && 0.0 < u_max) || !u_min.is_finite() || !u_max.is_finite() {
            return invalid("grid", format!("need u_min < 0 < u_max, got [{u_min}, {u_max}]"));
        }
        if n_nodes < 16 {
            return invalid("grid", format!("need at least 16 nodes, got {n_nodes}"));
        }
        Ok(Self { u_min, u_max, n_nodes, k_max })
    }

    pub fn for_degree(m: u32) -> Self {
        Self {
            u_min: -Self::DEFAULT_HALF_WIDTH,
            u_max: Self::DEFAULT_HALF_WIDTH,
            n_nodes: Self::DEFAULT_NODES,
            k_max: m + Self::DEFAULT_EXTRA_MODES,
        }
    }

    pub fn with_nodes(self, n_nodes: usize) -> Result<Self> {
        Self::new(self.u_min, self.u_max, n_nodes, self.k_max)
    }

    pub fn with_k_max(self, k_max: u32) -> Self {
        Self { k_max, ..self }
    }

    pub fn check_degree(&self, m: u32) -> Result<()> {
        if self.k_max < m {
            return invalid("kmax", format!("k_max = {} must be at least the degree {m}", self.k_max));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.u_max - self.u_min) / (self.n_nodes - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n_nodes {
            self.u_max
        } else {
            self.u_min + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.node(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Natural,
    Dirichlet,
}

/// Default boundary conditions for mode k on O(m): essential at an end where
/// e^{−ku} is not square integrable, natural otherwise.
pub fn default_boundaries(k: i32, m: u32) -> (Boundary, Boundary) {
    let left = if k > m as i32 { Boundary::Dirichlet } else { Boundary::Natural };
    let right = if k < 0 { Boundary::Dirichlet } else { Boundary::Natural };
    (left, right)
}

/// Profile and weight values at the quadrature points of every cell.
/// Independent of the mode, so it is shared across a family of modes.
#[derive(Clone, Debug)]
pub struct CellQuadrature {
    disc: Discretization,
    degree: u32,
    /// per cell: (u, weight, ψ, log w)
    points: Vec<Vec<(f64, f64, f64, f64)>>,
}

impl CellQuadrature {
    pub fn new(psi: &MetricProfile, base: &BaseProfile, disc: &Discretization) -> Result<Self> {
        let mut kinks = psi.singular_points();
        kinks.sort_by(f64::total_cmp);
        let mut points = Vec::with_capacity(disc.n_nodes - 1);
        for c in 0..disc.n_nodes - 1 {
            let (a, b) = (disc.node(c), disc.node(c + 1));
            let mut edges = vec![a];
            edges.extend(kinks.iter().copied().filter(|&s| s > a && s < b));
            edges.push(b);
            let mut cell = Vec::with_capacity(3 * (edges.len() - 1));
            for e in edges.windows(2) {
                let len = e[1] - e[0];
                for (x, wq) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
                    let u = e[0] + x * len;
                    let (p, lw) = (psi.psi(u), base.log_w(u));
                    if !p.is_finite() {
                        return Err(Error::NonFinite { what: "profile", u });
                    }
                    if !lw.is_finite() {
                        return Err(Error::NonFinite { what: "base weight", u });
                    }
                    cell.push((u, wq * len, p, lw));
                }
            }
            points.push(cell);
        }
        Ok(Self { disc: *disc, degree: psi.degree(), points })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Quadrature abscissae of all cells.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().flatten().map(|p| p.0)
    }

    /// Assembles the full (unconstrained) pair for mode k with the integrands of
    /// Q and M multiplied by `fq(u)` and `fm(u)`.
    fn assemble_weighted(&self, k: i32, fq: &dyn Fn(f64) -> f64, fm: &dyn Fn(f64) -> f64) -> (SymTridiagonal, SymTridiagonal) {
        let n = self.disc.n_nodes;
        let kf = f64::from(k);
        let (mut qd, mut qo) = (vec![0.0; n], vec![0.0; n - 1]);
        let (mut md, mut mo) = (vec![0.0; n], vec![0.0; n - 1]);
        for (c, cell) in self.points.iter().enumerate() {
            let (a, b) = (self.disc.node(c), self.disc.node(c + 1));
            let h = b - a;
            let inv_h2 = 1.0 / (h * h);
            for &(u, wq, p, lw) in cell {
                let (la, lb) = ((b - u) / h, (u - a) / h);
                let (ga, gb) = (-kf * (u - a), -kf * (u - b));
                let (eaa, ebb, eab) = ((p + 2.0 * ga).exp(), (p + 2.0 * gb).exp(), (p + ga + gb).exp());
                let sq = 0.5 * wq * inv_h2 * fq(u);
                qd[c] += sq * eaa;
                qd[c + 1] += sq * ebb;
                qo[c] -= sq * eab;
                let sm = 2.0 * wq * lw.exp() * fm(u);
                md[c] += sm * eaa * la * la;
                md[c + 1] += sm * ebb * lb * lb;
                mo[c] += sm * eab * la * lb;
            }
        }
        (SymTridiagonal::new(qd, qo), SymTridiagonal::new(md, mo))
    }

    fn restrict(&self, a: &SymTridiagonal, left: Boundary, right: Boundary) -> SymTridiagonal {
        let first = usize::from(left == Boundary::Dirichlet);
        let last = self.disc.n_nodes - usize::from(right == Boundary::Dirichlet);
        SymTridiagonal::new(a.diag()[first..last].to_vec(), a.off()[first..last - 1].to_vec())
    }

    /// Exact s-derivatives (Q′, M′) of the pair when ψ and log w move with
    /// velocities ∂_sψ = `dpsi(u)` and ∂_s log w = `dlogw(u)`.
    pub fn derivative(
        &self,
        k: i32,
        left: Boundary,
        right: Boundary,
        dpsi: &dyn Fn(f64) -> f64,
        dlogw: &dyn Fn(f64) -> f64,
    ) -> (SymTridiagonal, SymTridiagonal) {
        let (q, m) = self.assemble_weighted(k, dpsi, &|u| dpsi(u) + dlogw(u));
        (self.restrict(&q, left, right), self.restrict(&m, left, right))
    }

    pub fn mode(&self, k: i32, left: Boundary, right: Boundary) -> Result<ModeOperator> {
        let (q, m) = self.assemble_weighted(k, &|_| 1.0, &|_| 1.0);
        let first = usize::from(left == Boundary::Dirichlet);
        let (q, m) = (self.restrict(&q, left, right), self.restrict(&m, left, right));
        m.check_positive_definite()?;
        Ok(ModeOperator { k, q, m, left, right, disc: self.disc, first })
    }
}

/// The discretized pair (Q_k, M_k) for one Fourier mode.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub k: i32,
    pub q: SymTridiagonal,
    pub m: SymTridiagonal,
    pub left: Boundary,
    pub right: Boundary,
    pub disc: Discretization,
    first: usize,
}

impl ModeOperator {
    /// Wraps an arbitrary pencil, all nodes free.
    pub fn from_pencil(k: i32, q: SymTridiagonal, m: SymTridiagonal, disc: Discretization) -> Result<Self> {
        if q.len() != m.len() || q.len() != disc.n_nodes {
            return invalid("pencil", "Q, M and the node count must agree");
        }
        m.check_positive_definite()?;
        Ok(Self { k, q, m, left: Boundary::Natural, right: Boundary::Natural, disc, first: 0 })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// u-coordinates of the unknowns.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.disc.node(i + self.first)).collect()
    }

    /// Coefficient vector interpolating φ.
    pub fn sample(&self, phi: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().into_iter().map(phi).collect()
    }

    /// xᵀQx / xᵀMx
    pub fn rayleigh(&self, x: &[f64]) -> Result<f64> {
        let den = self.m.form(x, x);
        if !(den > 0.0) {
            return invalid("x", "zero vector");
        }
        Ok(self.q.form(x, x) / den)
    }

    /// ‖M⁻¹Qx‖²_M = (Qx)ᵀM⁻¹(Qx), the discrete ‖Δf‖².
    pub fn laplacian_norm2(&self, x: &[f64]) -> Result<f64> {
        let qx = self.q.matvec(x);
        let y = self.m.solve_spd(&qx)?;
        Ok(dot(&qx, &y))
    }

    /// Triplet dump (row, col, value) of the upper triangle of Q or M.
    pub fn triplets(a: &SymTridiagonal) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * a.len());
        for i in 0..a.len() {
            out.push((i, i, a.diag()[i]));
            if i + 1 < a.len() {
                out.push((i, i + 1, a.off()[i]));
            }
        }
        out
    }
}

pub fn reduce_mode(psi: &MetricProfile, base: &BaseProfile, k: i32, d: &Discretization) -> Result<ModeOperator> {
    let (left, right) = default_boundaries(k, psi.degree());
    CellQuadrature::new(psi, base, d)?.mode(k, left, right)
}

/// Operators for k = −k_max..=k_max.
pub fn assemble_operator_family(psi: &MetricProfile, base: &BaseProfile, d: &Discretization) -> Result<Vec<ModeOperator>> {
    d.check_degree(psi.degree())?;
    let cq = CellQuadrature::new(psi, base, d)?;
    let k_max = d.k_max as i32;
    let m = psi.degree();
    let build = |k: i32| {
        let (l, r) = default_boundaries(k, m);
        cq.mode(k, l, r)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (-k_max..=k_max).into_par_iter().map(build).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (-k_max..=k_max).map(build).collect()
    }
}

/// Samples of a complex field on a (u, θ) grid, row-major in u.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarField {
    pub u: UGrid,
    pub n_theta: usize,
    pub values: Vec<Complex64>,
}

impl PolarField {
    pub fn from_fn(u: UGrid, n_theta: usize, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let dt = std::f64::consts::TAU / n_theta as f64;
        let values = u.points().flat_map(|x| (0..n_theta).map(move |j| (x, j as f64 * dt))).map(|(x, t)| f(x, t)).collect();
        Self { u, n_theta, values }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n_theta + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Δf = −(1/4w)[f_uu + f_θθ + ψ′f_u − iψ′f_θ] by central differences.
/// The result lives on the interior u-rows.
pub fn apply_strong_form(psi: &MetricProfile, base: &BaseProfile, f: &PolarField) -> Result<PolarField> {
    let (nu, nt) = (f.u.n, f.n_theta);
    if nu < 3 || nt < 3 {
        return Err(Error::GridTooCoarse(format!("need at least 3×3 samples, got {nu}×{nt}")));
    }
    let hu = f.u.step();
    let ht = std::f64::consts::TAU / nt as f64;
    let inner = UGrid::new(f.u.point(1), f.u.point(nu - 2), nu - 2)?;
    let i_unit = Complex64::new(0.0, 1.0);
    let mut values = Vec::with_capacity((nu - 2) * nt);
    for i in 1..nu - 1 {
        let u = f.u.point(i);
        let dp = psi.dpsi(u);
        let c = -0.25 / base.w(u);
        for j in 0..nt {
            let (jm, jp) = ((j + nt - 1) % nt, (j + 1) % nt);
            let f0 = f.at(i, j);
            let fuu = (f.at(i + 1, j) - 2.0 * f0 + f.at(i - 1, j)) / (hu * hu);
            let fu = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * hu);
            let ftt = (f.at(i, jp) - 2.0 * f0 + f.at(i, jm)) / (ht * ht);
            let ft = (f.at(i, jp) - f.at(i, jm)) / (2.0 * ht);
            values.push(c * (fuu + ftt + dp * fu - i_unit * dp * ft));
        }
    }
    Ok(PolarField { u: inner, n_theta: nt, values })
}

/// Value and first two derivatives of a radial test field.
pub type Jet = fn(f64) -> [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenResidual {
    pub residual: f64,
    /// Sum of the absolute values of the three terms.
    pub scale: f64,
}

/// ∫|∂φ/∂z̄|²ψ + ∫φ φ_{zz̄} ψ − ½∫φ² ψ_{zz̄} for radial φ, ψ, which in u reads
/// ¼∫[φ′²ψ + φφ″ψ − ½φ²ψ″] du and vanishes by integration by parts.
pub fn green_identity_check(
    phi: &dyn Fn(f64) -> [f64; 3],
    psi: &dyn Fn(f64) -> [f64; 3],
    d: &Discretization,
) -> Result<GreenResidual> {
    let term = |which: usize| {
        move |u: f64| {
            let (p, s) = (phi(u), psi(u));
            0.25 * match which {
                0 => p[1] * p[1] * s[0],
                1 => p[0] * p[2] * s[0],
                _ => -0.5 * p[0] * p[0] * s[2],
            }
        }
    };
    let mut total = 0.0;
    let mut scale = 0.0;
    for which in 0..3 {
        let (v, _) = quad::integrate(term(which), d.u_min, d.u_max, 1e-13, 1e-12)?;
        total += v;
        scale += v.abs();
    }
    Ok(GreenResidual { residual: total, scale })
}

/// One refinement level of the divergence diagnostic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivergenceLevel {
    pub nodes: usize,
    pub step: f64,
    pub norm2: f64,
}

/// Discrete ‖Δf‖² for f = χ(u)·z̄ (mode −1, φ = χ(u)e^{−u}) on [−window, window],
/// χ = 1 on |u| ≤ support/2 and 0 for |u| ≥ support.
pub fn divergence_diagnostic(
    psi: &MetricProfile,
    base: &BaseProfile,
    window: f64,
    support: f64,
    node_counts: &[usize],
) -> Result<Vec<DivergenceLevel>> {
    if !(support > 0.0 && support <= window) {
        return invalid("support", format!("need 0 < support ≤ window, got {support} and {window}"));
    }
    let chi = |u: f64| 1.0 - smoothstep((2.0 * u.abs() - support) / support);
    node_counts
        .iter()
        .map(|&n| {
            let d = Discretization::new(-window, window, n, 1)?;
            let op = CellQuadrature::new(psi, base, &d)?.mode(-1, Boundary::Dirichlet, Boundary::Dirichlet)?;
            let x = op.sample(|u| chi(u) * (-u).exp());
            Ok(DivergenceLevel { nodes: n, step: d.step(), norm2: op.laplacian_norm2(&x)? })
        })
        .collect()
}

/// Derivative of the bump used in [`divergence_diagnostic`], exposed for tests.
pub fn divergence_bump(u: f64, support: f64) -> (f64, f64) {
    let x = (2.0 * u.abs() - support) / support;
    (1.0 - smoothstep(x), -smoothstep_deriv(x) * 2.0 * u.signum() / support)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::profiles::{make_fubini_study, make_pnorm, ChiMap};

    fn small(n: usize) -> Discretization {
        Discretization::new(-10.0, 10.0, n, 4).unwrap()
    }

    #[test]
    fn flat_profile_gives_half_laplacian_stiffness() {
        let psi = make_fubini_study(0).unwrap();
        let d = small(64);
        let op = reduce_mode(&psi, &BaseProfile::fubini_study(), 0, &d).unwrap();
        let h = d.step();
        for i in 1..op.len() - 1 {
            assert!((op.q.diag()[i] - 1.0 / h).abs() < 1e-12 / h);
        }
        assert!(op.q.off().iter().all(|o| (o + 0.5 / h).abs() < 1e-12 / h));
        let rows = op.q.matvec(&vec![1.0; op.len()]);
        assert!(rows.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn sampled_null_functions_are_exact_kernels() {
        let psi = make_fubini_study(1).unwrap();
        let d = Discretization::for_degree(1);
        for k in [0, 1] {
            let op = reduce_mode(&psi, &BaseProfile::fubini_study(), k, &d).unwrap();
            let x = op.sample(|u| (-(k as f64) * u).exp());
            let (qx, mx) = (op.q.matvec(&x), op.m.matvec(&x));
            assert!(norm(&qx) / norm(&mx) < 1e-8, "k={k}");
        }
    }

    #[test]
    fn family_size_and_boundaries() {
        let psi = make_fubini_study(2).unwrap();
        let d = small(64);
        let ops = assemble_operator_family(&psi, &BaseProfile::fubini_study(), &d).unwrap();
        assert_eq!(ops.len(), 9);
        for op in &ops {
            let (l, r) = default_boundaries(op.k, 2);
            assert_eq!((op.left, op.right), (l, r));
            let expected = 64 - usize::from(l == Boundary::Dirichlet) - usize::from(r == Boundary::Dirichlet);
            assert_eq!(op.len(), expected);
        }
        let bad = Discretization::new(-10.0, 10.0, 64, 1).unwrap();
        assert!(assemble_operator_family(&psi, &BaseProfile::fubini_study(), &bad).is_err());
    }

    #[test]
    fn discretization_validation() {
        assert!(Discretization::new(1.0, 2.0, 64, 0).is_err());
        assert!(Discretization::new(-1.0, 2.0, 8, 0).is_err());
        assert!(Discretization::new(-1.0, 2.0, 16, 0).is_ok());
    }

    #[test]
    fn constant_field_has_zero_strong_form() {
        let psi = make_fubini_study(0).unwrap();
        let f = PolarField::from_fn(UGrid::symmetric(3.0, 31).unwrap(), 16, |_, _| Complex64::new(2.0, 0.0));
        let r = apply_strong_form(&psi, &BaseProfile::fubini_study(), &f).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        let tiny = PolarField::from_fn(UGrid::symmetric(3.0, 2).unwrap(), 16, |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(apply_strong_form(&psi, &BaseProfile::fubini_study(), &tiny), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn strong_form_matches_mode_equation() {
        // f = φ(u)e^{ikθ} with φ = e^{−u²}: compare with −(1/4w)[φ″ + ψ′φ′ + kψ′φ − k²φ]
        let psi = make_pnorm(2, &ChiMap::Linear, 3).unwrap();
        let base = BaseProfile::fubini_study();
        let k = 2;
        let f = PolarField::from_fn(UGrid::symmetric(3.0, 1201).unwrap(), 256, |u, t| {
            Complex64::from_polar((-u * u).exp(), k as f64 * t)
        });
        let r = apply_strong_form(&psi, &base, &f).unwrap();
        let kf = k as f64;
        let mut err = 0.0f64;
        for i in 0..r.u.n {
            let u = r.u.point(i);
            let p = (-u * u).exp();
            let (d1, d2) = (-2.0 * u * p, (4.0 * u * u - 2.0) * p);
            let dp = psi.dpsi(u);
            let expect = -(d2 + dp * d1 + kf * dp * p - kf * kf * p) / (4.0 * base.w(u));
            for j in 0..r.n_theta {
                let phase = Complex64::from_polar(1.0, kf * j as f64 * std::f64::consts::TAU / 256.0);
                err = err.max((r.at(i, j) - phase * expect).norm() / (1.0 + expect.abs()));
            }
        }
        // second-order differences: O(h_u² + h_θ²)
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn green_identity_on_gaussian() {
        let phi = |u: f64| {
            let e = (-u * u).exp();
            [e, -2.0 * u * e, (4.0 * u * u - 2.0) * e]
        };
        let psi = |u: f64| {
            // ψ = 1/(4cosh²u)
            let c = u.cosh();
            let t = u.tanh();
            let s = 0.25 / (c * c);
            [s, -2.0 * s * t, s * (6.0 * t * t - 2.0)]
        };
        let r = green_identity_check(&phi, &psi, &Discretization::for_degree(0)).unwrap();
        assert!(r.residual.abs() < 1e-6 && r.scale > 1e-3);
        let one = |_: f64| [1.0, 0.0, 0.0];
        let zero = green_identity_check(&one, &one, &Discretization::for_degree(0)).unwrap();
        assert_eq!(zero.residual, 0.0);
    }

    #[test]
    fn bump_derivative_matches_differences() {
        for u in [-0.7, -0.3, 0.2, 0.6, 0.9] {
            let (_, d) = divergence_bump(u, 1.0);
            let fd = (divergence_bump(u + 1e-6, 1.0).0 - divergence_bump(u - 1e-6, 1.0).0) / 2e-6;
            assert!((d - fd).abs() < 1e-6);
        }
    }
}
