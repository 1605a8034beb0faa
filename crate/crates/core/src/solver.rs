//! Mild solutions of the sequential problem by Picard iteration on
//!
//! ```text
//! S x(t) = (σ_t/L)^β g(x) + ∫ₐᵇ G(τ,t) ψ′(τ) f(τ, x(τ)) dτ
//! ```
//!
//! together with the contraction and existence certificates.
//!
//! The integral is discretized by product integration: on the ψ-uniform grid
//! the source is written `f = w·φ`, where `w` is the declared endpoint weight
//! (`w ≡ 1` when none is given), `φ` is interpolated by hat functions in `σ`,
//! and the kernel moments against each hat are integrated exactly up to
//! quadrature error. The weights are assembled once per grid.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fracops::{caputo_derivative, psi_grid, GridFunction};
use crate::green::{check_orders, product_weights, EndpointWeight, GreenKernel, Matrix};
use crate::interp::MonotoneCubic;
use crate::psi::PsiChart;
use crate::quad::{QuadConfig, QuadratureRule};

/// Sample count for sampled assumption checks.
pub const ASSUMPTION_SAMPLES: usize = 10_000;

/// Updates beyond this size are treated as divergence.
const DIVERGENCE_LIMIT: f64 = 1e100;

// relative offset (in cells) at which a singular source is sampled instead of
// at a weighted endpoint
const ENDPOINT_NUDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Zero,
    /// `g(x) = c·x(η)`.
    Point {
        c: f64,
        eta: f64,
    },
    /// `g(x) = c/(b − a) ∫ₐᵇ x(t) dt`.
    Mean {
        c: f64,
    },
}

/// The nonlocal condition `x(b) = g(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFunctional {
    kind: BoundaryKind,
}

impl BoundaryFunctional {
    pub fn zero() -> Self {
        Self { kind: BoundaryKind::Zero }
    }

    pub fn point(c: f64, eta: f64) -> Self {
        Self { kind: BoundaryKind::Point { c, eta } }
    }

    pub fn mean(c: f64) -> Self {
        Self { kind: BoundaryKind::Mean { c } }
    }

    /// `zero`, `point:c,eta` or `mean:c`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let bad = || Error::Argument(format!("boundary must be zero, point:c,eta or mean:c, got `{spec}`"));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        if spec == "zero" {
            return Ok(Self::zero());
        }
        if let Some(rest) = spec.strip_prefix("point:") {
            let (c, eta) = rest.split_once(',').ok_or_else(bad)?;
            return Ok(Self::point(num(c)?, num(eta)?));
        }
        if let Some(c) = spec.strip_prefix("mean:") {
            return Ok(Self::mean(num(c)?));
        }
        Err(bad())
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    /// Sup-norm Lipschitz constant of `g`.
    pub fn lipschitz(&self) -> f64 {
        match self.kind {
            BoundaryKind::Zero => 0.0,
            BoundaryKind::Point { c, .. } | BoundaryKind::Mean { c } => c.abs(),
        }
    }

    fn validate(&self, chart: &PsiChart) -> Result<()> {
        match self.kind {
            BoundaryKind::Point { c, eta } => {
                if !c.is_finite() || !(eta > chart.a() && eta <= chart.b()) {
                    return Err(Error::Argument(format!(
                        "point boundary needs finite c and eta in (a, b], got c = {c}, eta = {eta}"
                    )));
                }
            }
            BoundaryKind::Mean { c } if !c.is_finite() => {
                return Err(Error::Argument(format!("mean boundary needs finite c, got {c}")));
            }
            _ => {}
        }
        Ok(())
    }

    /// `g` applied to grid values on the ψ-uniform nodes `t` (with offsets `u`).
    pub fn eval(&self, chart: &PsiChart, u: &[f64], t: &[f64], x: &[f64]) -> f64 {
        match self.kind {
            BoundaryKind::Zero => 0.0,
            BoundaryKind::Point { c, eta } => {
                let interp = MonotoneCubic::new(u.to_vec(), x.to_vec());
                c * interp.eval(chart.raw_value(eta))
            }
            BoundaryKind::Mean { c } => {
                let mut acc = 0.0;
                for j in 1..t.len() {
                    acc += 0.5 * (t[j] - t[j - 1]) * (x[j] + x[j - 1]);
                }
                c * acc / (chart.b() - chart.a())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    alpha: f64,
    beta: f64,
    chart: PsiChart,
    f: Expr,
    boundary: BoundaryFunctional,
    singular: Option<EndpointWeight>,
}

impl ProblemSpec {
    pub fn new(alpha: f64, beta: f64, chart: PsiChart, f: Expr, boundary: BoundaryFunctional) -> Result<Self> {
        check_orders(alpha, beta)?;
        boundary.validate(&chart)?;
        Ok(Self { alpha, beta, chart, f, boundary, singular: None })
    }

    /// Declares that `f` behaves like `(ψ(b)−ψ(t))^(−γ)(ψ(t)−ψ(a))^(−μ)` in `t`.
    pub fn with_singular_exponents(mut self, gamma: f64, mu: f64) -> Result<Self> {
        let w = EndpointWeight::new(gamma, mu)?;
        self.singular = if w.is_none() { None } else { Some(w) };
        Ok(self)
    }

    pub fn a(&self) -> f64 {
        self.chart.a()
    }

    pub fn b(&self) -> f64 {
        self.chart.b()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn chart(&self) -> &PsiChart {
        &self.chart
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn boundary(&self) -> &BoundaryFunctional {
        &self.boundary
    }

    pub fn singular_exponents(&self) -> Option<(f64, f64)> {
        self.singular.map(|w| (w.gamma, w.mu))
    }

    pub fn kernel(&self) -> Result<GreenKernel> {
        GreenKernel::new(self.alpha, self.beta, self.chart.clone())
    }

    fn endpoint_weight(&self) -> EndpointWeight {
        self.singular.unwrap_or(EndpointWeight::NONE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub iterations: usize,
    pub final_update: f64,
    pub integral_residual: f64,
    pub converged: bool,
    /// Sup-norm of every Picard update, in order.
    pub update_history: Vec<f64>,
}

/// The operator `S` on a fixed ψ-uniform grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    spec: ProblemSpec,
    u: Vec<f64>,
    t: Vec<f64>,
    weights: Matrix,
    boundary_scale: Vec<f64>,
    // where f is sampled for φ_j, and the weight value there
    sample_t: Vec<f64>,
    sample_w: Vec<f64>,
}

impl Discretization {
    pub fn new(spec: &ProblemSpec, n_nodes: usize) -> Result<Self> {
        if n_nodes < 3 {
            return Err(Error::Resolution(format!("solver needs at least 3 nodes, got {n_nodes}")));
        }
        let kernel = spec.kernel()?;
        let chart = spec.chart();
        let weight = spec.endpoint_weight();
        let weights = product_weights(&kernel, n_nodes, weight)?;
        let (u, t) = psi_grid(chart, n_nodes);
        let n = n_nodes - 1;
        let l = chart.range();
        let h = l / n as f64;
        let mut boundary_scale: Vec<f64> = (0..=n).map(|i| (i as f64 / n as f64).powf(spec.beta)).collect();
        boundary_scale[0] = 0.0;
        boundary_scale[n] = 1.0;
        let mut sample_t = t.clone();
        let mut sample_w = vec![1.0; n_nodes];
        if !weight.is_none() {
            for j in 0..=n {
                let mut s = j as f64 * h;
                if j == 0 && weight.mu != 0.0 {
                    s = ENDPOINT_NUDGE * h;
                }
                if j == n && weight.gamma != 0.0 {
                    s = l - ENDPOINT_NUDGE * h;
                }
                let dist_hi = if j == n { l - s } else { (n - j) as f64 * h };
                let dist_hi = if j == n && weight.gamma != 0.0 { ENDPOINT_NUDGE * h } else { dist_hi };
                sample_w[j] = weight.at(s, dist_hi);
                if s != j as f64 * h {
                    sample_t[j] = chart.raw_inverse(chart.lo() + s);
                }
            }
        }
        Ok(Self { spec: spec.clone(), u, t, weights, boundary_scale, sample_t, sample_w })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// `(σ_i/L)^β`, the coefficient of `g(x)` in row `i`.
    pub fn boundary_scale(&self) -> &[f64] {
        &self.boundary_scale
    }

    /// `g(x)` from grid values.
    pub fn boundary_value(&self, x: &[f64]) -> f64 {
        self.spec.boundary.eval(self.spec.chart(), &self.u, &self.t, x)
    }

    /// `φ_j = f(t_j, x_j) / w(t_j)`.
    pub fn source_samples(&self, x: &[f64]) -> Result<Vec<f64>> {
        let f = self.spec.f();
        x.iter()
            .enumerate()
            .map(|(j, &xj)| {
                let tau = self.sample_t[j];
                f.eval(tau, xj).map(|v| v / self.sample_w[j]).map_err(|source| Error::SourceEval { tau, x: xj, source })
            })
            .collect()
    }

    /// One application of `S` to grid values.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.len() {
            return Err(Error::Argument(format!("grid has {} nodes, got {} values", self.len(), x.len())));
        }
        let phi = self.source_samples(x)?;
        let g = self.boundary_value(x);
        let mut out = self.weights.mul_vec(&phi);
        for (v, s) in out.iter_mut().zip(&self.boundary_scale) {
            *v += s * g;
        }
        out[0] = 0.0;
        Ok(out)
    }

    /// Picard iteration `x ← S x` from `x0` (zero when `None`).
    pub fn picard(&self, tol: f64, max_iter: usize, x0: Option<&[f64]>) -> Result<SolutionGrid> {
        if !(tol > 0.0) {
            return Err(Error::Argument(format!("tol must be > 0, got {tol}")));
        }
        let mut x = match x0 {
            Some(v) if v.len() != self.len() => {
                return Err(Error::Argument(format!("initial guess has {} values, grid has {}", v.len(), self.len())))
            }
            Some(v) => v.to_vec(),
            None => vec![0.0; self.len()],
        };
        let mut history = Vec::new();
        let mut converged = false;
        let mut iterations = 0;
        while iterations < max_iter {
            let next = self.apply(&x)?;
            let update = sup_diff(&next, &x);
            iterations += 1;
            history.push(update);
            x = next;
            if update <= tol {
                converged = true;
                break;
            }
            if !update.is_finite() || update > DIVERGENCE_LIMIT {
                break;
            }
        }
        let integral_residual =
            if x.iter().all(|v| v.is_finite()) { sup_diff(&x, &self.apply(&x)?) } else { f64::INFINITY };
        Ok(SolutionGrid {
            nodes: self.t.clone(),
            values: x,
            iterations,
            final_update: history.last().copied().unwrap_or(0.0),
            integral_residual,
            converged,
            update_history: history,
        })
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `S x` for a grid solution; builds the discretization on the grid's size.
pub fn apply_s(spec: &ProblemSpec, x: &SolutionGrid) -> Result<SolutionGrid> {
    let disc = Discretization::new(spec, x.values.len())?;
    let values = disc.apply(&x.values)?;
    Ok(SolutionGrid {
        nodes: disc.t.clone(),
        values,
        iterations: 0,
        final_update: 0.0,
        integral_residual: f64::NAN,
        converged: false,
        update_history: Vec::new(),
    })
}

pub fn picard_solve(
    spec: &ProblemSpec,
    n_nodes: usize,
    tol: f64,
    max_iter: usize,
    x0: Option<&[f64]>,
) -> Result<SolutionGrid> {
    Discretization::new(spec, n_nodes)?.picard(tol, max_iter, x0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCertificate {
    pub kappa4: f64,
    pub weight_norm: f64,
    pub gmax: f64,
    pub lipschitz: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceCertificate {
    pub kappa: f64,
    pub psi: Expr,
    pub weight_norm: f64,
    pub gmax: f64,
    pub m_found: Option<f64>,
    pub satisfied: bool,
}

/// Interior sample points of `[a, b]`, uniform in `ψ`.
fn interior_samples(chart: &PsiChart, n: usize) -> impl Iterator<Item = f64> + '_ {
    (0..n).map(move |k| chart.interior_inverse(chart.lo() + chart.range() * (k as f64 + 0.5) / n as f64))
}

fn check_nonnegative(name: &str, k: &Expr, chart: &PsiChart) -> Result<()> {
    for t in interior_samples(chart, ASSUMPTION_SAMPLES) {
        let v = k.eval(t, 0.0)?;
        if !(v >= 0.0) {
            return Err(Error::Assumption(format!("{name} must be nonnegative, but {name}({t}) = {v}")));
        }
    }
    Ok(())
}

/// `‖ψ′k‖_{L¹(a,b)}`. With declared singular exponents the weight is
/// factored out, `|k| = w·(|k|/w)`, and integrated against exact distances.
pub fn weight_norm(spec: &ProblemSpec, k: &Expr, cfg: &QuadConfig) -> Result<f64> {
    let chart = spec.chart();
    let w = spec.endpoint_weight();
    let (lo, hi) = (chart.lo(), chart.hi());
    let rule = QuadratureRule::new(lo, hi, chart.lo_grading(w.mu), w.gamma, cfg)?;
    let mut acc = 0.0;
    for i in 0..rule.len() {
        let t = chart.interior_inverse(rule.nodes()[i]);
        let v = k.eval(t, 0.0)?.abs();
        let ratio = if w.is_none() {
            v
        } else {
            let u = chart.raw_value(t);
            v / w.at((u - lo).max(f64::MIN_POSITIVE), (hi - u).max(f64::MIN_POSITIVE))
        };
        acc += rule.weights()[i] * w.at(rule.from_lo()[i], rule.to_hi()[i]) * ratio;
    }
    Ok(acc)
}

/// `L = κ₄ + G_max ‖ψ′κ₃‖`; the problem has a unique mild solution when `L < 1`.
pub fn contraction_certificate(
    spec: &ProblemSpec,
    kappa3: &Expr,
    kappa4: f64,
    cfg: &QuadConfig,
) -> Result<ContractionCertificate> {
    if !(kappa4 >= 0.0) {
        return Err(Error::Assumption(format!("kappa4 must be >= 0, got {kappa4}")));
    }
    check_nonnegative("kappa3", kappa3, spec.chart())?;
    let weight_norm = weight_norm(spec, kappa3, cfg)?;
    let gmax = spec.kernel()?.gmax();
    let lipschitz = kappa4 + gmax * weight_norm;
    Ok(ContractionCertificate { kappa4, weight_norm, gmax, lipschitz, satisfied: lipschitz < 1.0 })
}

/// True only for a converged run backed by a satisfied contraction certificate.
pub fn uniqueness_claim(cert: &ContractionCertificate, solution: &SolutionGrid) -> bool {
    cert.satisfied && solution.converged
}

/// Log-spaced scan grid for [`existence_bound_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self { lo: 1e-6, hi: 1e6, points: 481 }
    }
}

impl ScanGrid {
    fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.hi > self.lo && self.points >= 2) {
            return Err(Error::Argument(format!("invalid scan grid {self:?}")));
        }
        Ok(())
    }

    pub fn point(&self, k: usize) -> f64 {
        let r = k as f64 / (self.points - 1) as f64;
        (self.lo.ln() + r * (self.hi.ln() - self.lo.ln())).exp()
    }
}

/// Smallest scan point with `M − Ψ(M)·factor/(1−κ) ≥ 1e−9·M`, after checking
/// that `Ψ` (an expression in `x`) is nondecreasing on the scanned range.
pub fn scan_existence(psi: &Expr, factor: f64, kappa: f64, grid: &ScanGrid) -> Result<Option<f64>> {
    grid.validate()?;
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::Assumption(format!("kappa must lie in [0, 1), got {kappa}")));
    }
    let eval = |r: f64| psi.eval(0.0, r).map_err(Error::from);
    let dense = ScanGrid { points: ASSUMPTION_SAMPLES, ..*grid };
    let mut prev = eval(dense.point(0))?;
    for k in 1..dense.points {
        let m = dense.point(k);
        let v = eval(m)?;
        if v < prev - 1e-12 * prev.abs().max(1.0) {
            return Err(Error::Assumption(format!("Psi must be nondecreasing, but Psi({m}) = {v} < {prev}")));
        }
        prev = v;
    }
    for k in 0..grid.points {
        let m = grid.point(k);
        if m - eval(m)? * factor / (1.0 - kappa) >= 1e-9 * m {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

pub fn existence_bound_search(
    spec: &ProblemSpec,
    kappa1: &Expr,
    psi: &Expr,
    kappa: f64,
    grid: &ScanGrid,
    cfg: &QuadConfig,
) -> Result<ExistenceCertificate> {
    check_nonnegative("kappa1", kappa1, spec.chart())?;
    let weight_norm = weight_norm(spec, kappa1, cfg)?;
    let gmax = spec.kernel()?.gmax();
    let m_found = scan_existence(psi, gmax * weight_norm, kappa, grid)?;
    Ok(ExistenceCertificate { kappa, psi: psi.clone(), weight_norm, gmax, m_found, satisfied: m_found.is_some() })
}

/// `sup |D^α(D^β x)(t_j) + f(t_j, x_j)|` over interior nodes, or `None` when the
/// source is declared singular.
pub fn ode_residual(spec: &ProblemSpec, x: &SolutionGrid) -> Result<Option<f64>> {
    if spec.singular.is_some() {
        return Ok(None);
    }
    let chart = spec.chart();
    let n = x.values.len();
    let gx = GridFunction::with_leading_power(chart, spec.beta, x.values.clone())?;
    let mut inner = vec![0.0; n];
    for j in 1..n {
        inner[j] = caputo_derivative(spec.beta, chart, &gx, gx.nodes()[j])?;
    }
    let (_, t) = psi_grid(chart, n);
    inner[0] = 3.0 * inner[1] - 3.0 * inner[2] + inner[3];
    let gy = GridFunction::from_values(chart, inner)?;
    let mut worst = 0.0f64;
    for j in 1..n - 1 {
        let outer = caputo_derivative(spec.alpha, chart, &gy, t[j])?;
        let f = spec.f().eval(t[j], x.values[j]).map_err(|source| Error::SourceEval {
            tau: t[j],
            x: x.values[j],
            source,
        })?;
        worst = worst.max((outer + f).abs());
    }
    Ok(Some(worst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical(f: &str, boundary: BoundaryFunctional) -> ProblemSpec {
        ProblemSpec::new(1.0, 1.0, PsiChart::identity(0.0, 1.0).unwrap(), Expr::parse(f).unwrap(), boundary).unwrap()
    }

    #[test]
    fn boundary_parsing() {
        assert_eq!(BoundaryFunctional::parse("zero").unwrap(), BoundaryFunctional::zero());
        assert_eq!(BoundaryFunctional::parse("point:0.5, 0.25").unwrap(), BoundaryFunctional::point(0.5, 0.25));
        assert_eq!(BoundaryFunctional::parse("mean:-0.3").unwrap(), BoundaryFunctional::mean(-0.3));
        assert!(BoundaryFunctional::parse("point:1").is_err());
        assert!(BoundaryFunctional::parse("edge").is_err());
        assert_eq!(BoundaryFunctional::mean(-0.3).lipschitz(), 0.3);
    }

    #[test]
    fn spec_validation() {
        let id = PsiChart::identity(0.0, 1.0).unwrap();
        let f = Expr::constant(0.0);
        assert!(ProblemSpec::new(0.4, 0.5, id.clone(), f.clone(), BoundaryFunctional::zero()).is_err());
        assert!(ProblemSpec::new(1.0, 1.0, id.clone(), f.clone(), BoundaryFunctional::point(0.5, 0.0)).is_err());
        assert!(ProblemSpec::new(1.0, 1.0, id, f, BoundaryFunctional::point(0.5, 1.0)).is_ok());
    }

    #[test]
    fn zero_is_fixed_point_of_zero_problem() {
        let spec = classical("0", BoundaryFunctional::zero());
        let disc = Discretization::new(&spec, 33).unwrap();
        assert!(disc.apply(&vec![0.0; 33]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn classical_source_one_step() {
        let spec = classical("2", BoundaryFunctional::zero());
        let disc = Discretization::new(&spec, 65).unwrap();
        let sx = disc.apply(&vec![0.0; 65]).unwrap();
        for (t, v) in disc.nodes().iter().zip(&sx) {
            assert!((v - t * (1.0 - t)).abs() < 1e-14);
        }
        assert!((sx[32] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn point_and_mean_boundaries_hold_exactly() {
        for bc in [BoundaryFunctional::point(0.5, 0.3), BoundaryFunctional::mean(0.4)] {
            let spec = classical("1 + 0.2*sin(x)", bc);
            let sol = picard_solve(&spec, 129, 1e-12, 200, None).unwrap();
            assert!(sol.converged);
            assert_eq!(sol.values[0], 0.0);
            let disc = Discretization::new(&spec, 129).unwrap();
            let g = disc.boundary_value(&sol.values);
            assert!((sol.values[128] - g).abs() <= 1e-11);
        }
    }

    #[test]
    fn source_errors_carry_location() {
        let spec = classical("ln(x)", BoundaryFunctional::zero());
        let err = picard_solve(&spec, 17, 1e-9, 10, None).unwrap_err();
        assert!(matches!(err, Error::SourceEval { x, .. } if x == 0.0));
    }

    #[test]
    fn divergence_is_a_result_state() {
        let spec = classical("50*x + 1", BoundaryFunctional::zero());
        let sol = picard_solve(&spec, 33, 1e-9, 500, None).unwrap();
        assert!(!sol.converged);
        assert!(sol.update_history.len() >= 2);
    }

    #[test]
    fn certificate_examples() {
        let spec = classical("0", BoundaryFunctional::zero());
        let cfg = QuadConfig::default();
        let c = contraction_certificate(&spec, &Expr::constant(0.0), 0.0, &cfg).unwrap();
        assert_eq!(c.lipschitz, 0.0);
        assert!(c.satisfied);
        let c = contraction_certificate(&spec, &Expr::constant(3.0), 0.0, &cfg).unwrap();
        assert!((c.lipschitz - 0.75).abs() < 1e-14 && c.satisfied);
        let c = contraction_certificate(&spec, &Expr::constant(4.0), 0.0, &cfg).unwrap();
        assert!(!c.satisfied);
        let neg = contraction_certificate(&spec, &Expr::parse("t - 0.5").unwrap(), 0.0, &cfg).unwrap_err();
        assert!(neg.is_assumption());
    }

    #[test]
    fn singular_weight_certificate() {
        let spec = classical("0", BoundaryFunctional::zero()).with_singular_exponents(0.5, 0.5).unwrap();
        let k = Expr::parse("0.5*(1-t)^(-0.5)*t^(-0.5)").unwrap();
        let c = contraction_certificate(&spec, &k, 0.1, &QuadConfig::default()).unwrap();
        let want = 0.1 + 0.25 * 0.5 * std::f64::consts::PI;
        assert!((c.lipschitz - want).abs() < 1e-9, "{} vs {want}", c.lipschitz);
        assert!(c.satisfied);
    }

    #[test]
    fn scan_examples() {
        let grid = ScanGrid::default();
        let m = scan_existence(&Expr::parse("sqrt(x)").unwrap(), 1.0, 0.0, &grid).unwrap().unwrap();
        assert!((m - grid.point(241)).abs() < 1e-12 * m, "{m}");
        assert!(scan_existence(&Expr::parse("x").unwrap(), 2.0, 0.0, &grid).unwrap().is_none());
        let err = scan_existence(&Expr::parse("1/x").unwrap(), 1.0, 0.0, &grid).unwrap_err();
        assert!(err.is_assumption());
        assert!(scan_existence(&Expr::parse("x").unwrap(), 0.5, 1.0, &grid).unwrap_err().is_assumption());
    }

    #[test]
    fn residual_of_zero_solution() {
        let spec = classical("0", BoundaryFunctional::zero());
        let sol = picard_solve(&spec, 64, 1e-12, 10, None).unwrap();
        assert!(ode_residual(&spec, &sol).unwrap().unwrap() <= 1e-10);
        let sing = spec.with_singular_exponents(0.3, 0.0).unwrap();
        assert!(ode_residual(&sing, &sol).unwrap().is_none());
    }
}
