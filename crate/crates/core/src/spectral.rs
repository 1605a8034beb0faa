//! Nyström discretization of `(Kx)(t) = ∫ₐᵇ G(τ,t) ψ′(τ) q(τ) x(τ) dτ`, its
//! spectral radius, and the eigenvalue and Lyapunov-type bounds built on the
//! kernel maximum.
//!
//! The matrix uses the same product-integration weights as the solver, so the
//! Picard map of `f = q·x` and the Nyström matrix coincide on the grid. A
//! nonzero linear boundary functional `ℓ` enters through
//! `x = v ℓ(x) + λ K x`, i.e. the operator `(I − v ℓᵀ)⁻¹ K`, applied with the
//! Sherman–Morrison formula.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::green::{product_weights, EndpointWeight, GreenKernel, Matrix};
use crate::psi::{PsiChart, PsiKind};
use crate::solver::{self, BoundaryKind, ProblemSpec, ASSUMPTION_SAMPLES};
use crate::QuadConfig;

pub const MIN_NYSTROM_NODES: usize = 16;
pub const MAX_POWER_ITERATIONS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;
const RESTARTS: u64 = 3;

#[derive(Debug, Clone)]
pub struct NystromOperator {
    n: usize,
    nodes: Vec<f64>,
    q: Vec<f64>,
    k: Matrix,
    q_negative: bool,
}

impl NystromOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `q` sampled at the nodes.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn matrix(&self) -> &Matrix {
        &self.k
    }

    /// Set when `q` took negative values; the matrix then uses `|q|`.
    pub fn q_negative(&self) -> bool {
        self.q_negative
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.k.mul_vec(x)
    }
}

// Linear row representing the boundary functional on grid values.
fn boundary_row(spec: &ProblemSpec, u: &[f64], t: &[f64]) -> Option<Vec<f64>> {
    let n = u.len();
    let chart = spec.chart();
    match spec.boundary().kind() {
        BoundaryKind::Zero => None,
        BoundaryKind::Point { c, eta } => {
            let mut row = vec![0.0; n];
            let target = chart.value(eta).unwrap_or(chart.hi());
            let h = u[1] - u[0];
            let k = (((target - u[0]) / h).floor().max(0.0) as usize).min(n - 2);
            let r = ((target - u[k]) / h).clamp(0.0, 1.0);
            row[k] = c * (1.0 - r);
            row[k + 1] += c * r;
            Some(row)
        }
        BoundaryKind::Mean { c } => {
            let mut row = vec![0.0; n];
            let scale = c / (chart.b() - chart.a());
            for j in 1..n {
                let half = 0.5 * (t[j] - t[j - 1]) * scale;
                row[j - 1] += half;
                row[j] += half;
            }
            Some(row)
        }
    }
}

/// Dense `n × n` Nyström matrix; `q` defaults to 1.
pub fn build_nystrom(spec: &ProblemSpec, q: Option<&Expr>, n: usize) -> Result<NystromOperator> {
    if n < MIN_NYSTROM_NODES {
        return Err(Error::Resolution(format!("Nyström operator needs >= {MIN_NYSTROM_NODES} nodes, got {n}")));
    }
    let chart = spec.chart();
    let kernel = spec.kernel()?;
    let w = product_weights(&kernel, n, EndpointWeight::NONE)?;
    let (u, t) = crate::fracops::psi_grid(chart, n);
    let mut q_vals = Vec::with_capacity(n);
    let mut q_negative = false;
    for &tj in &t {
        let v = match q {
            Some(e) => e.eval(chart.interior_inverse(chart.raw_value(tj)), 0.0)?,
            None => 1.0,
        };
        q_negative |= v < 0.0;
        q_vals.push(v);
    }
    // x(a) = 0 on the range of K, and x(b) = 0 as well under the zero
    // condition, so those columns act only on pinned values
    let ell = boundary_row(spec, &u, &t);
    let last_free = if ell.is_some() { n } else { n - 1 };
    let mut k = Matrix::zeros(n);
    for i in 0..n {
        let row = k.row_mut(i);
        for j in 1..last_free {
            row[j] = w.get(i, j) * q_vals[j].abs();
        }
    }
    if let Some(ell) = ell {
        let v: Vec<f64> = (0..n).map(|i| (i as f64 / (n - 1) as f64).powf(spec.beta())).collect();
        let denom = 1.0 - ell.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        if denom.abs() < 1e-12 {
            return Err(Error::Numeric("boundary functional makes the eigen operator singular".into()));
        }
        // ℓᵀK
        let mut lk = vec![0.0; n];
        for (i, &li) in ell.iter().enumerate() {
            if li != 0.0 {
                for (acc, kij) in lk.iter_mut().zip(k.row(i)) {
                    *acc += li * kij;
                }
            }
        }
        for i in 1..n {
            let s = v[i] / denom;
            for (kij, lkj) in k.row_mut(i).iter_mut().zip(&lk) {
                *kij += s * lkj;
            }
        }
    }
    Ok(NystromOperator { n, nodes: t, q: q_vals, k, q_negative })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerIteration {
    pub radius: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// The dominant magnitude came from a complex-conjugate pair, so
    /// successive iterates rotate instead of settling.
    pub oscillatory: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let m = dot(x, x).sqrt();
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v /= m);
    }
    m
}

// Dominant magnitude from x, y = Kx, z = Ky with ‖x‖ = 1: fit z ≈ c₁y + c₀x
// and take the larger root of λ² − c₁λ − c₀. Returns (magnitude, complex).
fn two_step_estimate(x: &[f64], y: &[f64], z: &[f64]) -> (f64, bool) {
    let (xx, xy, yy) = (dot(x, x), dot(x, y), dot(y, y));
    let det = xx * yy - xy * xy;
    if det <= 1e-14 * xx * yy {
        // y is parallel to x: a real dominant eigenvalue
        return ((xy / xx).abs(), false);
    }
    let (yz, xz) = (dot(y, z), dot(x, z));
    let c1 = (xx * yz - xy * xz) / det;
    let c0 = (yy * xz - xy * yz) / det;
    let disc = c1 * c1 + 4.0 * c0;
    if disc < 0.0 {
        ((-c0).sqrt(), true)
    } else {
        let r = disc.sqrt();
        ((0.5 * (c1 + r)).abs().max((0.5 * (c1 - r)).abs()), false)
    }
}

/// Power iteration from a seeded random start. Each step fits the two-step
/// recurrence `K²x ≈ c₁Kx + c₀x` on the current iterate, so the dominant
/// magnitude converges also when it belongs to a complex-conjugate pair.
pub fn power_iteration(op: &NystromOperator, tol: f64, seed: u64) -> Result<PowerIteration> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tol must be > 0, got {tol}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..op.n).map(|_| rng.gen_range(0.5..1.5)).collect();
    normalize(&mut x);
    let mut prev = f64::NAN;
    for it in 1..=MAX_POWER_ITERATIONS {
        let y = op.apply(&x);
        if y.iter().all(|&v| v == 0.0) {
            return Ok(PowerIteration { radius: 0.0, vector: y, iterations: it, oscillatory: false });
        }
        let z = op.apply(&y);
        let (est, complex) = two_step_estimate(&x, &y, &z);
        if (est - prev).abs() <= tol * est {
            return Ok(PowerIteration { radius: est, vector: y, iterations: it, oscillatory: complex });
        }
        prev = est;
        x = z;
        if normalize(&mut x) == 0.0 {
            return Ok(PowerIteration { radius: 0.0, vector: x, iterations: it, oscillatory: false });
        }
    }
    Err(Error::Numeric(format!("power iteration did not converge in {MAX_POWER_ITERATIONS} iterations")))
}

/// Largest dominant-eigenvalue magnitude over three seeded restarts.
pub fn spectral_radius(op: &NystromOperator, tol: f64, seed: u64) -> Result<f64> {
    let mut best = 0.0f64;
    for r in 0..RESTARTS {
        best = best.max(power_iteration(op, tol, seed.wrapping_add(r))?.radius);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenBoundReport {
    pub spectral_radius_k: f64,
    pub min_abs_lambda_estimate: f64,
    pub lower_bound: f64,
    pub gmax: f64,
    pub kappa: f64,
    pub satisfied: bool,
    pub q_negative: bool,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::Assumption(format!("kappa must lie in [0, 1), got {kappa}")));
    }
    Ok(())
}

/// Smallest eigenvalue magnitude `1/ρ(K)` against `(1−κ)/(G_max (ψ(b)−ψ(a)))`.
pub fn eigen_bound_report(
    spec: &ProblemSpec,
    q: Option<&Expr>,
    kappa: f64,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<EigenBoundReport> {
    check_kappa(kappa)?;
    let op = build_nystrom(spec, q, n)?;
    let rho = spectral_radius(&op, tol, seed)?;
    let gmax = spec.kernel()?.gmax();
    let lower_bound = (1.0 - kappa) / (gmax * spec.chart().range());
    let min_abs_lambda_estimate = if rho > 0.0 { 1.0 / rho } else { f64::INFINITY };
    Ok(EigenBoundReport {
        spectral_radius_k: rho,
        min_abs_lambda_estimate,
        lower_bound,
        gmax,
        kappa,
        satisfied: min_abs_lambda_estimate >= lower_bound * (1.0 - 1e-6),
        q_negative: op.q_negative,
    })
}

/// Catalog of admissible `φ`, restricted to nonnegative arguments.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiSpec {
    /// `c0 + c1·s`.
    Linear { c0: f64, c1: f64 },
    /// `c0 + s^p` with `0 < p ≤ 1`.
    Power { c0: f64, p: f64 },
    /// Any expression in `x`, checked by sampling.
    Expr(Expr),
}

impl PhiSpec {
    pub fn identity() -> Self {
        PhiSpec::Linear { c0: 0.0, c1: 1.0 }
    }

    /// `linear:c0,c1`, `power:c0,p`, or an expression in `x`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let pair = |rest: &str| -> Result<(f64, f64)> {
            let (a, b) = rest
                .split_once(',')
                .ok_or_else(|| Error::Argument(format!("phi `{spec}` needs two comma-separated numbers")))?;
            let num = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| Error::Argument(format!("phi `{spec}`: `{s}` is not a number")))
            };
            Ok((num(a)?, num(b)?))
        };
        let phi = if let Some(rest) = spec.strip_prefix("linear:") {
            let (c0, c1) = pair(rest)?;
            PhiSpec::Linear { c0, c1 }
        } else if let Some(rest) = spec.strip_prefix("power:") {
            let (c0, p) = pair(rest)?;
            PhiSpec::Power { c0, p }
        } else {
            PhiSpec::Expr(Expr::parse(spec)?)
        };
        phi.validate()?;
        Ok(phi)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PhiSpec::Linear { c0, c1 } if !(c0 >= 0.0 && c1 >= 0.0 && c0 + c1 > 0.0) => {
                Err(Error::Assumption(format!("linear phi needs c0 >= 0, c1 >= 0, not both zero; got {c0}, {c1}")))
            }
            PhiSpec::Power { c0, p } if !(c0 >= 0.0 && p > 0.0 && p <= 1.0) => {
                Err(Error::Assumption(format!("power phi needs c0 >= 0 and 0 < p <= 1; got {c0}, {p}")))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        Ok(match self {
            PhiSpec::Linear { c0, c1 } => c0 + c1 * s,
            PhiSpec::Power { c0, p } => c0 + s.powf(*p),
            PhiSpec::Expr(e) => e.eval(0.0, s)?,
        })
    }

    /// Positivity, monotonicity and concavity on `[0, top]` by dense sampling.
    pub fn check_on(&self, top: f64) -> Result<()> {
        self.validate()?;
        let n = ASSUMPTION_SAMPLES;
        let step = top / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|k| self.eval(k as f64 * step)).collect::<Result<_>>()?;
        let scale = vals.iter().map(|v| v.abs()).fold(1e-300, f64::max);
        let slack = 1e-10 * scale;
        for k in 0..n {
            let s = k as f64 * step;
            if vals[k] < -slack || (s > 0.0 && vals[k] <= 0.0) {
                return Err(Error::Assumption(format!("phi must be positive, but phi({s}) = {}", vals[k])));
            }
            if k > 0 && vals[k] < vals[k - 1] - slack {
                return Err(Error::Assumption(format!("phi must be nondecreasing near {s}")));
            }
            if k > 1 && vals[k] - 2.0 * vals[k - 1] + vals[k - 2] > slack {
                return Err(Error::Assumption(format!("phi must be concave near {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    pub integral_value: f64,
    pub threshold: f64,
    pub gmax: f64,
    pub kappa: f64,
    pub norm: f64,
    pub satisfied: bool,
    /// `G1` for the identity chart, `G2` for the logarithmic one.
    pub chart_kind: String,
}

pub fn chart_kind_label(chart: &PsiChart) -> &'static str {
    match chart.kind() {
        PsiKind::Identity => "G1",
        PsiKind::Log => "G2",
        _ => "Gmax",
    }
}

/// `∫ψ′q` against `((1−κ)/G_max)·‖x‖/φ(‖x‖)` for a solution norm `‖x‖ > 0`.
pub fn lyapunov_report(
    spec: &ProblemSpec,
    q: &Expr,
    phi: &PhiSpec,
    norm: f64,
    kappa: f64,
    cfg: &QuadConfig,
) -> Result<LyapunovReport> {
    check_kappa(kappa)?;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Argument(format!("solution norm must be positive and finite, got {norm}")));
    }
    phi.check_on(2.0 * norm)?;
    let chart = spec.chart();
    for k in 0..ASSUMPTION_SAMPLES {
        let t = chart.interior_inverse(chart.lo() + chart.range() * (k as f64 + 0.5) / ASSUMPTION_SAMPLES as f64);
        let v = q.eval(t, 0.0)?;
        if !(v >= 0.0) {
            return Err(Error::Assumption(format!("q must be nonnegative, but q({t}) = {v}")));
        }
    }
    let integral_value = solver::weight_norm(spec, q, cfg)?;
    let kernel: GreenKernel = spec.kernel()?;
    let gmax = kernel.gmax();
    let phi_n = phi.eval(norm)?;
    let threshold = (1.0 - kappa) / gmax * norm / phi_n;
    Ok(LyapunovReport {
        integral_value,
        threshold,
        gmax,
        kappa,
        norm,
        satisfied: integral_value >= threshold - 1e-12,
        chart_kind: chart_kind_label(chart).to_string(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub psi: String,
    pub spectral_radius: f64,
    pub min_abs_lambda: f64,
    pub lower_bound: f64,
    pub satisfied: bool,
}

/// Eigenvalue bound over every admissible `(α, β)` pair and chart, with the
/// zero boundary and `q ≡ 1`.
pub fn eigen_sweep(
    orders: &[f64],
    charts: &[PsiChart],
    kappa: f64,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for chart in charts {
        for &alpha in orders {
            for &beta in orders {
                if alpha + beta <= 1.0 {
                    continue;
                }
                let spec = ProblemSpec::new(
                    alpha,
                    beta,
                    chart.clone(),
                    Expr::constant(0.0),
                    solver::BoundaryFunctional::zero(),
                )?;
                let r = eigen_bound_report(&spec, None, kappa, n, tol, seed)?;
                rows.push(SweepRow {
                    alpha,
                    beta,
                    psi: chart.label(),
                    spectral_radius: r.spectral_radius_k,
                    min_abs_lambda: r.min_abs_lambda_estimate,
                    lower_bound: r.lower_bound,
                    satisfied: r.satisfied,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["alpha", "beta", "psi", "spectral_radius", "min_abs_lambda", "lower_bound", "satisfied"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            r.alpha.to_string(),
            r.beta.to_string(),
            r.psi.clone(),
            format!("{:.12e}", r.spectral_radius),
            format!("{:.12e}", r.min_abs_lambda),
            format!("{:.12e}", r.lower_bound),
            r.satisfied.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::BoundaryFunctional;
    use std::f64::consts::PI;

    fn classical(bc: BoundaryFunctional) -> ProblemSpec {
        ProblemSpec::new(1.0, 1.0, PsiChart::identity(0.0, 1.0).unwrap(), Expr::constant(0.0), bc).unwrap()
    }

    #[test]
    fn zero_weight_gives_zero_operator() {
        let op = build_nystrom(&classical(BoundaryFunctional::zero()), Some(&Expr::constant(0.0)), 16).unwrap();
        assert!(op.apply(&[0.0; 16]).iter().all(|&v| v == 0.0));
        assert_eq!(spectral_radius(&op, 1e-10, DEFAULT_SEED).unwrap(), 0.0);
        assert!(build_nystrom(&classical(BoundaryFunctional::zero()), None, 15).is_err());
    }

    #[test]
    fn classical_operator_is_symmetric() {
        let op = build_nystrom(&classical(BoundaryFunctional::zero()), None, 64).unwrap();
        assert!(op.matrix().asymmetry() <= 1e-8, "{}", op.matrix().asymmetry());
    }

    #[test]
    fn classical_spectral_radius() {
        let op = build_nystrom(&classical(BoundaryFunctional::zero()), None, 512).unwrap();
        let rho = spectral_radius(&op, 1e-12, DEFAULT_SEED).unwrap();
        assert!((rho * PI * PI - 1.0).abs() < 1e-2, "{rho}");
    }

    #[test]
    fn classical_eigen_bound() {
        let r = eigen_bound_report(&classical(BoundaryFunctional::zero()), None, 0.0, 256, 1e-12, 42).unwrap();
        assert!((r.lower_bound - 4.0).abs() < 1e-12);
        assert!((r.min_abs_lambda_estimate - PI * PI).abs() < 0.01 * PI * PI);
        assert!(r.satisfied);
        let near_one =
            eigen_bound_report(&classical(BoundaryFunctional::zero()), None, 0.999_999, 64, 1e-10, 42).unwrap();
        assert!(near_one.lower_bound < 1e-5 && near_one.satisfied);
        assert!(eigen_bound_report(&classical(BoundaryFunctional::zero()), None, 1.0, 64, 1e-10, 42).is_err());
    }

    #[test]
    fn boundary_functional_shifts_spectrum() {
        // x(1) = 0.5 x(1/2) raises the dominant eigenvalue of K but keeps the bound
        let spec = classical(BoundaryFunctional::point(0.5, 0.5));
        let r = eigen_bound_report(&spec, None, 0.5, 128, 1e-12, 42).unwrap();
        let zero = eigen_bound_report(&classical(BoundaryFunctional::zero()), None, 0.0, 128, 1e-12, 42).unwrap();
        assert!(r.spectral_radius_k > zero.spectral_radius_k);
        assert!(r.satisfied);
    }

    #[test]
    fn negative_q_is_flagged() {
        let op =
            build_nystrom(&classical(BoundaryFunctional::zero()), Some(&Expr::parse("t - 0.5").unwrap()), 32).unwrap();
        assert!(op.q_negative());
        assert!(op.matrix().get(5, 3) >= 0.0);
    }

    #[test]
    fn classical_lyapunov_constant() {
        let r = lyapunov_report(
            &classical(BoundaryFunctional::zero()),
            &Expr::constant(1.0),
            &PhiSpec::identity(),
            1.0,
            0.0,
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((r.threshold - 4.0).abs() <= 1e-12);
        assert_eq!(r.chart_kind, "G1");
        assert!(!r.satisfied);
    }

    #[test]
    fn phi_catalog_checks() {
        assert!(PhiSpec::parse("linear:0,1").unwrap().check_on(2.0).is_ok());
        assert!(PhiSpec::parse("power:0.5,0.5").unwrap().check_on(2.0).is_ok());
        assert!(PhiSpec::parse("power:0.5,2").unwrap_err().is_assumption());
        assert!(PhiSpec::parse("x^2 + 1").unwrap().check_on(2.0).unwrap_err().is_assumption());
        assert!(PhiSpec::parse("1 - x").unwrap().check_on(2.0).unwrap_err().is_assumption());
        assert!(PhiSpec::parse("sqrt(x) + 0.1").unwrap().check_on(2.0).is_ok());
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = eigen_sweep(&[0.9, 1.0], &[PsiChart::identity(0.0, 1.0).unwrap()], 0.0, 32, 1e-10, 42).unwrap();
        assert_eq!(rows.len(), 4);
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("alpha,beta,psi,spectral_radius,min_abs_lambda,lower_bound,satisfied\n"));
        assert_eq!(text.lines().count(), 5);
        assert!(!text.contains('\r'));
    }

    fn synthetic(rows: Vec<Vec<f64>>) -> NystromOperator {
        let n = rows.len();
        NystromOperator { n, nodes: vec![0.0; n], q: vec![1.0; n], k: Matrix::from_rows(rows), q_negative: false }
    }

    #[test]
    fn rotating_pair_converges_to_modulus() {
        // a rotation by 1 rad scaled by 0.7 dominates a real eigenvalue 0.3
        let (c, s) = (0.7 * 1f64.cos(), 0.7 * 1f64.sin());
        let op = synthetic(vec![vec![c, -s, 0.0], vec![s, c, 0.0], vec![0.0, 0.0, 0.3]]);
        let pi = power_iteration(&op, 1e-12, DEFAULT_SEED).unwrap();
        assert!((pi.radius - 0.7).abs() < 1e-10, "{}", pi.radius);
        assert!(pi.oscillatory);
    }

    #[test]
    fn negative_dominant_eigenvalue() {
        let op = synthetic(vec![vec![-0.9, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.1]]);
        let pi = power_iteration(&op, 1e-12, DEFAULT_SEED).unwrap();
        assert!((pi.radius - 0.9).abs() < 1e-10, "{}", pi.radius);
        assert!(!pi.oscillatory);
    }
}
