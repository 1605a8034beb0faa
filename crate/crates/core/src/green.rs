//! The two-branch Green kernel of the sequential problem, its closed-form
//! extrema, a brute-force maximum oracle, and the product-integration weights
//! shared by the Picard solver and the Nyström operator.
//!
//! With `σ = ψ(·) − ψ(a)`, `L = ψ(b) − ψ(a)` and `p = α + β − 1`:
//!
//! ```text
//! g₁(τ,t) = C σ_t^β (L − σ_τ)^p − D (σ_t − σ_τ)^p     τ ≤ t
//! g₂(τ,t) = C σ_t^β (L − σ_τ)^p                       τ ≥ t
//! ```
//!
//! where `C = 1/(Γ(α+β) L^β)` and `D = 1/Γ(α+β)`. The kernel depends on the
//! chart only through these offsets, so all numerics run in `σ`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::psi::PsiChart;
use crate::quad::{gamma_fn, weight_factor, QuadConfig, QuadratureRule};

#[derive(Debug, Clone)]
pub struct GreenKernel {
    alpha: f64,
    beta: f64,
    chart: PsiChart,
    c: f64,
    d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenMaxReport {
    pub step1_value: f64,
    pub step2_boundary_value: f64,
    pub tau0: f64,
    pub t0: f64,
    pub gmax: f64,
    pub paper_formula_value: f64,
    pub grid_oracle_value: f64,
    pub oracle_n: usize,
    pub discrepancy_flag: bool,
}

/// Checks `0 < α, β ≤ 1` and `α + β > 1`.
pub fn check_orders(alpha: f64, beta: f64) -> Result<()> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Domain(format!("{name} must lie in (0, 1], got {v}")));
        }
    }
    if !(alpha + beta > 1.0) {
        return Err(Error::Domain(format!("alpha + beta must exceed 1, got {}", alpha + beta)));
    }
    Ok(())
}

impl GreenKernel {
    pub fn new(alpha: f64, beta: f64, chart: PsiChart) -> Result<Self> {
        check_orders(alpha, beta)?;
        let d = 1.0 / gamma_fn(alpha + beta)?;
        let c = d / chart.range().powf(beta);
        let back = c * chart.range().powf(beta);
        if ((back - d) / d).abs() > 1e-14 {
            return Err(Error::Numeric(format!("kernel constants inconsistent: C L^beta = {back}, D = {d}")));
        }
        Ok(Self { alpha, beta, chart, c, d })
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

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `α + β − 1`.
    pub fn p(&self) -> f64 {
        self.alpha + self.beta - 1.0
    }

    pub fn range(&self) -> f64 {
        self.chart.range()
    }

    /// `G(τ, t)`; the diagonal takes the `g₂` branch.
    pub fn eval(&self, tau: f64, t: f64) -> Result<f64> {
        let st = self.chart.value(t)? - self.chart.lo();
        let su = self.chart.value(tau)? - self.chart.lo();
        Ok(self.eval_offsets(su.max(0.0), st.max(0.0)))
    }

    pub fn g1(&self, tau: f64, t: f64) -> Result<f64> {
        let st = self.chart.value(t)? - self.chart.lo();
        let su = self.chart.value(tau)? - self.chart.lo();
        Ok(self.boundary_part(su, st) - self.d * (st - su).max(0.0).powf(self.p()))
    }

    pub fn g2(&self, tau: f64, t: f64) -> Result<f64> {
        let st = self.chart.value(t)? - self.chart.lo();
        let su = self.chart.value(tau)? - self.chart.lo();
        Ok(self.boundary_part(su, st))
    }

    fn boundary_part(&self, su: f64, st: f64) -> f64 {
        let l = self.range();
        self.c * st.max(0.0).powf(self.beta) * (l - su).max(0.0).powf(self.p())
    }

    /// `G` in offset coordinates `σ_τ, σ_t ∈ [0, L]`.
    pub fn eval_offsets(&self, su: f64, st: f64) -> f64 {
        let bp = self.boundary_part(su, st);
        if su < st {
            bp - self.d * (st - su).powf(self.p())
        } else {
            bp
        }
    }

    /// Interior stationary points `τ₀` of the diagonal bound and `t₀` of the
    /// boundary branch, both mapped back through `ψ⁻¹`.
    pub fn critical_points(&self) -> Result<(f64, f64)> {
        let (p, b) = (self.p(), self.beta);
        let (lo, hi) = (self.chart.lo(), self.chart.hi());
        let tau0 = self.chart.inverse((b * hi + p * lo) / (p + b))?;
        let t0 = self.chart.inverse(lo + (p / (p + b)).powf(1.0 / b) * self.range())?;
        Ok((tau0, t0))
    }

    /// `(1/Γ(α+β)) L^p β^β p^p / (p+β)^(p+β)`: the diagonal bound at `τ₀`.
    pub fn step1_value(&self) -> f64 {
        let (p, b) = (self.p(), self.beta);
        self.d * self.range().powf(p) * b.powf(b) * p.powf(p) / (p + b).powf(p + b)
    }

    /// `(β/((p+β)Γ(α+β))) (p/(p+β))^(p/β) L^p`.
    pub fn step2_boundary_value(&self) -> f64 {
        let (p, b) = (self.p(), self.beta);
        b / (p + b) * self.d * (p / (p + b)).powf(p / b) * self.range().powf(p)
    }

    /// The maximum as displayed with first argument `β^β p^p`.
    pub fn paper_formula_value(&self) -> f64 {
        let (p, b) = (self.p(), self.beta);
        let second = b * p.powf(p / b) / (p + b).powf((p + b) / b);
        self.d * self.range().powf(p) * (b.powf(b) * p.powf(p)).max(second)
    }

    /// Corrected closed-form `max |G|`.
    pub fn gmax(&self) -> f64 {
        self.step1_value().max(self.step2_boundary_value())
    }

    /// Closed forms plus a brute-force maximum of `|G|` on an
    /// `oracle_n × oracle_n` ψ-uniform grid, refined by golden-section search.
    pub fn green_max(&self, oracle_n: usize) -> Result<GreenMaxReport> {
        if oracle_n < 101 {
            return Err(Error::Argument(format!("oracle grid needs >= 101 points per side, got {oracle_n}")));
        }
        let (tau0, t0) = self.critical_points()?;
        let grid_oracle_value = self.oracle_max(oracle_n);
        let paper_formula_value = self.paper_formula_value();
        Ok(GreenMaxReport {
            step1_value: self.step1_value(),
            step2_boundary_value: self.step2_boundary_value(),
            tau0,
            t0,
            gmax: self.gmax(),
            paper_formula_value,
            grid_oracle_value,
            oracle_n,
            discrepancy_flag: (paper_formula_value - grid_oracle_value).abs() / grid_oracle_value > 1e-2,
        })
    }

    fn oracle_max(&self, n: usize) -> f64 {
        let l = self.range();
        let h = l / (n - 1) as f64;
        let at = |k: usize| if k == n - 1 { l } else { k as f64 * h };
        let rows: Vec<(f64, usize)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let st = at(i);
                let mut best = (f64::NEG_INFINITY, 0);
                for j in 0..n {
                    let v = self.eval_offsets(at(j), st).abs();
                    if v > best.0 {
                        best = (v, j);
                    }
                }
                best
            })
            .collect();
        let (mut best, mut bi, mut bj) = (f64::NEG_INFINITY, 0, 0);
        for (i, &(v, j)) in rows.iter().enumerate() {
            if v > best {
                (best, bi, bj) = (v, i, j);
            }
        }
        let f = |su: f64, st: f64| self.eval_offsets(su.clamp(0.0, l), st.clamp(0.0, l)).abs();
        let (mut su, mut st) = (at(bj), at(bi));
        for _ in 0..4 {
            let (s0, s1) = ((su - 2.0 * h).max(0.0), (su + 2.0 * h).min(l));
            let cur_t = st;
            su = golden_max(|x| f(x, cur_t), s0, s1, su);
            let (t0, t1) = ((st - 2.0 * h).max(0.0), (st + 2.0 * h).min(l));
            let cur_u = su;
            st = golden_max(|x| f(cur_u, x), t0, t1, st);
            // move along the diagonal direction, where the maximum usually sits
            let shift = st - su;
            let lo = (su - 2.0 * h).max(0.0).max(-shift);
            let hi = (su + 2.0 * h).min(l).min(l - shift);
            if hi > lo {
                su = golden_max(|x| f(x, x + shift), lo, hi, su);
                st = su + shift;
            }
            // the kernel on the diagonal itself
            if (st - su).abs() <= 2.0 * h {
                let lo = (su.min(st) - 2.0 * h).max(0.0);
                let hi = (su.max(st) + 2.0 * h).min(l);
                let d = golden_max(|x| f(x, x), lo, hi, su);
                if f(d, d) > f(su, st) {
                    (su, st) = (d, d);
                }
            }
        }
        best.max(f(su, st))
    }

    /// `(2/Γ(α+β)) (ψ(t₂) − ψ(t₁))^p − |G(τ,t₂) − G(τ,t₁)|`.
    pub fn continuity_margin(&self, tau: f64, t1: f64, t2: f64) -> Result<f64> {
        if t1 > t2 {
            return Err(Error::Argument(format!("continuity margin needs t1 <= t2, got {t1} > {t2}")));
        }
        let (g_a, g_b) = (self.eval(tau, t1)?, self.eval(tau, t2)?);
        let du = (self.chart.value(t2)? - self.chart.value(t1)?).max(0.0);
        let bound = 2.0 * self.d * du.powf(self.p());
        Ok(bound - (g_b - g_a).abs())
    }
}

// Golden-section maximization of a locally unimodal function on [lo, hi];
// never returns a point worse than `start`.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, start: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc > fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = start;
    for x in [lo, hi, mid] {
        if f(x) > f(best) {
            best = x;
        }
    }
    best
}

/// Algebraic endpoint weight `(L − σ)^(−γ) σ^(−μ)` of a singular source, in
/// offset coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointWeight {
    pub gamma: f64,
    pub mu: f64,
}

impl EndpointWeight {
    pub const NONE: Self = Self { gamma: 0.0, mu: 0.0 };

    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        if !(gamma < 1.0 && mu < 1.0) {
            return Err(Error::NonIntegrable(format!(
                "singular exponents must be < 1, got gamma = {gamma}, mu = {mu}"
            )));
        }
        Ok(Self { gamma, mu })
    }

    pub fn is_none(&self) -> bool {
        self.gamma == 0.0 && self.mu == 0.0
    }

    /// Weight from the two distances `σ` and `L − σ`.
    pub fn at(&self, from_lo: f64, to_hi: f64) -> f64 {
        weight_factor(to_hi, self.gamma) * weight_factor(from_lo, self.mu)
    }
}

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), n * n, "matrix rows must be square");
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `max |A − Aᵀ|` entrywise.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

const CELL_POINTS: usize = 8;

struct CellRules {
    smooth: QuadratureRule,
    graded: QuadConfig,
}

impl CellRules {
    fn new() -> Self {
        let smooth = QuadConfig { n_panels: 2, points_per_panel: CELL_POINTS, grading: 3.0 };
        Self {
            smooth: QuadratureRule::unit(0.0, 0.0, &smooth),
            graded: QuadConfig { n_panels: 12, points_per_panel: CELL_POINTS, grading: 3.0 },
        }
    }

    fn rule(&self, left: f64, right: f64) -> QuadratureRule {
        if left == 0.0 && right == 0.0 {
            self.smooth.clone()
        } else {
            QuadratureRule::unit(left, right, &self.graded)
        }
    }
}

/// Product-integration weights `W[i][j] ≈ ∫ G(σ, σ_i) w(σ) ℓ_j(σ) dσ` on the
/// `n_nodes` ψ-uniform grid, where `ℓ_j` are the piecewise-linear hat
/// functions in `σ` and `w` is the endpoint weight. For a source sampled as
/// `F = w·φ` with `φ ≈ Σ φ_j ℓ_j`, `∫ G ψ′ f dτ ≈ Σ_j W[i][j] φ_j`.
///
/// Rows are assembled as `D[(σ_i/L)^β B[N][j] − B[i][j]]` where
/// `B[i][j] = ∫_0^{σ_i} (σ_i − σ)^p w ℓ_j`, so the first and last rows vanish
/// identically and the boundary conditions hold exactly.
pub fn product_weights(kernel: &GreenKernel, n_nodes: usize, weight: EndpointWeight) -> Result<Matrix> {
    if n_nodes < 3 {
        return Err(Error::Resolution(format!("need at least 3 nodes, got {n_nodes}")));
    }
    let n = n_nodes - 1;
    let l = kernel.range();
    let h = l / n as f64;
    let p = kernel.p();
    let rules = CellRules::new();
    let b_rows: Vec<Vec<f64>> = if weight.is_none() {
        toeplitz_rows(&rules, n, h, p)
    } else {
        (0..=n).into_par_iter().map(|i| weighted_row(&rules, n, h, p, weight, i)).collect()
    };
    let last = &b_rows[n];
    let beta = kernel.beta();
    let mut w = Matrix::zeros(n_nodes);
    for i in 1..n {
        let scale = (i as f64 / n as f64).powf(beta);
        let row = w.row_mut(i);
        for j in 0..=n {
            row[j] = kernel.d() * (scale * last[j] - b_rows[i][j]);
        }
    }
    Ok(w)
}

// B rows for w ≡ 1: cell integrals depend only on the distance i − k in cells.
fn toeplitz_rows(rules: &CellRules, n: usize, h: f64, p: f64) -> Vec<Vec<f64>> {
    let singular = rules.rule(0.0, -p);
    let smooth = &rules.smooth;
    let scale = h.powf(p + 1.0);
    // left[m], right[m]: ∫₀¹ (m − v)^p (1 − v) dv and ∫₀¹ (m − v)^p v dv
    let mut left = vec![0.0; n + 1];
    let mut right = vec![0.0; n + 1];
    for m in 1..=n {
        let rule = if m == 1 { &singular } else { smooth };
        let mf = (m - 1) as f64;
        left[m] = scale * rule.integrate_with_distances(|_, _, dh| (mf + dh).powf(p) * dh);
        right[m] = scale * rule.integrate_with_distances(|_, v, dh| (mf + dh).powf(p) * v);
    }
    (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n + 1];
            for k in 0..i {
                let m = i - k;
                row[k] += left[m];
                row[k + 1] += right[m];
            }
            row
        })
        .collect()
}

fn weighted_row(rules: &CellRules, n: usize, h: f64, p: f64, w: EndpointWeight, i: usize) -> Vec<f64> {
    let mut row = vec![0.0; n + 1];
    for k in 0..i {
        let lo = k as f64 * h;
        let left_exp = if k == 0 { w.mu } else { 0.0 };
        let mut right_exp = if k + 1 == i { -p } else { 0.0 };
        if k + 1 == n {
            right_exp += w.gamma;
        }
        let rule = rules.rule(left_exp, right_exp).scaled(0.0, h);
        let gap = (i - k - 1) as f64 * h;
        let top = (n - k - 1) as f64 * h;
        let (mut a, mut b) = (0.0, 0.0);
        for ((&dl, &dh), &wt) in rule.from_lo().iter().zip(rule.to_hi()).zip(rule.weights()) {
            let kern = (gap + dh).powf(p) * w.at(lo + dl, top + dh) * wt;
            a += kern * dh;
            b += kern * dl;
        }
        row[k] += a / h;
        row[k + 1] += b / h;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn classical() -> GreenKernel {
        GreenKernel::new(1.0, 1.0, PsiChart::identity(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn classical_dirichlet_kernel() {
        let k = classical();
        for &(tau, t) in &[(0.2, 0.7), (0.7, 0.2), (0.5, 0.5), (0.0, 0.3), (1.0, 0.4)] {
            let want = if t <= tau { t * (1.0 - tau) } else { tau * (1.0 - t) };
            assert!((k.eval(tau, t).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn vanishes_at_left_end_and_branches_agree() {
        let k = GreenKernel::new(0.7, 0.6, PsiChart::log(1.0, 3.0).unwrap()).unwrap();
        for &tau in &[1.0, 1.5, 2.9, 3.0] {
            assert_eq!(k.eval(tau, 1.0).unwrap(), 0.0);
        }
        for &t in &[1.0, 1.3, 2.0, 3.0] {
            assert_eq!(k.g1(t, t).unwrap() - k.g2(t, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_orders() {
        let id = PsiChart::identity(0.0, 1.0).unwrap();
        assert!(GreenKernel::new(0.5, 0.5, id.clone()).is_err());
        assert!(GreenKernel::new(1.2, 0.5, id.clone()).is_err());
        assert!(GreenKernel::new(0.0, 1.0, id).is_err());
    }

    #[test]
    fn classical_critical_points_are_central() {
        let (tau0, t0) = classical().critical_points().unwrap();
        assert!((tau0 - 0.5).abs() < 1e-15 && (t0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn critical_points_examples() {
        let k = GreenKernel::new(0.5, 0.8, PsiChart::identity(0.0, 1.0).unwrap()).unwrap();
        let (tau0, t0) = k.critical_points().unwrap();
        assert!((tau0 - 0.8 / 1.1).abs() < 1e-15);
        assert!((t0 - (0.3f64 / 1.1).powf(1.25)).abs() < 1e-15);
        let k = GreenKernel::new(0.9, 0.9, PsiChart::log(1.0, E).unwrap()).unwrap();
        let (tau0, _) = k.critical_points().unwrap();
        assert!((tau0 - (9.0f64 / 17.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn classical_maximum_report() {
        let r = classical().green_max(201).unwrap();
        assert!((r.grid_oracle_value - 0.25).abs() < 1e-12);
        assert_eq!(r.step1_value, 0.25);
        assert_eq!(r.step2_boundary_value, 0.25);
        assert_eq!(r.gmax, 0.25);
        assert_eq!(r.paper_formula_value, 1.0);
        assert!(r.discrepancy_flag);
        assert!(classical().green_max(100).is_err());
    }

    #[test]
    fn continuity_margin_rules() {
        let k = classical();
        assert_eq!(k.continuity_margin(0.3, 0.4, 0.4).unwrap(), 0.0);
        assert!(matches!(k.continuity_margin(0.3, 0.6, 0.4), Err(Error::Argument(_))));
        // G(0.5, 0.25) = 0.125, G(0.5, 0.75) = 0.125, bound 2·0.5
        assert!((k.continuity_margin(0.5, 0.25, 0.75).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_weights_classical_quadratic() {
        // f ≡ 2 gives t(1 − t) exactly, since G is linear on every cell
        let k = classical();
        let w = product_weights(&k, 17, EndpointWeight::NONE).unwrap();
        let x = w.mul_vec(&[2.0; 17]);
        for (j, v) in x.iter().enumerate() {
            let t = j as f64 / 16.0;
            assert!((v - t * (1.0 - t)).abs() < 1e-14, "node {j}: {v}");
        }
    }

    #[test]
    fn weighted_rows_match_toeplitz_for_unit_weight() {
        let k = GreenKernel::new(0.8, 0.7, PsiChart::identity(0.0, 2.0).unwrap()).unwrap();
        let fast = product_weights(&k, 33, EndpointWeight::NONE).unwrap();
        // a vanishing exponent routed through the weighted path
        let slow = product_weights(&k, 33, EndpointWeight { gamma: 1e-300, mu: 0.0 }).unwrap();
        for i in 0..33 {
            for j in 0..33 {
                assert!((fast.get(i, j) - slow.get(i, j)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn weighted_rows_integrate_singular_source() {
        // φ ≡ 1 with w = (L−σ)^(−1/2) σ^(−1/2): row i equals ∫ G(σ, σ_i) w dσ
        let k = GreenKernel::new(0.9, 0.8, PsiChart::identity(0.0, 1.0).unwrap()).unwrap();
        let w = EndpointWeight::new(0.5, 0.5).unwrap();
        let m = product_weights(&k, 65, w).unwrap();
        let cfg = QuadConfig::with_panels(512);
        for i in [8, 32, 50] {
            let st = i as f64 / 64.0;
            let left = QuadratureRule::new(0.0, st, 0.5, -k.p(), &cfg).unwrap();
            let right = QuadratureRule::new(st, 1.0, 0.0, 0.5, &cfg).unwrap();
            let g = |s: f64| k.eval_offsets(s, st);
            let exact = left.integrate_with_distances(|s, dl, _| g(s) * w.at(dl, 1.0 - s))
                + right.integrate_with_distances(|s, _, dh| g(s) * w.at(s, dh));
            let got: f64 = m.row(i).iter().sum();
            assert!((got - exact).abs() < 1e-10, "row {i}: {got} vs {exact}");
        }
    }
}
