use crate::error::{Error, Result};

use super::gauss::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Total panels, split evenly between the two halves of the interval.
    pub n_panels: usize,
    pub points_per_panel: usize,
    /// Base grading exponent applied toward every singular endpoint.
    pub grading: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { n_panels: 256, points_per_panel: 8, grading: 3.0 }
    }
}

impl QuadConfig {
    pub fn with_panels(n_panels: usize) -> Self {
        Self { n_panels, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_panels < 2 {
            return Err(Error::Argument(format!("quad.n_panels must be >= 2, got {}", self.n_panels)));
        }
        if self.points_per_panel < 1 {
            return Err(Error::Argument("quad.points_per_panel must be >= 1".into()));
        }
        if !(self.grading >= 1.0) {
            return Err(Error::Argument(format!("quad.grading must be >= 1, got {}", self.grading)));
        }
        Ok(())
    }
}

/// Composite Gauss–Legendre rule on `[lo, hi]`, graded toward each endpoint
/// that carries an algebraic factor `(u - lo)^(-left_exp)` or
/// `(hi - u)^(-right_exp)`.
///
/// The interval is split at its midpoint. On each half the panels are uniform
/// in `v ∈ [0, 1]` and mapped by `u = end ± H·v^q`, which is a graded mesh with
/// exponent `q`. For an endpoint exponent `e ≠ 0` the rule uses
/// `q = grading · max(1, 1/(1 - e))`, so the Jacobian `q H v^(q-1)` cancels the
/// endpoint factor down to the smooth power `v^(grading·...)`. Sides with
/// `e = 0` use `q = 1`, so the rule degenerates to plain composite
/// Gauss–Legendre and keeps its polynomial exactness.
///
/// Distances to both ends are stored per node without cancellation, because
/// singular factors evaluated from `u - lo` lose all relative precision once
/// a node sits within a few ulps of `lo`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    from_lo: Vec<f64>,
    to_hi: Vec<f64>,
    n_panels: usize,
    grading: f64,
}

pub(crate) fn side_exponent(e: f64, grading: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        grading * (1.0 / (1.0 - e)).max(1.0)
    }
}

impl QuadratureRule {
    pub fn new(lo: f64, hi: f64, left_exp: f64, right_exp: f64, cfg: &QuadConfig) -> Result<Self> {
        cfg.validate()?;
        if !(lo < hi) {
            return Err(Error::Argument(format!("quadrature interval [{lo}, {hi}] is empty")));
        }
        for (name, e) in [("left", left_exp), ("right", right_exp)] {
            if !(e < 1.0) {
                return Err(Error::NonIntegrable(format!("{name} endpoint exponent {e} must be < 1")));
            }
        }
        Ok(Self::unit(left_exp, right_exp, cfg).scaled(lo, hi))
    }

    /// Reference rule on `[0, 1]`; callers scale it onto many cells.
    pub(crate) fn unit(left_exp: f64, right_exp: f64, cfg: &QuadConfig) -> Self {
        let (gx, gw) = gauss_legendre(cfg.points_per_panel);
        let left_panels = cfg.n_panels.div_ceil(2);
        let right_panels = cfg.n_panels / 2;
        let half = 0.5;
        let cap = cfg.n_panels * cfg.points_per_panel;
        let mut rule = Self {
            lo: 0.0,
            hi: 1.0,
            nodes: Vec::with_capacity(cap),
            weights: Vec::with_capacity(cap),
            from_lo: Vec::with_capacity(cap),
            to_hi: Vec::with_capacity(cap),
            n_panels: cfg.n_panels,
            grading: cfg.grading,
        };
        let ql = side_exponent(left_exp, cfg.grading);
        for p in 0..left_panels {
            let (v0, v1) = (p as f64 / left_panels as f64, (p + 1) as f64 / left_panels as f64);
            for (x, w) in gx.iter().zip(&gw) {
                let v = v0 + 0.5 * (x + 1.0) * (v1 - v0);
                let d = half * v.powf(ql);
                rule.nodes.push(d);
                rule.from_lo.push(d);
                rule.to_hi.push(1.0 - d);
                rule.weights.push(0.5 * w * (v1 - v0) * half * ql * v.powf(ql - 1.0));
            }
        }
        let qr = side_exponent(right_exp, cfg.grading);
        let mut right = Vec::with_capacity(right_panels * gx.len());
        for p in 0..right_panels {
            let (v0, v1) = (p as f64 / right_panels as f64, (p + 1) as f64 / right_panels as f64);
            for (x, w) in gx.iter().zip(&gw) {
                let v = v0 + 0.5 * (x + 1.0) * (v1 - v0);
                let d = half * v.powf(qr);
                right.push((d, 0.5 * w * (v1 - v0) * half * qr * v.powf(qr - 1.0)));
            }
        }
        // right half is generated from hi inward; store in increasing u
        for &(d, w) in right.iter().rev() {
            rule.nodes.push(1.0 - d);
            rule.from_lo.push(1.0 - d);
            rule.to_hi.push(d);
            rule.weights.push(w);
        }
        rule
    }

    /// Affine copy of this rule onto `[lo, hi]`.
    pub(crate) fn scaled(&self, lo: f64, hi: f64) -> Self {
        let ratio = (hi - lo) / (self.hi - self.lo);
        let from_lo: Vec<f64> = self.from_lo.iter().map(|d| d * ratio).collect();
        let to_hi: Vec<f64> = self.to_hi.iter().map(|d| d * ratio).collect();
        let nodes = from_lo.iter().zip(&to_hi).map(|(&dl, &dh)| if dl <= dh { lo + dl } else { hi - dh }).collect();
        Self {
            lo,
            hi,
            nodes,
            weights: self.weights.iter().map(|w| w * ratio).collect(),
            from_lo,
            to_hi,
            n_panels: self.n_panels,
            grading: self.grading,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn n_panels(&self) -> usize {
        self.n_panels
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn from_lo(&self) -> &[f64] {
        &self.from_lo
    }

    pub fn to_hi(&self) -> &[f64] {
        &self.to_hi
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ wᵢ f(uᵢ). Contributions are summed left to right.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * f(u)).sum()
    }

    /// Σ wᵢ f(node i), where the closure receives `(u, u - lo, hi - u)`.
    pub fn integrate_with_distances(&self, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.nodes.len() {
            acc += self.weights[i] * f(self.nodes[i], self.from_lo[i], self.to_hi[i]);
        }
        acc
    }

    /// ∫ (hi - u)^(-gamma) (u - lo)^(-mu) h(u) du.
    pub fn integrate_weighted(&self, gamma: f64, mu: f64, h: impl Fn(f64) -> f64) -> f64 {
        self.integrate_with_distances(|u, dl, dh| weight_factor(dh, gamma) * weight_factor(dl, mu) * h(u))
    }
}

#[inline]
pub(crate) fn weight_factor(dist: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        1.0
    } else {
        dist.powf(-exp)
    }
}
