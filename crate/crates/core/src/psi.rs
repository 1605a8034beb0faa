//! The increasing chart ψ that sets the geometry of every fractional operator.
//!
//! A chart is a strictly increasing C¹ function on `[a, b]`. It is validated
//! once at construction and immutable afterwards, so a `&PsiChart` can be
//! shared freely across worker threads.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;

/// Number of interior midpoints used to validate a chart.
pub const VALIDATION_POINTS: usize = 1000;
/// Smallest derivative accepted on the validation grid.
pub const MIN_DERIVATIVE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum PsiKind {
    Identity,
    /// `c0 + c1·t` with `c1 > 0`.
    Affine {
        c0: f64,
        c1: f64,
    },
    /// `ln t`, requires `a > 0`.
    Log,
    /// `t^rho`, requires `a >= 0`.
    Power {
        rho: f64,
    },
    /// Sampled chart, interpolated with a monotone cubic.
    Table(MonotoneCubic),
}

#[derive(Debug, Clone)]
pub struct PsiChart {
    kind: PsiKind,
    a: f64,
    b: f64,
}

impl PsiChart {
    pub fn new(kind: PsiKind, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Argument(format!("chart interval [{a}, {b}] must satisfy a < b")));
        }
        match &kind {
            PsiKind::Identity => {}
            PsiKind::Affine { c0, c1 } => {
                if !(c0.is_finite() && c1.is_finite() && *c1 > 0.0) {
                    return Err(Error::Argument(format!("affine chart needs c1 > 0, got c1 = {c1}")));
                }
            }
            PsiKind::Log => {
                if a <= 0.0 {
                    return Err(Error::Argument(format!("log chart needs a > 0, got a = {a}")));
                }
            }
            PsiKind::Power { rho } => {
                if !(rho.is_finite() && *rho > 0.0) {
                    return Err(Error::Argument(format!("power chart needs rho > 0, got {rho}")));
                }
                if a < 0.0 {
                    return Err(Error::Argument(format!("power chart needs a >= 0, got a = {a}")));
                }
            }
            PsiKind::Table(table) => {
                let xs = table.x();
                let (lo, hi) = (xs[0], xs[xs.len() - 1]);
                if a < lo || b > hi {
                    return Err(Error::Table(format!(
                        "interval [{a}, {b}] is not covered by the table range [{lo}, {hi}]"
                    )));
                }
            }
        }
        let chart = Self { kind, a, b };
        chart.validate()?;
        Ok(chart)
    }

    pub fn identity(a: f64, b: f64) -> Result<Self> {
        Self::new(PsiKind::Identity, a, b)
    }

    pub fn log(a: f64, b: f64) -> Result<Self> {
        Self::new(PsiKind::Log, a, b)
    }

    pub fn power(rho: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(PsiKind::Power { rho }, a, b)
    }

    pub fn affine(c0: f64, c1: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(PsiKind::Affine { c0, c1 }, a, b)
    }

    /// Builds a chart from `(t, psi)` samples; both columns strictly increasing.
    pub fn table(t: Vec<f64>, psi: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        if t.len() < 2 || t.len() != psi.len() {
            return Err(Error::Table(format!(
                "need at least two rows of equal length, got {} and {}",
                t.len(),
                psi.len()
            )));
        }
        for (k, (wt, wp)) in t.windows(2).zip(psi.windows(2)).enumerate() {
            if !(wt[1] > wt[0]) || !(wp[1] > wp[0]) {
                return Err(Error::Table(format!("columns not strictly increasing at row {}", k + 1)));
            }
        }
        Self::new(PsiKind::Table(MonotoneCubic::new(t, psi)), a, b)
    }

    /// Reads a two-column `t,psi` CSV (header optional) and builds a table chart.
    /// When `domain` is `None` the chart spans the whole table.
    pub fn from_table_csv(path: impl AsRef<Path>, domain: Option<(f64, f64)>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        let (mut ts, mut ps) = (Vec::new(), Vec::new());
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
            if record.len() != 2 {
                return Err(Error::Table(format!("row {}: expected 2 columns, got {}", row + 1, record.len())));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(t), Ok(p)) => {
                    ts.push(t);
                    ps.push(p);
                }
                // a non-numeric first row is a header
                _ if row == 0 => continue,
                _ => return Err(Error::Table(format!("row {}: non-numeric entry", row + 1))),
            }
        }
        if ts.is_empty() {
            return Err(Error::Table(format!("{}: no data rows", path.display())));
        }
        let (a, b) = domain.unwrap_or((ts[0], ts[ts.len() - 1]));
        Self::table(ts, ps, a, b)
    }

    /// Parses the config form `identity | affine:c0,c1 | log | power:rho | table:<path>`.
    pub fn parse(spec: &str, a: f64, b: f64) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = match spec.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r.trim())),
            None => (spec, None),
        };
        let nums = |args: Option<&str>, count: usize| -> Result<Vec<f64>> {
            let args = args.ok_or_else(|| Error::Argument(format!("psi '{spec}' needs {count} argument(s)")))?;
            let vals = args
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Argument(format!("psi '{spec}': {e}")))?;
            if vals.len() != count {
                return Err(Error::Argument(format!("psi '{spec}' needs {count} argument(s)")));
            }
            Ok(vals)
        };
        match name {
            "identity" if args.is_none() => Self::identity(a, b),
            "log" if args.is_none() => Self::log(a, b),
            "affine" => {
                let v = nums(args, 2)?;
                Self::affine(v[0], v[1], a, b)
            }
            "power" => {
                let v = nums(args, 1)?;
                Self::power(v[0], a, b)
            }
            "table" => {
                let path = args.ok_or_else(|| Error::Argument("psi 'table:' needs a path".into()))?;
                Self::from_table_csv(path, Some((a, b)))
            }
            _ => Err(Error::Argument(format!("unknown psi chart '{spec}'"))),
        }
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Short label used in reports and CSV output.
    pub fn label(&self) -> String {
        match &self.kind {
            PsiKind::Identity => "identity".into(),
            PsiKind::Affine { c0, c1 } => format!("affine:{c0},{c1}"),
            PsiKind::Log => "log".into(),
            PsiKind::Power { rho } => format!("power:{rho}"),
            PsiKind::Table(_) => "table".into(),
        }
    }

    /// ψ(a).
    pub fn lo(&self) -> f64 {
        self.raw_value(self.a)
    }

    /// ψ(b).
    pub fn hi(&self) -> f64 {
        self.raw_value(self.b)
    }

    /// ψ(b) − ψ(a).
    pub fn range(&self) -> f64 {
        self.hi() - self.lo()
    }

    fn slack(&self) -> f64 {
        1e-12 * self.a.abs().max(self.b.abs()).max(self.b - self.a)
    }

    fn check_t(&self, t: f64) -> Result<f64> {
        let eps = self.slack();
        if !(t >= self.a - eps && t <= self.b + eps) {
            return Err(Error::Domain(format!("t = {t} outside [{}, {}]", self.a, self.b)));
        }
        Ok(t.clamp(self.a, self.b))
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.raw_value(self.check_t(t)?))
    }

    pub fn deriv(&self, t: f64) -> Result<f64> {
        Ok(self.raw_deriv(self.check_t(t)?))
    }

    pub fn inverse(&self, s: f64) -> Result<f64> {
        let (lo, hi) = (self.lo(), self.hi());
        let eps = 1e-12 * lo.abs().max(hi.abs()).max(hi - lo);
        if !(s >= lo - eps && s <= hi + eps) {
            return Err(Error::Domain(format!("s = {s} outside [psi(a), psi(b)] = [{lo}, {hi}]")));
        }
        Ok(self.raw_inverse(s.clamp(lo, hi)))
    }

    /// Exponent `e` with `ψ⁻¹(u) − a ∝ (u − ψ(a))^e` when that power is not an
    /// integer, so quadrature in `u` must grade toward `ψ(a)` even for smooth `x`.
    pub(crate) fn inverse_power_at_lo(&self) -> Option<f64> {
        match self.kind {
            PsiKind::Power { rho } if self.a == 0.0 && (1.0 / rho).fract() != 0.0 => Some(1.0 / rho),
            _ => None,
        }
    }

    /// Left exponent handed to a rule on `[ψ(a), ·]`: the weight exponent `mu`
    /// when present, else a bounded-factor exponent that only switches on grading.
    pub(crate) fn lo_grading(&self, mu: f64) -> f64 {
        if mu != 0.0 {
            mu
        } else {
            self.inverse_power_at_lo().map_or(0.0, |e| -e)
        }
    }

    /// ψ without domain checks, for hot loops over nodes already known to lie in range.
    pub(crate) fn raw_value(&self, t: f64) -> f64 {
        match &self.kind {
            PsiKind::Identity => t,
            PsiKind::Affine { c0, c1 } => c0 + c1 * t,
            PsiKind::Log => t.ln(),
            PsiKind::Power { rho } => t.powf(*rho),
            PsiKind::Table(m) => m.eval(t),
        }
    }

    pub(crate) fn raw_deriv(&self, t: f64) -> f64 {
        match &self.kind {
            PsiKind::Identity => 1.0,
            PsiKind::Affine { c1, .. } => *c1,
            PsiKind::Log => 1.0 / t,
            PsiKind::Power { rho } => rho * t.powf(rho - 1.0),
            PsiKind::Table(m) => m.deriv(t),
        }
    }

    /// ψ⁻¹ clamped into `[a, b]`; `s` is assumed to lie in `[ψ(a), ψ(b)]`.
    pub(crate) fn raw_inverse(&self, s: f64) -> f64 {
        let t = match &self.kind {
            PsiKind::Identity => s,
            PsiKind::Affine { c0, c1 } => (s - c0) / c1,
            PsiKind::Log => s.exp(),
            PsiKind::Power { rho } => s.max(0.0).powf(1.0 / rho),
            PsiKind::Table(m) => return bisect_inverse(m, s, self.a, self.b),
        };
        t.clamp(self.a, self.b)
    }

    /// ψ⁻¹ pushed at least one ulp inside `(a, b)`, for evaluating integrands
    /// that are singular at the endpoints.
    pub(crate) fn interior_inverse(&self, s: f64) -> f64 {
        self.raw_inverse(s).clamp(self.a.next_up(), self.b.next_down())
    }

    fn validate(&self) -> Result<()> {
        let n = VALIDATION_POINTS;
        let width = self.b - self.a;
        let scale = self.a.abs().max(self.b.abs()).max(width);
        let mut prev = self.raw_value(self.a);
        if !prev.is_finite() {
            return Err(Error::Argument(format!("psi(a) is not finite for chart {}", self.label())));
        }
        for i in 0..=n {
            // interior midpoints, then b itself on the last pass
            let t = if i == n { self.b } else { self.a + (i as f64 + 0.5) * width / n as f64 };
            let v = self.raw_value(t);
            if !(v > prev) || !v.is_finite() {
                return Err(Error::Argument(format!("chart {} is not strictly increasing near t = {t}", self.label())));
            }
            prev = v;
            if i == n {
                break;
            }
            let d = self.raw_deriv(t);
            if !(d > MIN_DERIVATIVE) {
                return Err(Error::Argument(format!("chart {} has psi'({t}) = {d} <= {MIN_DERIVATIVE}", self.label())));
            }
            let back = self.raw_inverse(v);
            if (back - t).abs() > 1e-12 * scale {
                return Err(Error::Argument(format!(
                    "chart {} fails inverse round trip at t = {t} (got {back})",
                    self.label()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PsiChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on [{}, {}]", self.label(), self.a, self.b)
    }
}

// Bisection to machine resolution; the table is strictly increasing.
fn bisect_inverse(m: &MonotoneCubic, s: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    if m.eval(lo) >= s {
        return lo;
    }
    if m.eval(hi) <= s {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m.eval(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
