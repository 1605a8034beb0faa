use std::path::Path;

use clap::Args;
use serde::Deserialize;

use fracbvp::solver::ScanGrid;
use fracbvp::{BoundaryFunctional, Error, Expr, PhiSpec, ProblemSpec, PsiChart, QuadConfig};

/// Appended to every subcommand's `--help`.
pub const CONFIG_KEYS: &str = "\
Config file keys (TOML; unknown keys are rejected, flags override the file):
  [problem]
    a, b          domain endpoints (default 0, 1)
    alpha, beta   orders in (0, 1] with alpha + beta > 1 (default 1, 1)
    psi           identity | affine:c0,c1 | log | power:rho | table:<path> (default identity)
    f             source f(t, x) as an expression (default 0)
    boundary      zero | point:c,eta | mean:c (default zero)
    gamma, mu     singular exponents of f at b and a (optional)
  [solver]
    n_nodes       grid size (default 512)
    tol           Picard tolerance (default 1e-9)
    max_iter      Picard iteration cap (default 200)
  [quad]
    n_panels          panels per integral (default 256)
    points_per_panel  Gauss points per panel (default 8)
    grading           base grading exponent (default 3)
  [analysis]
    kappa1        growth weight in t for the existence certificate
    kappa2        Lipschitz weight in t (reported as its weighted norm)
    kappa3        Lipschitz weight in t for the contraction certificate
    kappa4_const  Lipschitz constant of the boundary term (default: from boundary)
    Psi           nondecreasing growth function of x for the existence certificate
    kappa         boundary constant in [0, 1) (default: from boundary)
    q             eigen/Lyapunov weight q(t) (default 1)
    phi           linear:c0,c1 | power:c0,p | expression in x (default linear:0,1)
    norm          solution norm for the Lyapunov threshold (default 1)
    oracle_n      grid size of the kernel-maximum oracle (default 2001)
    eig_n         Nystrom grid size (default: solver.n_nodes)
    power_tol     power-iteration tolerance (default 1e-12)
    scan_lo, scan_hi, scan_points   existence scan grid (default 1e-6, 1e6, 481)
    sweep_orders  orders swept by `sweep` (default [0.6, 0.75, 0.9, 1.0])
    [[analysis.sweep_charts]]  psi, a, b (default identity on [0,1] and log on [1,e])";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub solver: SolverSection,
    pub quad: QuadSection,
    pub analysis: AnalysisSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub psi: String,
    pub f: String,
    pub boundary: String,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            a: 0.0,
            b: 1.0,
            alpha: 1.0,
            beta: 1.0,
            psi: "identity".into(),
            f: "0".into(),
            boundary: "zero".into(),
            gamma: None,
            mu: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub n_nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { n_nodes: 512, tol: 1e-9, max_iter: 200 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSection {
    pub n_panels: usize,
    pub points_per_panel: usize,
    pub grading: f64,
}

impl Default for QuadSection {
    fn default() -> Self {
        let d = QuadConfig::default();
        Self { n_panels: d.n_panels, points_per_panel: d.points_per_panel, grading: d.grading }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartEntry {
    pub psi: String,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub kappa1: Option<String>,
    pub kappa2: Option<String>,
    pub kappa3: Option<String>,
    pub kappa4_const: Option<f64>,
    #[serde(rename = "Psi")]
    pub psi_fn: Option<String>,
    pub kappa: Option<f64>,
    pub q: Option<String>,
    pub phi: String,
    pub norm: f64,
    pub oracle_n: usize,
    pub eig_n: Option<usize>,
    pub power_tol: f64,
    pub scan_lo: f64,
    pub scan_hi: f64,
    pub scan_points: usize,
    pub sweep_orders: Vec<f64>,
    pub sweep_charts: Vec<ChartEntry>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let scan = ScanGrid::default();
        Self {
            kappa1: None,
            kappa2: None,
            kappa3: None,
            kappa4_const: None,
            psi_fn: None,
            kappa: None,
            q: None,
            phi: "linear:0,1".into(),
            norm: 1.0,
            oracle_n: 2001,
            eig_n: None,
            power_tol: 1e-12,
            scan_lo: scan.lo,
            scan_hi: scan.hi,
            scan_points: scan.points,
            sweep_orders: vec![0.6, 0.75, 0.9, 1.0],
            sweep_charts: vec![
                ChartEntry { psi: "identity".into(), a: 0.0, b: 1.0 },
                ChartEntry { psi: "log".into(), a: 1.0, b: std::f64::consts::E },
            ],
        }
    }
}

/// Flags shared by every subcommand. Each value replaces the config entry of the same name.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub a: Option<f64>,
    #[arg(long, global = true)]
    pub b: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub psi: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub f: Option<String>,
    #[arg(long, global = true)]
    pub boundary: Option<String>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub n_nodes: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub n_panels: Option<usize>,
    #[arg(long, global = true)]
    pub points_per_panel: Option<usize>,
    #[arg(long, global = true)]
    pub grading: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappa1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappa3: Option<String>,
    #[arg(long, global = true)]
    pub kappa4_const: Option<f64>,
    #[arg(long = "Psi", global = true, allow_hyphen_values = true)]
    pub psi_fn: Option<String>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long, global = true)]
    pub norm: Option<f64>,
    #[arg(long, global = true)]
    pub oracle_n: Option<usize>,
    #[arg(long, global = true)]
    pub eig_n: Option<usize>,
}

/// A config or usage problem, reported with exit code 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.message().to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        fn set_opt<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        let p = &mut self.problem;
        set(&mut p.a, &o.a);
        set(&mut p.b, &o.b);
        set(&mut p.alpha, &o.alpha);
        set(&mut p.beta, &o.beta);
        set(&mut p.psi, &o.psi);
        set(&mut p.f, &o.f);
        set(&mut p.boundary, &o.boundary);
        set_opt(&mut p.gamma, &o.gamma);
        set_opt(&mut p.mu, &o.mu);
        let s = &mut self.solver;
        set(&mut s.n_nodes, &o.n_nodes);
        set(&mut s.tol, &o.tol);
        set(&mut s.max_iter, &o.max_iter);
        let q = &mut self.quad;
        set(&mut q.n_panels, &o.n_panels);
        set(&mut q.points_per_panel, &o.points_per_panel);
        set(&mut q.grading, &o.grading);
        let an = &mut self.analysis;
        set_opt(&mut an.kappa1, &o.kappa1);
        set_opt(&mut an.kappa3, &o.kappa3);
        set_opt(&mut an.kappa4_const, &o.kappa4_const);
        set_opt(&mut an.psi_fn, &o.psi_fn);
        set_opt(&mut an.kappa, &o.kappa);
        set_opt(&mut an.q, &o.q);
        set(&mut an.phi, &o.phi);
        set(&mut an.norm, &o.norm);
        set(&mut an.oracle_n, &o.oracle_n);
        set_opt(&mut an.eig_n, &o.eig_n);
    }

    pub fn chart(&self) -> Result<PsiChart, Error> {
        PsiChart::parse(&self.problem.psi, self.problem.a, self.problem.b)
    }

    pub fn boundary(&self) -> Result<BoundaryFunctional, Error> {
        BoundaryFunctional::parse(&self.problem.boundary)
    }

    pub fn problem(&self) -> Result<ProblemSpec, Error> {
        let f = Expr::parse(&self.problem.f)?;
        let spec = ProblemSpec::new(self.problem.alpha, self.problem.beta, self.chart()?, f, self.boundary()?)?;
        match (self.problem.gamma, self.problem.mu) {
            (None, None) => Ok(spec),
            (g, m) => spec.with_singular_exponents(g.unwrap_or(0.0), m.unwrap_or(0.0)),
        }
    }

    pub fn quad(&self) -> Result<QuadConfig, Error> {
        let cfg = QuadConfig {
            n_panels: self.quad.n_panels,
            points_per_panel: self.quad.points_per_panel,
            grading: self.quad.grading,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Boundary constant: `analysis.kappa`, or the boundary term's own Lipschitz constant.
    pub fn kappa(&self) -> Result<f64, Error> {
        match self.analysis.kappa {
            Some(k) => Ok(k),
            None => Ok(self.boundary()?.lipschitz()),
        }
    }

    pub fn kappa4(&self) -> Result<f64, Error> {
        match self.analysis.kappa4_const {
            Some(k) => Ok(k),
            None => Ok(self.boundary()?.lipschitz()),
        }
    }

    pub fn q(&self) -> Result<Option<Expr>, Error> {
        self.analysis.q.as_deref().map(Expr::parse).transpose().map_err(Error::from)
    }

    pub fn phi(&self) -> Result<PhiSpec, Error> {
        PhiSpec::parse(&self.analysis.phi)
    }

    pub fn eig_n(&self) -> usize {
        self.analysis.eig_n.unwrap_or(self.solver.n_nodes)
    }

    pub fn scan(&self) -> ScanGrid {
        ScanGrid { lo: self.analysis.scan_lo, hi: self.analysis.scan_hi, points: self.analysis.scan_points }
    }

    pub fn sweep_charts(&self) -> Result<Vec<PsiChart>, Error> {
        self.analysis.sweep_charts.iter().map(|c| PsiChart::parse(&c.psi, c.a, c.b)).collect()
    }

    /// An analysis expression that a subcommand cannot run without.
    pub fn required_expr(&self, key: &str, value: &Option<String>) -> Result<Expr, crate::Failure> {
        let src = value
            .as_deref()
            .ok_or_else(|| crate::Failure::Config(ConfigError(format!("analysis.{key} is required"))))?;
        Expr::parse(src).map_err(|e| crate::Failure::Config(ConfigError(format!("analysis.{key}: {e}"))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_file() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.solver.n_nodes, 512);
        assert_eq!(cfg.solver.tol, 1e-9);
        assert_eq!(cfg.solver.max_iter, 200);
        assert_eq!(cfg.quad.n_panels, 256);
        assert_eq!(cfg.analysis.sweep_charts.len(), 2);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("[problem]\nalpah = 0.9\n").is_err());
        assert!(RunConfig::parse("[solvr]\nn_nodes = 3\n").is_err());
        assert!(RunConfig::parse("[[analysis.sweep_charts]]\npsi = \"log\"\na = 1.0\nb = 2.0\nc = 1\n").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let mut cfg = RunConfig::parse("[problem]\nalpha = 0.8\nf = \"1\"\n[analysis]\nkappa = 0.2\n").unwrap();
        cfg.apply(&Overrides { alpha: Some(0.9), kappa: Some(0.1), ..Default::default() });
        assert_eq!(cfg.problem.alpha, 0.9);
        assert_eq!(cfg.problem.f, "1");
        assert_eq!(cfg.analysis.kappa, Some(0.1));
    }

    #[test]
    fn psi_and_chart_keys_are_distinct() {
        let cfg =
            RunConfig::parse("[problem]\npsi = \"log\"\na = 1.0\nb = 2.0\n[analysis]\nPsi = \"sqrt(x)\"\n").unwrap();
        assert_eq!(cfg.chart().unwrap().label(), "log");
        assert_eq!(cfg.analysis.psi_fn.as_deref(), Some("sqrt(x)"));
    }

    #[test]
    fn kappa_defaults_to_boundary_constant() {
        let cfg = RunConfig::parse("[problem]\nboundary = \"mean:-0.3\"\n").unwrap();
        assert_eq!(cfg.kappa().unwrap(), 0.3);
        assert_eq!(cfg.kappa4().unwrap(), 0.3);
    }

    #[test]
    fn every_key_is_documented() {
        for key in [
            "a, b",
            "alpha, beta",
            "psi",
            "f ",
            "boundary",
            "gamma, mu",
            "n_nodes",
            "tol",
            "max_iter",
            "n_panels",
            "points_per_panel",
            "grading",
            "kappa1",
            "kappa2",
            "kappa3",
            "kappa4_const",
            "Psi",
            "kappa ",
            "q ",
            "phi",
            "norm",
            "oracle_n",
            "eig_n",
            "power_tol",
            "scan_lo",
            "sweep_orders",
            "sweep_charts",
        ] {
            assert!(CONFIG_KEYS.contains(key), "{key}");
        }
    }
}
