use std::fs::File;
use std::io::{self, BufWriter, Write};

use fracbvp::quad::{beta_closed_form, integrate_singular};
use fracbvp::solver::{
    contraction_certificate, existence_bound_search, ode_residual, uniqueness_claim, weight_norm, Discretization,
};
use fracbvp::spectral::{eigen_bound_report, eigen_sweep, lyapunov_report, write_sweep_csv};
use fracbvp::{Error, Expr, PsiChart};

use crate::{Context, Failure};

const QUADCHECK_EXPONENTS: [f64; 4] = [0.0, 0.3, 0.5, 0.7];

fn io_err(e: io::Error) -> Failure {
    Failure::Lib(Error::Io(e))
}

fn csv_sink(ctx: &Context) -> Result<Box<dyn Write>, Failure> {
    Ok(match &ctx.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(io_err)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `key = value` lines with the keys padded to a common width.
struct Report(Vec<(String, String)>);

impl Report {
    fn new() -> Self {
        Report(Vec::new())
    }

    fn add(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    fn write(&self, w: &mut dyn Write) -> io::Result<()> {
        let width = self.0.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.0 {
            writeln!(w, "{k:<width$} = {v}")?;
        }
        Ok(())
    }

    fn print(&self) -> Result<(), Failure> {
        self.write(&mut io::stdout().lock()).map_err(io_err)
    }

    /// Same fields as a one-row CSV.
    fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        let keys: Vec<&str> = self.0.iter().map(|(k, _)| k.as_str()).collect();
        let vals: Vec<&str> = self.0.iter().map(|(_, v)| v.as_str()).collect();
        writeln!(w, "{}", keys.join(","))?;
        writeln!(w, "{}", vals.join(","))
    }

    fn finish(&self, ctx: &Context) -> Result<(), Failure> {
        self.print()?;
        if ctx.out.is_some() {
            let mut w = csv_sink(ctx)?;
            self.write_csv(&mut w).and_then(|_| w.flush()).map_err(io_err)?;
        }
        Ok(())
    }
}

fn check_boundary_constant(ctx: &Context) -> Result<(), Failure> {
    let k = ctx.cfg.boundary()?.lipschitz();
    if !(k < 1.0) {
        return Err(Error::Assumption(format!("boundary Lipschitz constant must be < 1, got {k}")).into());
    }
    Ok(())
}

pub fn solve(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.cfg;
    let spec = cfg.problem()?;
    let disc = Discretization::new(&spec, cfg.solver.n_nodes)?;
    let sol = disc.picard(cfg.solver.tol, cfg.solver.max_iter, None)?;

    let mut w = csv_sink(ctx)?;
    (|| -> io::Result<()> {
        writeln!(w, "t,x")?;
        for (t, x) in sol.nodes.iter().zip(&sol.values) {
            writeln!(w, "{t},{x}")?;
        }
        w.flush()
    })()
    .map_err(io_err)?;
    drop(w);

    let mut r = Report::new();
    r.add("n_nodes", sol.nodes.len())
        .add("iterations", sol.iterations)
        .add("converged", sol.converged)
        .add("final_update", sol.final_update)
        .add("integral_residual", sol.integral_residual);
    let last = sol.values.len() - 1;
    r.add("boundary_gap", (sol.values[last] - disc.boundary_value(&sol.values)).abs());
    let ode = match ode_residual(&spec, &sol) {
        Ok(Some(v)) => v.to_string(),
        Ok(None) => "n/a (singular source)".into(),
        Err(e) => format!("n/a ({e})"),
    };
    r.add("ode_residual", ode);
    let unique = match &cfg.analysis.kappa3 {
        Some(src) => {
            let cert =
                contraction_certificate(&spec, &Expr::parse(src).map_err(Error::from)?, cfg.kappa4()?, &cfg.quad()?)?;
            r.add("contraction_L", cert.lipschitz);
            uniqueness_claim(&cert, &sol)
        }
        None => false,
    };
    r.add("uniqueness_certified", unique);

    // keep stdout pure CSV when no output file is given
    let summary = if ctx.out.is_some() { r.print() } else { r.write(&mut io::stderr().lock()).map_err(io_err) };
    summary?;
    if !sol.converged {
        return Err(Failure::NotConverged(format!(
            "Picard iteration stopped after {} iterations with update {}",
            sol.iterations, sol.final_update
        )));
    }
    Ok(())
}

pub fn greenmax(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.cfg;
    let kernel = cfg.problem()?.kernel()?;
    let rep = kernel.green_max(cfg.analysis.oracle_n)?;
    let mut r = Report::new();
    r.add("alpha", kernel.alpha())
        .add("beta", kernel.beta())
        .add("psi", kernel.chart().label())
        .add("step1_value", rep.step1_value)
        .add("step2_boundary_value", rep.step2_boundary_value)
        .add("tau0", rep.tau0)
        .add("t0", rep.t0)
        .add("gmax", rep.gmax)
        .add("paper_formula_value", rep.paper_formula_value)
        .add("grid_oracle_value", rep.grid_oracle_value)
        .add("oracle_n", rep.oracle_n)
        .add("discrepancy_flag", rep.discrepancy_flag);
    r.finish(ctx)
}

pub fn lyapunov(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.cfg;
    check_boundary_constant(ctx)?;
    let spec = cfg.problem()?;
    let q = cfg.q()?.unwrap_or_else(|| Expr::constant(1.0));
    let rep = lyapunov_report(&spec, &q, &cfg.phi()?, cfg.analysis.norm, cfg.kappa()?, &cfg.quad()?)?;
    let mut r = Report::new();
    r.add("chart_kind", &rep.chart_kind)
        .add("integral_value", rep.integral_value)
        .add("threshold", rep.threshold)
        .add("gmax", rep.gmax)
        .add("kappa", rep.kappa)
        .add("norm", rep.norm)
        .add("satisfied", rep.satisfied);
    r.finish(ctx)
}

pub fn eig(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.cfg;
    let spec = cfg.problem()?;
    let rep =
        eigen_bound_report(&spec, cfg.q()?.as_ref(), cfg.kappa()?, cfg.eig_n(), cfg.analysis.power_tol, ctx.seed)?;
    let mut r = Report::new();
    r.add("n", cfg.eig_n())
        .add("seed", ctx.seed)
        .add("spectral_radius_K", rep.spectral_radius_k)
        .add("min_abs_lambda_estimate", rep.min_abs_lambda_estimate)
        .add("lower_bound", rep.lower_bound)
        .add("gmax", rep.gmax)
        .add("kappa", rep.kappa)
        .add("q_negative", rep.q_negative)
        .add("satisfied", rep.satisfied);
    r.finish(ctx)
}

pub fn certify(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.cfg;
    check_boundary_constant(ctx)?;
    let an = &cfg.analysis;
    let kappa3 = cfg.required_expr("kappa3", &an.kappa3)?;
    let kappa1 = cfg.required_expr("kappa1", &an.kappa1)?;
    let psi = cfg.required_expr("Psi", &an.psi_fn)?;
    let spec = cfg.problem()?;
    let quad = cfg.quad()?;

    let c = contraction_certificate(&spec, &kappa3, cfg.kappa4()?, &quad)?;
    let e = existence_bound_search(&spec, &kappa1, &psi, cfg.kappa()?, &cfg.scan(), &quad)?;

    let mut out = io::stdout().lock();
    (|| -> Result<(), Failure> {
        writeln!(out, "[contraction]").map_err(io_err)?;
        let mut r = Report::new();
        r.add("kappa4", c.kappa4)
            .add("weight_norm", c.weight_norm)
            .add("gmax", c.gmax)
            .add("L", c.lipschitz)
            .add("satisfied", c.satisfied);
        r.write(&mut out).map_err(io_err)?;
        writeln!(out, "[existence]").map_err(io_err)?;
        let mut r = Report::new();
        r.add("kappa", e.kappa)
            .add("Psi", &e.psi)
            .add("weight_norm", e.weight_norm)
            .add("gmax", e.gmax)
            .add("M_found", e.m_found.map_or("none".to_string(), |m| m.to_string()))
            .add("satisfied", e.satisfied);
        if let Some(src) = &an.kappa2 {
            r.add("kappa2_weight_norm", weight_norm(&spec, &Expr::parse(src).map_err(Error::from)?, &quad)?);
        }
        r.write(&mut out).map_err(io_err)
    })()
}

pub fn quadcheck(ctx: &Context) -> Result<(), Failure> {
    let quad = ctx.cfg.quad()?;
    let charts =
        [PsiChart::identity(0.0, 1.0)?, PsiChart::log(1.0, std::f64::consts::E)?, PsiChart::power(2.0, 0.0, 1.0)?];
    let mut rows = Vec::new();
    for chart in &charts {
        for &gamma in &QUADCHECK_EXPONENTS {
            for &mu in &QUADCHECK_EXPONENTS {
                let numeric = integrate_singular(chart, gamma, mu, |_| 1.0, &quad)?;
                let exact = beta_closed_form(chart, gamma, mu)?;
                rows.push((chart.label(), gamma, mu, numeric, exact, (numeric - exact).abs() / exact.abs()));
            }
        }
    }
    let mut out = io::stdout().lock();
    (|| -> io::Result<()> {
        writeln!(out, "n_panels = {}", quad.n_panels)?;
        writeln!(
            out,
            "{:<10} {:>5} {:>5} {:>22} {:>22} {:>10}",
            "psi", "gamma", "mu", "numeric", "closed_form", "residual"
        )?;
        for (psi, g, m, num, exact, res) in &rows {
            writeln!(out, "{psi:<10} {g:>5} {m:>5} {num:>22.16e} {exact:>22.16e} {res:>10.3e}")?;
        }
        let worst = rows.iter().map(|r| r.5).fold(0.0, f64::max);
        writeln!(out, "max_residual = {worst:.3e}")
    })()
    .map_err(io_err)?;
    if ctx.out.is_some() {
        let mut w = csv_sink(ctx)?;
        (|| -> io::Result<()> {
            writeln!(w, "psi,gamma,mu,numeric,closed_form,residual")?;
            for (psi, g, m, num, exact, res) in &rows {
                writeln!(w, "{psi},{g},{m},{num},{exact},{res}")?;
            }
            w.flush()
        })()
        .map_err(io_err)?;
    }
    Ok(())
}

pub fn sweep(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.cfg;
    let an = &cfg.analysis;
    let rows = eigen_sweep(
        &an.sweep_orders,
        &cfg.sweep_charts()?,
        an.kappa.unwrap_or(0.0),
        cfg.eig_n(),
        an.power_tol,
        ctx.seed,
    )?;
    let mut w = csv_sink(ctx)?;
    write_sweep_csv(&rows, &mut w)?;
    w.flush().map_err(io_err)
}
