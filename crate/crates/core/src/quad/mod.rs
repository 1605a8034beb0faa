//! Quadrature for `∫ₐᵇ ψ′(τ)·w(τ)·h(τ) dτ` with algebraic endpoint weights
//! `w = (ψ(b) − ψ(τ))^(−γ) (ψ(τ) − ψ(a))^(−μ)`, together with the Gamma and
//! Beta functions these integrals reduce to.
//!
//! Every integral is taken in `u = ψ(τ)`, which removes the Jacobian ψ′
//! exactly; `ψ⁻¹` is applied to a node only when the integrand needs `τ`.

mod gauss;
mod rule;
mod special;

pub use gauss::gauss_legendre;
pub(crate) use rule::weight_factor;
pub use rule::{QuadConfig, QuadratureRule};
pub use special::{beta_fn, gamma_fn, ln_gamma};

use crate::error::{Error, Result};
use crate::psi::PsiChart;

fn check_exponents(gamma: f64, mu: f64) -> Result<()> {
    if !(gamma < 1.0) || !(mu < 1.0) {
        return Err(Error::NonIntegrable(format!("endpoint exponents must be < 1, got gamma = {gamma}, mu = {mu}")));
    }
    Ok(())
}

/// `∫ₐᵇ ψ′(τ)(ψ(b) − ψ(τ))^(−γ)(ψ(τ) − ψ(a))^(−μ) h(τ) dτ` for bounded `h`.
pub fn integrate_singular(
    chart: &PsiChart,
    gamma: f64,
    mu: f64,
    h: impl Fn(f64) -> f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    check_exponents(gamma, mu)?;
    let rule = QuadratureRule::new(chart.lo(), chart.hi(), chart.lo_grading(mu), gamma, cfg)?;
    Ok(rule.integrate_weighted(gamma, mu, |u| h(chart.raw_inverse(u))))
}

/// `∫ₐᵇ ψ′(τ) k(τ) dτ` where `k` itself carries endpoint singularities of order
/// at most `μ` at `a` and `γ` at `b`; the mesh is graded accordingly but the
/// integrand is evaluated as given.
pub fn integrate_graded(
    chart: &PsiChart,
    gamma: f64,
    mu: f64,
    k: impl Fn(f64) -> f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    check_exponents(gamma, mu)?;
    let rule = QuadratureRule::new(chart.lo(), chart.hi(), chart.lo_grading(mu), gamma, cfg)?;
    Ok(rule.integrate(|u| k(chart.interior_inverse(u))))
}

/// Closed form of the weighted integral with `h ≡ 1`:
/// `(ψ(b) − ψ(a))^(1−γ−μ) B(1−γ, 1−μ)`.
pub fn beta_closed_form(chart: &PsiChart, gamma: f64, mu: f64) -> Result<f64> {
    check_exponents(gamma, mu)?;
    Ok(chart.range().powf(1.0 - gamma - mu) * beta_fn(1.0 - gamma, 1.0 - mu)?)
}

/// Relative gap between the numeric weighted integral of `h ≡ 1` and its
/// Beta-function closed form.
pub fn beta_identity_residual(chart: &PsiChart, gamma: f64, mu: f64, cfg: &QuadConfig) -> Result<f64> {
    let numeric = integrate_singular(chart, gamma, mu, |_| 1.0, cfg)?;
    let exact = beta_closed_form(chart, gamma, mu)?;
    Ok((numeric - exact).abs() / exact.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn arcsine_weight_gives_pi() {
        let chart = PsiChart::identity(0.0, 1.0).unwrap();
        let v = integrate_singular(&chart, 0.5, 0.5, |_| 1.0, &QuadConfig::default()).unwrap();
        assert!((v - PI).abs() < 1e-11, "{v}");
    }

    #[test]
    fn unweighted_integral_is_chart_range() {
        for chart in [
            PsiChart::identity(0.0, 1.0).unwrap(),
            PsiChart::log(1.0, E).unwrap(),
            PsiChart::power(2.0, 0.0, 1.0).unwrap(),
            PsiChart::affine(0.5, 3.0, -1.0, 2.0).unwrap(),
        ] {
            let v = integrate_singular(&chart, 0.0, 0.0, |_| 1.0, &QuadConfig::default()).unwrap();
            assert!((v - chart.range()).abs() < 1e-12 * chart.range(), "{chart}");
        }
    }

    #[test]
    fn log_chart_beta_value() {
        let chart = PsiChart::log(1.0, E).unwrap();
        let v = integrate_singular(&chart, 0.3, 0.2, |_| 1.0, &QuadConfig::default()).unwrap();
        let b = beta_fn(0.7, 0.8).unwrap();
        assert!((v - b).abs() < 1e-10 * b);
    }

    #[test]
    fn residual_examples() {
        let id = PsiChart::identity(0.0, 1.0).unwrap();
        assert!(beta_identity_residual(&id, 0.0, 0.0, &QuadConfig::with_panels(64)).unwrap() <= 1e-12);
        assert!(beta_identity_residual(&id, 0.5, 0.5, &QuadConfig::with_panels(512)).unwrap() <= 1e-8);
        let pw = PsiChart::power(2.0, 0.0, 1.0).unwrap();
        assert!(beta_identity_residual(&pw, 0.7, 0.3, &QuadConfig::with_panels(512)).unwrap() <= 1e-8);
    }

    #[test]
    fn nonintegrable_is_rejected() {
        let id = PsiChart::identity(0.0, 1.0).unwrap();
        let cfg = QuadConfig::default();
        assert!(matches!(integrate_singular(&id, 1.0, 0.0, |_| 1.0, &cfg), Err(Error::NonIntegrable(_))));
        assert!(matches!(integrate_singular(&id, 0.0, 1.5, |_| 1.0, &cfg), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn graded_integral_of_singular_integrand() {
        // ∫₀¹ (1-t)^(-0.3) t^(-0.4) dt = B(0.6, 0.7)
        let id = PsiChart::identity(0.0, 1.0).unwrap();
        let v =
            integrate_graded(&id, 0.3, 0.4, |t| (1.0 - t).powf(-0.3) * t.powf(-0.4), &QuadConfig::default()).unwrap();
        let b = beta_fn(0.6, 0.7).unwrap();
        assert!((v - b).abs() < 1e-9 * b, "{v} vs {b}");
    }
}
