use std::f64::consts::E;

use proptest::prelude::*;

use fracbvp::fracops::frac_integral_fn;
use fracbvp::quad::beta_identity_residual;
use fracbvp::solver::picard_solve;
use fracbvp::{BoundaryFunctional, Expr, GreenKernel, ProblemSpec, PsiChart, QuadConfig, QuadratureRule};

fn chart(k: usize) -> PsiChart {
    match k {
        0 => PsiChart::identity(0.0, 1.0).unwrap(),
        1 => PsiChart::log(1.0, E).unwrap(),
        _ => PsiChart::power(2.0, 0.0, 1.0).unwrap(),
    }
}

#[test]
fn beta_residual_does_not_grow_with_panels() {
    let exps = [0.0, 0.3, 0.5, 0.7];
    for k in 0..3 {
        let c = chart(k);
        for &g in &exps {
            for &m in &exps {
                let mut prev = f64::INFINITY;
                for panels in [32, 64, 128, 256, 512] {
                    let r = beta_identity_residual(&c, g, m, &QuadConfig::with_panels(panels)).unwrap();
                    assert!(r <= prev + 1e-13, "{c} gamma={g} mu={m} panels={panels}: {r} after {prev}");
                    prev = r;
                }
            }
        }
    }
}

fn orders() -> impl Strategy<Value = (f64, f64)> {
    (0.55f64..=1.0, 0.55f64..=1.0).prop_filter("alpha + beta > 1", |(a, b)| a + b > 1.02)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_bounded_by_gmax((a, b) in orders(), k in 0usize..3, x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let c = chart(k);
        let kernel = GreenKernel::new(a, b, c.clone()).unwrap();
        let at = |r: f64| c.a() + r * (c.b() - c.a());
        let g = kernel.eval(at(x), at(y)).unwrap();
        prop_assert!(g.abs() <= kernel.gmax() * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn gmax_scales_with_range((a, b) in orders(), len in 0.5f64..4.0) {
        let k1 = GreenKernel::new(a, b, PsiChart::identity(0.0, len).unwrap()).unwrap();
        let k2 = GreenKernel::new(a, b, PsiChart::identity(0.0, 2.0 * len).unwrap()).unwrap();
        let ratio = k2.gmax() / k1.gmax();
        prop_assert!((ratio - 2f64.powf(a + b - 1.0)).abs() <= 1e-10);
    }

    #[test]
    fn plain_rule_is_exact_for_polynomials(deg in 0i32..16, lo in -2.0f64..0.0, len in 0.1f64..3.0) {
        let cfg = QuadConfig { n_panels: 4, points_per_panel: 8, grading: 3.0 };
        let hi = lo + len;
        let rule = QuadratureRule::new(lo, hi, 0.0, 0.0, &cfg).unwrap();
        let q = rule.integrate(|u| u.powi(deg));
        let exact = (hi.powi(deg + 1) - lo.powi(deg + 1)) / (deg as f64 + 1.0);
        prop_assert!((q - exact).abs() <= 1e-12 * exact.abs().max(1.0));
    }

    #[test]
    fn chart_inverse_round_trips(k in 0usize..3, r in 0.0f64..=1.0) {
        let c = chart(k);
        let t = c.a() + r * (c.b() - c.a());
        let back = c.inverse(c.value(t).unwrap()).unwrap();
        prop_assert!((back - t).abs() <= 1e-12);
    }

    #[test]
    fn fractional_integral_is_linear(alpha in 0.2f64..1.5, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, k in 0usize..3) {
        let c = chart(k);
        let cfg = QuadConfig::default();
        let t = c.a() + 0.7 * (c.b() - c.a());
        let f1 = |s: f64| s.cos();
        let f2 = |s: f64| s * s + 1.0;
        let lhs = frac_integral_fn(alpha, &c, |s| c1 * f1(s) + c2 * f2(s), t, &cfg).unwrap();
        let rhs = c1 * frac_integral_fn(alpha, &c, f1, t, &cfg).unwrap() + c2 * frac_integral_fn(alpha, &c, f2, t, &cfg).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn converged_solutions_are_fixed_points((a, b) in orders(), k in 0usize..3, c in -2.0f64..2.0, m in -0.5f64..0.5) {
        let spec = ProblemSpec::new(
            a,
            b,
            chart(k),
            Expr::parse(&format!("{c} * sin(x) + 1")).unwrap(),
            BoundaryFunctional::mean(m),
        )
        .unwrap();
        let tol = 1e-9;
        let sol = picard_solve(&spec, 128, tol, 400, None).unwrap();
        prop_assert!(sol.values[0] == 0.0);
        if sol.converged {
            prop_assert!(sol.final_update <= tol);
            prop_assert!(sol.integral_residual <= 10.0 * tol);
        }
    }
}
