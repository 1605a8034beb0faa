//! Gamma and Beta functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};

// Lanczos coefficients for g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    // z is the shifted argument x - 1
    LANCZOS[1..].iter().enumerate().fold(LANCZOS[0], |acc, (i, c)| acc + c / (z + i as f64 + 1.0))
}

/// Γ(x) for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn needs x > 0, got {x}")));
    }
    Ok(gamma_pos(x))
}

pub(crate) fn gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // reflection keeps the series in its accurate range
        return PI / ((PI * x).sin() * gamma_pos(1.0 - x));
    }
    if x == x.floor() && x <= 24.0 {
        return (1..x as u64).map(|k| k as f64).product();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok((PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// B(p, q) = Γ(p)Γ(q)/Γ(p+q).
pub fn beta_fn(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0) || !(p.is_finite() && q.is_finite()) {
        return Err(Error::Domain(format!("beta_fn needs p, q > 0, got ({p}, {q})")));
    }
    if p + q < 100.0 {
        Ok(gamma_pos(p) * gamma_pos(q) / gamma_pos(p + q))
    } else {
        Ok((ln_gamma(p)? + ln_gamma(q)? - ln_gamma(p + q)?).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_identities() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(2.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        assert!((gamma_fn(0.5).unwrap() - PI.sqrt()).abs() < 1e-15);
        assert!((beta_fn(0.5, 0.5).unwrap() - PI).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(beta_fn(1.0, 0.0).is_err());
        assert!(ln_gamma(-2.0).is_err());
    }

    #[test]
    fn ln_gamma_agrees_with_gamma() {
        for &x in &[0.1, 0.7, 1.3, 4.5, 17.25, 29.9] {
            let direct = gamma_fn(x).unwrap().ln();
            assert!((ln_gamma(x).unwrap() - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }
}
