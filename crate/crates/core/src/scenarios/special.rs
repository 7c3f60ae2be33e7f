//! Normal and Beta distribution helpers used to realize copula margins.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};

fn standard_normal() -> Normal {
    Normal::standard()
}

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    standard_normal().cdf(z)
}

/// Standard normal quantile. `p` must lie in `(0, 1)`.
pub fn norm_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Parameter(format!(
            "normal quantile level must be in (0,1), got {p}"
        )));
    }
    Ok(standard_normal().inverse_cdf(p))
}

/// Regularized incomplete beta function `I_x(alpha, beta)`.
pub fn beta_cdf(x: f64, alpha: f64, beta: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        beta_reg(alpha, beta, x)
    }
}

/// Inverse of the Beta(alpha, beta) CDF.
///
/// Safeguarded Newton iteration on `I_x(alpha, beta) - u` inside a shrinking
/// bisection bracket; falls back to bisection whenever the Newton step leaves
/// the bracket. Converges to `|I_x - u| <= 1e-12` or a bracket narrower than
/// machine resolution.
pub fn beta_inverse_cdf(u: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::Parameter(format!(
            "beta shape parameters must be positive and finite, got ({alpha}, {beta})"
        )));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Parameter(format!(
            "probability must lie in [0,1], got {u}"
        )));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    if u == 1.0 {
        return Ok(1.0);
    }

    let log_norm = ln_beta(alpha, beta);
    let pdf = |x: f64| ((alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln() - log_norm).exp();

    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = (alpha / (alpha + beta)).clamp(1e-6, 1.0 - 1e-6);
    for _ in 0..400 {
        let resid = beta_cdf(x, alpha, beta) - u;
        if resid.abs() <= 1e-12 {
            return Ok(x);
        }
        if resid > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= f64::EPSILON * hi.max(1e-300) {
            return Ok(0.5 * (lo + hi));
        }
        let slope = pdf(x);
        let newton = x - resid / slope;
        x = if slope.is_finite() && slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(x)
}
