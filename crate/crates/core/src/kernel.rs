//! The regularizing filter and the bounds that control it.
//!
//! For one equation with diffusivity `alpha`, mode eigenvalue `lambda` and
//! rate `s = sqrt(alpha * lambda)` the filter is
//!
//! ```text
//! psi(x) = exp(-s (a - x)) / (2 beta s^k + 2 exp(-s a))
//!        = 1 / (2 beta s^k exp(s (a - x)) + 2 exp(-s x))
//! ```
//!
//! The second form is what gets evaluated: it never forms the two vanishing
//! exponentials of the first, so it stays finite for large `s`. At `beta = 0`
//! it reduces to `exp(s x) / 2`, half of the growing exact propagator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Filter parameters for one equation of the system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub alpha: f64,
    pub a: f64,
    pub k: f64,
    pub beta: f64,
}

impl KernelParams {
    pub fn new(alpha: f64, a: f64, k: f64, beta: f64) -> Result<Self> {
        let p = Self { alpha, a, k, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::Config(format!("a must be positive, got {}", self.a)));
        }
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return Err(Error::Config(format!("kernel order k must be >= 1, got {}", self.k)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }

    /// `a^k > k beta`, with `beta > 0`.
    pub fn hypothesis_ok(&self) -> bool {
        self.beta > 0.0 && self.a.powf(self.k) > self.k * self.beta
    }

    fn require_hypothesis(&self) -> Result<()> {
        if self.hypothesis_ok() {
            Ok(())
        } else {
            Err(Error::Hypothesis {
                a: self.a,
                k: self.k,
                beta: self.beta,
            })
        }
    }

    /// `ln(a^k / (k beta))`, positive under the hypothesis.
    fn log_ratio(&self) -> f64 {
        self.k * self.a.ln() - (self.k * self.beta).ln()
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if (0.0..=self.a).contains(&x) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "x",
                value: x,
                lo: 0.0,
                hi: self.a,
            })
        }
    }
}

#[inline]
pub(crate) fn rate(alpha: f64, lambda_n: f64) -> f64 {
    (alpha * lambda_n).sqrt()
}

/// Unchecked filter evaluation at rate `s`; `x` may be any real in `[0, a]`.
#[inline]
pub(crate) fn psi(p: &KernelParams, s: f64, x: f64) -> f64 {
    let damping = if p.beta == 0.0 {
        0.0
    } else {
        2.0 * p.beta * s.powf(p.k) * (s * (p.a - x)).exp()
    };
    1.0 / (damping + 2.0 * (-s * x).exp())
}

pub fn filter_value(p: &KernelParams, lambda_n: f64, x: f64) -> Result<f64> {
    p.validate()?;
    p.check_x(x)?;
    if !(lambda_n > 0.0) {
        return Err(Error::Config(format!("eigenvalue must be positive, got {lambda_n}")));
    }
    Ok(psi(p, rate(p.alpha, lambda_n), x))
}

/// Filter with the numerator shifted to `exp(-s (a - x + xi))`, i.e. the
/// filter evaluated at `x - xi`.
pub fn shifted_filter_value(p: &KernelParams, lambda_n: f64, x: f64, xi: f64) -> Result<f64> {
    p.validate()?;
    p.check_x(x)?;
    if xi < 0.0 {
        return Err(Error::Domain {
            what: "xi",
            value: xi,
            lo: 0.0,
            hi: x,
        });
    }
    if xi > x {
        return Err(Error::Ordering { x, xi });
    }
    filter_value(p, lambda_n, x - xi)
}

/// Mode-independent upper bound on the filter,
/// `½ (ka)^{kx/a} beta^{-x/a} ln(a^k/(k beta))^{-kx/a}`.
pub fn lemma1_bound(p: &KernelParams, x: f64) -> Result<f64> {
    p.validate()?;
    p.require_hypothesis()?;
    p.check_x(x)?;
    Ok(0.5 * log_growth(p, x).exp())
}

/// Bound on the shifted filter: the unshifted bound at `x - xi`.
pub fn shifted_lemma1_bound(p: &KernelParams, x: f64, xi: f64) -> Result<f64> {
    if xi > x {
        return Err(Error::Ordering { x, xi });
    }
    lemma1_bound(p, x - xi)
}

/// Square of twice the filter bound,
/// `(ka)^{2kx/a} beta^{-2x/a} ln(a^k/(k beta))^{-2kx/a}`.
pub fn stability_growth(p: &KernelParams, x: f64) -> Result<f64> {
    p.validate()?;
    p.require_hypothesis()?;
    p.check_x(x)?;
    Ok((2.0 * log_growth(p, x)).exp())
}

fn log_growth(p: &KernelParams, x: f64) -> f64 {
    let t = x / p.a;
    t * (p.k * (p.k * p.a).ln() - p.beta.ln() - p.k * p.log_ratio().ln())
}

/// `(cosh(s x), sinh(s x) / s)` with `s = sqrt(alpha * lambda_n)`.
pub fn unregularized_cosh_sinh(alpha: f64, lambda_n: f64, x: f64) -> Result<(f64, f64)> {
    if x < 0.0 {
        return Err(Error::Domain {
            what: "x",
            value: x,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if !(alpha > 0.0 && lambda_n > 0.0) {
        return Err(Error::Config(format!(
            "alpha and lambda must be positive, got {alpha} and {lambda_n}"
        )));
    }
    let s = rate(alpha, lambda_n);
    let c = (s * x).cosh();
    let sh = (s * x).sinh() / s;
    if c.is_finite() && sh.is_finite() {
        Ok((c, sh))
    } else {
        Err(Error::Saturation { s, x })
    }
}
