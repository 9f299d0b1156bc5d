//! The behavior every input model implements.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::numeric;

/// Tail regime of an input model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailClass {
    /// Finite mgf in a neighborhood of 0.
    Light,
    /// `sf(x) ~ L(x) x^{-alpha}`; rare events happen by one big jump.
    RegularlyVarying { alpha: f64 },
    /// Heavy-tailed behavior without a power law (log-normal, Weibull k < 1).
    Subexponential,
}

/// Common distribution interface. `pdf` doubles as a probability mass
/// function on discrete supports.
pub(crate) trait Law: Send + Sync + std::fmt::Debug {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;

    fn sf(&self, x: f64) -> f64 {
        (1.0 - self.cdf(x)).clamp(0.0, 1.0)
    }

    /// Left-continuous generalized inverse of the cdf.
    fn quantile(&self, q: f64) -> f64;

    fn mean(&self) -> f64;

    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    /// Closed support interval (bounds may be infinite).
    fn support(&self) -> (f64, f64);

    fn tail_class(&self) -> TailClass {
        TailClass::Light
    }

    /// Supremum of the mgf domain `{theta : E e^{theta X} < inf}`.
    fn mgf_domain_sup(&self) -> f64;

    fn is_discrete(&self) -> bool {
        false
    }

    /// Lattice representation `(origin, span)` when the support lies on one.
    fn lattice(&self) -> Option<(f64, f64)> {
        None
    }

    /// Whether `quantile` is cheap enough for per-draw use.
    fn cheap_quantile(&self) -> bool {
        false
    }

    /// `E[X^r e^{theta X} I(X <= upto)]` for r in {0, 1, 2}.
    ///
    /// The default integrates `x^r e^{theta x} pdf(x)` adaptively; families
    /// with closed forms override it. Discrete laws must override.
    fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        let (lo, hi_support) = self.support();
        let hi = upto.min(hi_support);
        if hi <= lo {
            return Ok(0.0);
        }
        if !hi.is_finite() && theta >= self.mgf_domain_sup() {
            return Err(Error::TiltDomain { theta, domain_sup: self.mgf_domain_sup() });
        }
        let f = move |x: f64| {
            let d = self.pdf(x);
            if d == 0.0 {
                return 0.0;
            }
            let v = x.powi(r as i32) * (theta * x).exp() * d;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        // probe pass fixes the magnitude, second pass refines to ~1e-13 rel
        let probe = numeric::integrate_unbounded(&f, lo, hi, 1e-6);
        Ok(numeric::integrate_unbounded(&f, lo, hi, 1e-13 * probe.abs().max(1e-300)))
    }

    /// `psi(theta) = ln E[e^{theta X}]`.
    fn log_mgf(&self, theta: f64) -> Result<f64> {
        let m0 = self.exp_moment(0, theta, f64::INFINITY)?;
        Ok(m0.ln())
    }

    /// `psi'(theta)`, the mean of the theta-tilted law.
    fn log_mgf_d1(&self, theta: f64) -> Result<f64> {
        let m0 = self.exp_moment(0, theta, f64::INFINITY)?;
        let m1 = self.exp_moment(1, theta, f64::INFINITY)?;
        Ok(m1 / m0)
    }

    /// `psi''(theta)`, the variance of the theta-tilted law.
    fn log_mgf_d2(&self, theta: f64) -> Result<f64> {
        let m0 = self.exp_moment(0, theta, f64::INFINITY)?;
        let m1 = self.exp_moment(1, theta, f64::INFINITY)?;
        let m2 = self.exp_moment(2, theta, f64::INFINITY)?;
        let d1 = m1 / m0;
        Ok(m2 / m0 - d1 * d1)
    }
}
