//! Upper tail truncation: the law of X conditional on X <= u.

use rand::{Rng, RngCore};

use super::law::{Law, TailClass};
use super::Dist;
use crate::error::Result;

/// `cdf(x) = base_cdf(x) / base_cdf(u)` below the level, 1 above it.
#[derive(Debug, Clone)]
pub struct Truncated {
    base: Box<Dist>,
    level: f64,
    base_cdf_level: f64,
    base_sf_level: f64,
}

impl Truncated {
    /// Callers go through `Dist::truncate`, which validates `base_cdf(u) > 0`
    /// and short-circuits `u` at or above the support.
    pub(super) fn new_unchecked(base: Dist, level: f64) -> Self {
        let base_cdf_level = base.cdf(level);
        let base_sf_level = base.sf(level);
        Self { base: Box::new(base), level, base_cdf_level, base_sf_level }
    }

    pub fn base(&self) -> &Dist {
        &self.base
    }

    pub fn level(&self) -> f64 {
        self.level
    }
}

impl Law for Truncated {
    fn pdf(&self, x: f64) -> f64 {
        if x > self.level {
            0.0
        } else {
            self.base.pdf(x) / self.base_cdf_level
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x >= self.level {
            1.0
        } else {
            (self.base.cdf(x) / self.base_cdf_level).min(1.0)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x >= self.level {
            0.0
        } else {
            ((self.base.sf(x) - self.base_sf_level) / self.base_cdf_level).clamp(0.0, 1.0)
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        self.base.quantile(q.clamp(0.0, 1.0) * self.base_cdf_level)
    }

    fn mean(&self) -> f64 {
        self.exp_moment(1, 0.0, f64::INFINITY).expect("finite truncated mean")
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        if self.base.cheap_quantile() {
            let u: f64 = rng.sample(rand_distr::Open01);
            return self.base.quantile(u * self.base_cdf_level);
        }
        // rejection against the base; acceptance probability is cdf(u)
        loop {
            let x = self.base.sample(rng);
            if x <= self.level {
                return x;
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.base.support();
        (lo, hi.min(self.level))
    }

    fn tail_class(&self) -> TailClass {
        TailClass::Light
    }

    fn mgf_domain_sup(&self) -> f64 {
        f64::INFINITY
    }

    fn is_discrete(&self) -> bool {
        self.base.is_discrete()
    }

    fn lattice(&self) -> Option<(f64, f64)> {
        self.base.lattice_span()
    }

    fn cheap_quantile(&self) -> bool {
        self.base.cheap_quantile()
    }

    fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        let capped = upto.min(self.level);
        Ok(self.base.exp_moment(r, theta, capped)? / self.base_cdf_level)
    }
}
