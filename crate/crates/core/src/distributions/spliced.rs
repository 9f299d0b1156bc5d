//! Empirical body with a fitted GPD tail over a threshold.

use std::sync::Arc;

use rand::{Rng, RngCore};

use super::empirical::Empirical;
use super::law::{Law, TailClass};
use crate::error::{Error, Result};
use crate::evt::{GpdExcess, GpdFit};
use crate::numeric;

/// Below the threshold the law is the empirical step function; excesses
/// above it follow the fitted GPD, carrying the empirical tail mass.
#[derive(Debug, Clone)]
pub struct Spliced {
    body: Arc<[f64]>,
    n_total: usize,
    threshold: f64,
    tail_mass: f64,
    tail: GpdExcess,
    body_sum: f64,
}

impl Spliced {
    /// Splice a fitted tail onto an empirical body at the `1 - tail_quantile`
    /// empirical quantile.
    pub fn new(body: &Empirical, tail_quantile: f64, fit: &GpdFit) -> Result<Self> {
        if !(tail_quantile > 0.0 && tail_quantile < 1.0) {
            return Err(Error::InvalidArgument {
                message: format!("tail quantile must be in (0, 1), got {tail_quantile}"),
            });
        }
        let threshold = body.quantile(1.0 - tail_quantile);
        let values = body.values();
        let cut = values.partition_point(|&v| v <= threshold);
        let n_excess = values.len() - cut;
        if n_excess < 10 {
            return Err(Error::InsufficientTailData { have: n_excess, need: 10 });
        }
        let tail = GpdExcess::new(fit.shape, fit.scale)?;
        let body_vals: Vec<f64> = values[..cut].to_vec();
        let body_sum = body_vals.iter().sum();
        Ok(Self {
            body: body_vals.into(),
            n_total: values.len(),
            threshold,
            tail_mass: n_excess as f64 / values.len() as f64,
            tail,
            body_sum,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn tail(&self) -> GpdExcess {
        self.tail
    }
}

impl Law for Spliced {
    /// Density above the threshold; point mass (not a density) at body atoms.
    fn pdf(&self, x: f64) -> f64 {
        if x > self.threshold {
            return self.tail_mass * self.tail.pdf(x - self.threshold);
        }
        let lo = self.body.partition_point(|&v| v < x);
        let hi = self.body.partition_point(|&v| v <= x);
        (hi - lo) as f64 / self.n_total as f64
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.threshold {
            self.body.partition_point(|&v| v <= x) as f64 / self.n_total as f64
        } else {
            1.0 - self.tail_mass * self.tail.sf(x - self.threshold)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= self.threshold {
            let below = self.body.partition_point(|&v| v <= x);
            (self.n_total - below) as f64 / self.n_total as f64
        } else {
            self.tail_mass * self.tail.sf(x - self.threshold)
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        let body_mass = 1.0 - self.tail_mass;
        if q <= body_mass && !self.body.is_empty() {
            let rank = (q * self.n_total as f64).ceil() as usize;
            return self.body[rank.clamp(1, self.body.len()) - 1];
        }
        self.threshold + self.tail.quantile(((q - body_mass) / self.tail_mass).clamp(0.0, 1.0))
    }

    fn mean(&self) -> f64 {
        self.body_sum / self.n_total as f64 + self.tail_mass * (self.threshold + self.tail.mean())
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        let body_mass = 1.0 - self.tail_mass;
        if u < body_mass && !self.body.is_empty() {
            let idx = ((u / body_mass * self.body.len() as f64) as usize).min(self.body.len() - 1);
            self.body[idx]
        } else {
            self.threshold + self.tail.sample(rng)
        }
    }

    fn support(&self) -> (f64, f64) {
        let lo = self.body.first().copied().unwrap_or(self.threshold);
        (lo, self.threshold + self.tail.upper())
    }

    fn tail_class(&self) -> TailClass {
        if self.tail.shape > 0.0 {
            TailClass::RegularlyVarying { alpha: 1.0 / self.tail.shape }
        } else {
            TailClass::Light
        }
    }

    fn mgf_domain_sup(&self) -> f64 {
        if self.tail.shape > 0.0 {
            0.0
        } else if self.tail.shape == 0.0 {
            1.0 / self.tail.scale
        } else {
            f64::INFINITY
        }
    }

    fn cheap_quantile(&self) -> bool {
        true
    }

    fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        let body_part: f64 = self
            .body
            .iter()
            .take_while(|&&v| v <= upto)
            .map(|&v| v.powi(r as i32) * (theta * v).exp())
            .sum::<f64>()
            / self.n_total as f64;
        if upto <= self.threshold {
            return Ok(body_part);
        }
        if !upto.is_finite() && theta >= self.mgf_domain_sup() {
            return Err(Error::TiltDomain { theta, domain_sup: self.mgf_domain_sup() });
        }
        let t = self.threshold;
        let tail = self.tail;
        let f = move |y: f64| {
            let d = tail.pdf(y);
            if d == 0.0 {
                return 0.0;
            }
            (t + y).powi(r as i32) * (theta * (t + y)).exp() * d
        };
        let hi = (upto - t).min(tail.upper());
        let probe = numeric::integrate_unbounded(&f, 0.0, hi, 1e-6);
        let tail_part = numeric::integrate_unbounded(&f, 0.0, hi, 1e-13 * probe.abs().max(1e-300));
        Ok(body_part + self.tail_mass * tail_part)
    }
}
