//! Empirical distribution: equal mass on observed data points.

use std::sync::Arc;

use rand::{Rng, RngCore};

use super::law::Law;
use crate::error::{Error, Result};
use crate::numeric;

/// Step-function law with mass 1/N on each (sorted) observation.
#[derive(Debug, Clone)]
pub struct Empirical {
    values: Arc<[f64]>,
    mean: f64,
}

impl Empirical {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyData);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument { message: "empirical data must be finite".into() });
        }
        let mut values = samples.to_vec();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(Self { values: values.into(), mean })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sample maximum M_N.
    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

impl Law for Empirical {
    fn pdf(&self, x: f64) -> f64 {
        let lo = self.values.partition_point(|&v| v < x);
        let hi = self.values.partition_point(|&v| v <= x);
        (hi - lo) as f64 / self.values.len() as f64
    }

    fn cdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    fn sf(&self, x: f64) -> f64 {
        let above = self.values.len() - self.values.partition_point(|&v| v <= x);
        above as f64 / self.values.len() as f64
    }

    fn quantile(&self, q: f64) -> f64 {
        // ceil(qN)-th order statistic, 1-based
        let n = self.values.len();
        let rank = (q * n as f64).ceil() as usize;
        self.values[rank.clamp(1, n) - 1]
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        let idx = ((u * self.values.len() as f64) as usize).min(self.values.len() - 1);
        self.values[idx]
    }

    fn support(&self) -> (f64, f64) {
        (self.values[0], *self.values.last().unwrap())
    }

    fn mgf_domain_sup(&self) -> f64 {
        f64::INFINITY
    }

    fn is_discrete(&self) -> bool {
        true
    }

    fn cheap_quantile(&self) -> bool {
        true
    }

    fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        let n = self.values.len() as f64;
        Ok(self
            .values
            .iter()
            .take_while(|&&v| v <= upto)
            .map(|&v| v.powi(r as i32) * (theta * v).exp())
            .sum::<f64>()
            / n)
    }

    fn log_mgf(&self, theta: f64) -> Result<f64> {
        let vals: Vec<f64> = self.values.iter().map(|&v| theta * v).collect();
        let w = 1.0 / self.values.len() as f64;
        Ok(numeric::log_sum_exp_weighted(&vals, &vec![w; self.values.len()]))
    }

    fn log_mgf_d1(&self, theta: f64) -> Result<f64> {
        let (m0, m1, _) = self.shifted_moments(theta);
        Ok(m1 / m0)
    }

    fn log_mgf_d2(&self, theta: f64) -> Result<f64> {
        let (m0, m1, m2) = self.shifted_moments(theta);
        let d1 = m1 / m0;
        Ok(m2 / m0 - d1 * d1)
    }
}

impl Empirical {
    fn shifted_moments(&self, theta: f64) -> (f64, f64, f64) {
        let shift = if theta >= 0.0 { theta * self.max() } else { theta * self.values[0] };
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for &v in self.values.iter() {
            let w = (theta * v - shift).exp();
            m0 += w;
            m1 += w * v;
            m2 += w * v * v;
        }
        (m0, m1, m2)
    }
}
