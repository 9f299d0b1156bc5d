//! Exponential change of measure: density `e^{theta x - psi(theta)}`
//! against the base law.
//!
//! Families whose tilt stays in a closed-form family never reach this
//! type (`Dist::tilt` rewrites them). What remains is the half normal,
//! whose tilt is a normal conditioned to the half line, and a generic
//! fallback that samples through a lazily built quantile table.

use std::sync::{Arc, OnceLock};

use rand::{Rng, RngCore};

use super::law::{Law, TailClass};
use super::Dist;
use crate::error::Result;
use crate::numeric::{self, norm_cdf, norm_quantile};

#[derive(Debug)]
pub struct Tilted {
    base: Box<Dist>,
    theta: f64,
    psi: f64,
    table: OnceLock<Arc<QuantileTable>>,
}

impl Clone for Tilted {
    fn clone(&self) -> Self {
        let table = OnceLock::new();
        if let Some(t) = self.table.get() {
            let _ = table.set(t.clone());
        }
        Self { base: self.base.clone(), theta: self.theta, psi: self.psi, table }
    }
}

/// Normal(mu, 1) conditioned to [0, inf) — the closed form behind a
/// tilted half normal.
#[derive(Debug, Clone, Copy)]
struct NormalCond {
    mu: f64,
    mass: f64,
}

impl Tilted {
    pub(super) fn new(base: Dist, theta: f64) -> Result<Self> {
        let psi = base.log_mgf(theta)?;
        Ok(Self { base: Box::new(base), theta, psi, table: OnceLock::new() })
    }

    pub fn base(&self) -> &Dist {
        &self.base
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn normal_cond(&self) -> Option<NormalCond> {
        match &*self.base {
            Dist::HalfNormal(_) => Some(NormalCond { mu: self.theta, mass: norm_cdf(self.theta) }),
            _ => None,
        }
    }

    fn bracket_quantile(&self, q: f64) -> f64 {
        let (lo_s, hi_s) = self.base.support();
        let m = self.mean();
        let sd = self.base.log_mgf_d2(self.theta).map(f64::sqrt).unwrap_or(1.0);
        let mut lo = if lo_s.is_finite() { lo_s } else { m - 8.0 * sd };
        while !lo_s.is_finite() && self.cdf(lo) > q && m - lo < 1e12 * sd {
            lo = m - 2.0 * (m - lo);
        }
        let mut hi = if hi_s.is_finite() { hi_s } else { m + 8.0 * sd };
        while !hi_s.is_finite() && self.cdf(hi) < q && hi - m < 1e12 * sd {
            hi = m + 2.0 * (hi - m);
        }
        numeric::bisect_increasing(&|x| self.cdf(x) - q, lo, hi, 1e-12, 0.0)
    }

    fn table(&self) -> &QuantileTable {
        self.table.get_or_init(|| Arc::new(QuantileTable::build(self)))
    }
}

impl Law for Tilted {
    fn pdf(&self, x: f64) -> f64 {
        self.base.pdf(x) * (self.theta * x - self.psi).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        if let Some(nc) = self.normal_cond() {
            if x <= 0.0 {
                return 0.0;
            }
            return ((norm_cdf(x - nc.mu) - norm_cdf(-nc.mu)) / nc.mass).clamp(0.0, 1.0);
        }
        let m = self.base.exp_moment(0, self.theta, x).unwrap_or(f64::NAN);
        ((m.ln() - self.psi).exp()).clamp(0.0, 1.0)
    }

    fn quantile(&self, q: f64) -> f64 {
        if let Some(nc) = self.normal_cond() {
            let base = norm_cdf(-nc.mu);
            return nc.mu + norm_quantile(base + q.clamp(0.0, 1.0) * nc.mass);
        }
        self.bracket_quantile(q.clamp(0.0, 1.0))
    }

    fn mean(&self) -> f64 {
        self.base.log_mgf_d1(self.theta).expect("theta inside the mgf domain")
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.sample(rand_distr::Open01);
        if let Some(nc) = self.normal_cond() {
            let base = norm_cdf(-nc.mu);
            return nc.mu + norm_quantile(base + u * nc.mass);
        }
        self.table().invert(u)
    }

    fn support(&self) -> (f64, f64) {
        self.base.support()
    }

    fn tail_class(&self) -> TailClass {
        TailClass::Light
    }

    fn mgf_domain_sup(&self) -> f64 {
        self.base.mgf_domain_sup() - self.theta
    }

    fn is_discrete(&self) -> bool {
        self.base.is_discrete()
    }

    fn lattice(&self) -> Option<(f64, f64)> {
        self.base.lattice_span()
    }

    fn cheap_quantile(&self) -> bool {
        self.normal_cond().is_some()
    }

    fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        let m = self.base.exp_moment(r, self.theta + theta, upto)?;
        Ok(m * (-self.psi).exp())
    }

    fn log_mgf(&self, theta: f64) -> Result<f64> {
        Ok(self.base.log_mgf(self.theta + theta)? - self.psi)
    }

    fn log_mgf_d1(&self, theta: f64) -> Result<f64> {
        self.base.log_mgf_d1(self.theta + theta)
    }

    fn log_mgf_d2(&self, theta: f64) -> Result<f64> {
        self.base.log_mgf_d2(self.theta + theta)
    }
}

const TABLE_PANELS: usize = 4096;

/// Panel-wise composite-Simpson cdf over the effective support, inverted
/// by Newton on a cubic Hermite interpolant (values + exact densities at
/// the panel edges).
#[derive(Debug)]
struct QuantileTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
}

impl QuantileTable {
    fn build(t: &Tilted) -> Self {
        let (lo_s, hi_s) = t.base.support();
        let lo = if lo_s.is_finite() { lo_s } else { t.bracket_quantile(1e-13) };
        let hi = if hi_s.is_finite() { hi_s } else { t.bracket_quantile(1.0 - 1e-13) };
        let n = TABLE_PANELS;
        let h = (hi - lo) / n as f64;
        let mut xs = Vec::with_capacity(n + 1);
        let mut pdf = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let x = lo + i as f64 * h;
            xs.push(x);
            pdf.push(t.pdf(x));
        }
        let mut cdf = Vec::with_capacity(n + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let mid = t.pdf(0.5 * (xs[i] + xs[i + 1]));
            acc += h / 6.0 * (pdf[i] + 4.0 * mid + pdf[i + 1]);
            cdf.push(acc);
        }
        // normalize away the mass outside the table range
        let total = acc;
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Self { xs, cdf, pdf }
    }

    fn invert(&self, u: f64) -> f64 {
        let i = match self.cdf.partition_point(|&c| c < u) {
            0 => 0,
            k if k > self.xs.len() - 1 => self.xs.len() - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let hx = x1 - x0;
        if c1 <= c0 {
            return x0;
        }
        // cubic Hermite for the cdf on [0, 1] with slopes h * pdf
        let (d0, d1) = (hx * self.pdf[i], hx * self.pdf[i + 1]);
        let target = u;
        let value = |s: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
            let h10 = s3 - 2.0 * s2 + s;
            let h01 = -2.0 * s3 + 3.0 * s2;
            let h11 = s3 - s2;
            h00 * c0 + h10 * d0 + h01 * c1 + h11 * d1
        };
        let slope = |s: f64| {
            let s2 = s * s;
            let h00 = 6.0 * s2 - 6.0 * s;
            let h10 = 3.0 * s2 - 4.0 * s + 1.0;
            let h01 = -6.0 * s2 + 6.0 * s;
            let h11 = 3.0 * s2 - 2.0 * s;
            h00 * c0 + h10 * d0 + h01 * c1 + h11 * d1
        };
        let mut s = ((target - c0) / (c1 - c0)).clamp(0.0, 1.0);
        for _ in 0..4 {
            let g = slope(s);
            if g <= 0.0 {
                break;
            }
            s = (s - (value(s) - target) / g).clamp(0.0, 1.0);
        }
        x0 + s * hx
    }
}
