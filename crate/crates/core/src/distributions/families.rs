//! The parametric input families.
//!
//! Scale conventions follow the experiment setup they back: the
//! generalized Pareto input is the one-parameter form with support
//! `[1/shape, inf)`, the half Student-t and Weibull are unit-scale, and
//! the half normal doubles the standard normal density on `x >= 0`.

use rand::{Rng, RngCore};
use rand_distr::Distribution as _;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use super::law::{Law, TailClass};
use crate::error::{Error, Result};
use crate::numeric::{self, norm_cdf, norm_pdf, norm_quantile, norm_sf};

fn open01(rng: &mut dyn RngCore) -> f64 {
    rng.sample(rand_distr::Open01)
}

fn param_err(family: &'static str, message: String) -> Error {
    Error::ParameterDomain { family, message }
}

// ---------------------------------------------------------------------------
// Generalized Pareto, one-parameter input form: support [1/xi, inf).

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPareto {
    pub shape: f64,
}

impl GeneralizedPareto {
    pub fn new(shape: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(param_err("generalized_pareto", format!("shape must be > 0, got {shape}")));
        }
        Ok(Self { shape })
    }
}

impl Law for GeneralizedPareto {
    fn pdf(&self, x: f64) -> f64 {
        let lo = 1.0 / self.shape;
        if x < lo {
            0.0
        } else {
            (self.shape * x).powf(-1.0 - 1.0 / self.shape)
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.sf(x)
    }

    fn sf(&self, x: f64) -> f64 {
        let lo = 1.0 / self.shape;
        if x <= lo {
            1.0
        } else {
            (self.shape * x).powf(-1.0 / self.shape)
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        (1.0 - q).powf(-self.shape) / self.shape
    }

    fn mean(&self) -> f64 {
        if self.shape < 1.0 {
            1.0 / (self.shape * (1.0 - self.shape))
        } else {
            f64::INFINITY
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        open01(rng).powf(-self.shape) / self.shape
    }

    fn support(&self) -> (f64, f64) {
        (1.0 / self.shape, f64::INFINITY)
    }

    fn tail_class(&self) -> TailClass {
        TailClass::RegularlyVarying { alpha: 1.0 / self.shape }
    }

    fn mgf_domain_sup(&self) -> f64 {
        0.0
    }

    fn cheap_quantile(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Half Student-t: |T_nu|, density doubled on x >= 0.

#[derive(Debug, Clone, PartialEq)]
pub struct HalfStudentT {
    pub degrees: f64,
    log_norm: f64,
}

impl HalfStudentT {
    pub fn new(degrees: f64) -> Result<Self> {
        if !(degrees > 0.0) || !degrees.is_finite() {
            return Err(param_err("half_student_t", format!("degrees must be > 0, got {degrees}")));
        }
        let log_norm = std::f64::consts::LN_2 + ln_gamma((degrees + 1.0) / 2.0)
            - ln_gamma(degrees / 2.0)
            - 0.5 * (degrees * std::f64::consts::PI).ln();
        Ok(Self { degrees, log_norm })
    }
}

impl Law for HalfStudentT {
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let nu = self.degrees;
        (self.log_norm - 0.5 * (nu + 1.0) * (1.0 + x * x / nu).ln()).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.sf(x)
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let nu = self.degrees;
        beta_reg(nu / 2.0, 0.5, nu / (nu + x * x))
    }

    fn quantile(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return 0.0;
        }
        if q >= 1.0 {
            return f64::INFINITY;
        }
        let mut hi = 1.0;
        while self.cdf(hi) < q && hi < 1e300 {
            hi *= 2.0;
        }
        numeric::bisect_increasing(&|x| self.cdf(x) - q, 0.0, hi, 1e-13, 0.0)
    }

    fn mean(&self) -> f64 {
        let nu = self.degrees;
        if nu <= 1.0 {
            return f64::INFINITY;
        }
        (std::f64::consts::LN_2 + 0.5 * nu.ln() + ln_gamma((nu + 1.0) / 2.0)
            - 0.5 * std::f64::consts::PI.ln()
            - (nu - 1.0).ln()
            - ln_gamma(nu / 2.0))
        .exp()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = rand_distr::StandardNormal.sample(&mut *rng);
        let chi2 = rand_distr::Gamma::new(self.degrees / 2.0, 2.0)
            .expect("valid chi-square shape")
            .sample(&mut *rng);
        (z / (chi2 / self.degrees).sqrt()).abs()
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn tail_class(&self) -> TailClass {
        TailClass::RegularlyVarying { alpha: self.degrees }
    }

    fn mgf_domain_sup(&self) -> f64 {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Exponential.

#[derive(Debug, Clone, PartialEq)]
pub struct Exponential {
    pub rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(param_err("exponential", format!("rate must be > 0, got {rate}")));
        }
        Ok(Self { rate })
    }
}

impl Law for Exponential {
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        -(-q).ln_1p() / self.rate
    }

    fn mean(&self) -> f64 {
        1.0 / self.rate
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        -open01(rng).ln() / self.rate
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn mgf_domain_sup(&self) -> f64 {
        self.rate
    }

    fn cheap_quantile(&self) -> bool {
        true
    }

    fn log_mgf(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(self.rate.ln() - (self.rate - theta).ln())
    }

    fn log_mgf_d1(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(1.0 / (self.rate - theta))
    }

    fn log_mgf_d2(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(1.0 / ((self.rate - theta) * (self.rate - theta)))
    }

    fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        let s = self.rate - theta;
        if upto <= 0.0 {
            return Ok(0.0);
        }
        if !upto.is_finite() {
            self.check_theta(theta)?;
            return Ok(match r {
                0 => self.rate / s,
                1 => self.rate / (s * s),
                _ => 2.0 * self.rate / (s * s * s),
            });
        }
        // int_0^u x^r rate e^{-s x} dx, valid for any sign of s
        let su = s * upto;
        Ok(match r {
            0 => self.rate / s * (-(-su).exp_m1()),
            1 => self.rate / (s * s) * (1.0 - (-su).exp() * (1.0 + su)),
            _ => 2.0 * self.rate / (s * s * s)
                * (1.0 - (-su).exp() * (1.0 + su + 0.5 * su * su)),
        })
    }
}

impl Exponential {
    fn check_theta(&self, theta: f64) -> Result<()> {
        if theta >= self.rate {
            Err(Error::TiltDomain { theta, domain_sup: self.rate })
        } else {
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Normal.

#[derive(Debug, Clone, PartialEq)]
pub struct Normal {
    pub mean: f64,
    pub variance: f64,
    sd: f64,
}

impl Normal {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() || !mean.is_finite() {
            return Err(param_err("normal", format!("need finite mean and variance > 0, got ({mean}, {variance})")));
        }
        Ok(Self { mean, variance, sd: variance.sqrt() })
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }
}

impl Law for Normal {
    fn pdf(&self, x: f64) -> f64 {
        norm_pdf(self.z(x)) / self.sd
    }

    fn cdf(&self, x: f64) -> f64 {
        norm_cdf(self.z(x))
    }

    fn sf(&self, x: f64) -> f64 {
        norm_sf(self.z(x))
    }

    fn quantile(&self, q: f64) -> f64 {
        self.mean + self.sd * norm_quantile(q)
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = rand_distr::StandardNormal.sample(&mut *rng);
        self.mean + self.sd * z
    }

    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn mgf_domain_sup(&self) -> f64 {
        f64::INFINITY
    }

    fn cheap_quantile(&self) -> bool {
        true
    }

    fn log_mgf(&self, theta: f64) -> Result<f64> {
        Ok(self.mean * theta + 0.5 * self.variance * theta * theta)
    }

    fn log_mgf_d1(&self, theta: f64) -> Result<f64> {
        Ok(self.mean + self.variance * theta)
    }

    fn log_mgf_d2(&self, _theta: f64) -> Result<f64> {
        Ok(self.variance)
    }

    fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        // e^{psi} times moments of N(shifted mean, sd) below upto
        let psi = self.log_mgf(theta)?;
        let shifted = self.mean + self.variance * theta;
        let scale = psi.exp();
        if !upto.is_finite() {
            return Ok(match r {
                0 => scale,
                1 => scale * shifted,
                _ => scale * (shifted * shifted + self.variance),
            });
        }
        let z = (upto - shifted) / self.sd;
        let phi = norm_pdf(z);
        let cap = norm_cdf(z);
        Ok(match r {
            0 => scale * cap,
            1 => scale * (shifted * cap - self.sd * phi),
            _ => scale * ((shifted * shifted + self.variance) * cap - self.sd * (upto + shifted) * phi),
        })
    }
}

// ---------------------------------------------------------------------------
// Half normal: density 2 phi(x) on x >= 0.

#[derive(Debug, Clone, PartialEq)]
pub struct HalfNormal;

impl Law for HalfNormal {
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            2.0 * norm_pdf(x)
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            2.0 * norm_cdf(x) - 1.0
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            2.0 * norm_sf(x)
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return 0.0;
        }
        // sf(x) = 1 - q inverted through the complementary quantile
        -norm_quantile(0.5 * (1.0 - q))
    }

    fn mean(&self) -> f64 {
        (2.0 / std::f64::consts::PI).sqrt()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = rand_distr::StandardNormal.sample(&mut *rng);
        z.abs()
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn mgf_domain_sup(&self) -> f64 {
        f64::INFINITY
    }

    fn cheap_quantile(&self) -> bool {
        true
    }

    fn log_mgf(&self, theta: f64) -> Result<f64> {
        Ok(0.5 * theta * theta + (2.0 * norm_cdf(theta)).ln())
    }

    fn log_mgf_d1(&self, theta: f64) -> Result<f64> {
        let hazard = norm_pdf(theta) / norm_cdf(theta);
        Ok(theta + hazard)
    }

    fn log_mgf_d2(&self, theta: f64) -> Result<f64> {
        let hazard = norm_pdf(theta) / norm_cdf(theta);
        Ok(1.0 - theta * hazard - hazard * hazard)
    }

    fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        if upto <= 0.0 {
            return Ok(0.0);
        }
        // 2 e^{theta^2/2} int_0^u x^r phi(x - theta) dx
        let scale = 2.0 * (0.5 * theta * theta).exp();
        let a = -theta;
        let (cap, phi_a, phi_b, b) = if upto.is_finite() {
            let b = upto - theta;
            (norm_cdf(b) - norm_cdf(a), norm_pdf(a), norm_pdf(b), b)
        } else {
            (norm_sf(a), norm_pdf(a), 0.0, f64::INFINITY)
        };
        Ok(match r {
            0 => scale * cap,
            1 => scale * (theta * cap + phi_a - phi_b),
            _ => {
                let b_term = if upto.is_finite() { (theta + upto) * phi_b } else { 0.0 };
                let _ = b;
                scale * ((theta * theta + 1.0) * cap + theta * phi_a - b_term)
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Weibull with unit scale: density k x^{k-1} e^{-x^k} on x >= 0.

#[derive(Debug, Clone, PartialEq)]
pub struct Weibull {
    pub shape: f64,
}

impl Weibull {
    pub fn new(shape: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(param_err("weibull", format!("shape must be > 0, got {shape}")));
        }
        Ok(Self { shape })
    }
}

impl Law for Weibull {
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let k = self.shape;
        if x == 0.0 {
            return if k == 1.0 { 1.0 } else if k > 1.0 { 0.0 } else { f64::INFINITY };
        }
        k * x.powf(k - 1.0) * (-x.powf(k)).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x.powf(self.shape)).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-x.powf(self.shape)).exp()
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        (-(-q).ln_1p()).powf(1.0 / self.shape)
    }

    fn mean(&self) -> f64 {
        ln_gamma(1.0 + 1.0 / self.shape).exp()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        (-open01(rng).ln()).powf(1.0 / self.shape)
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn tail_class(&self) -> TailClass {
        if self.shape < 1.0 {
            TailClass::Subexponential
        } else {
            TailClass::Light
        }
    }

    fn mgf_domain_sup(&self) -> f64 {
        if self.shape > 1.0 {
            f64::INFINITY
        } else if self.shape == 1.0 {
            1.0
        } else {
            0.0
        }
    }

    fn cheap_quantile(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Log-normal: ln X ~ N(log_mean, log_variance).

#[derive(Debug, Clone, PartialEq)]
pub struct LogNormal {
    pub log_mean: f64,
    pub log_variance: f64,
    log_sd: f64,
}

impl LogNormal {
    pub fn new(log_mean: f64, log_variance: f64) -> Result<Self> {
        if !(log_variance > 0.0) || !log_variance.is_finite() || !log_mean.is_finite() {
            return Err(param_err(
                "log_normal",
                format!("need finite log-mean and log-variance > 0, got ({log_mean}, {log_variance})"),
            ));
        }
        Ok(Self { log_mean, log_variance, log_sd: log_variance.sqrt() })
    }

    fn z(&self, x: f64) -> f64 {
        (x.ln() - self.log_mean) / self.log_sd
    }
}

impl Law for LogNormal {
    fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            norm_pdf(self.z(x)) / (x * self.log_sd)
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            norm_cdf(self.z(x))
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            norm_sf(self.z(x))
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        (self.log_mean + self.log_sd * norm_quantile(q)).exp()
    }

    fn mean(&self) -> f64 {
        (self.log_mean + 0.5 * self.log_variance).exp()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = rand_distr::StandardNormal.sample(&mut *rng);
        (self.log_mean + self.log_sd * z).exp()
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn tail_class(&self) -> TailClass {
        TailClass::Subexponential
    }

    fn mgf_domain_sup(&self) -> f64 {
        0.0
    }

    fn cheap_quantile(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Gamma with shape alpha and rate beta.

#[derive(Debug, Clone, PartialEq)]
pub struct Gamma {
    pub shape: f64,
    pub rate: f64,
    ln_gamma_shape: f64,
}

impl Gamma {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0) || !(rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
            return Err(param_err("gamma", format!("need shape > 0 and rate > 0, got ({shape}, {rate})")));
        }
        Ok(Self { shape, rate, ln_gamma_shape: ln_gamma(shape) })
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        if theta >= self.rate {
            Err(Error::TiltDomain { theta, domain_sup: self.rate })
        } else {
            Ok(())
        }
    }
}

impl Law for Gamma {
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return if self.shape == 1.0 {
                self.rate
            } else if self.shape > 1.0 {
                0.0
            } else {
                f64::INFINITY
            };
        }
        (self.shape * self.rate.ln() + (self.shape - 1.0) * x.ln() - self.rate * x
            - self.ln_gamma_shape)
            .exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_lr(self.shape, self.rate * x)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            statrs::function::gamma::gamma_ur(self.shape, self.rate * x)
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return 0.0;
        }
        if q >= 1.0 {
            return f64::INFINITY;
        }
        let mut hi = (self.shape + 1.0) / self.rate;
        while self.cdf(hi) < q && hi < 1e300 {
            hi *= 2.0;
        }
        numeric::bisect_increasing(&|x| self.cdf(x) - q, 0.0, hi, 1e-13, 0.0)
    }

    fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        rand_distr::Gamma::new(self.shape, 1.0 / self.rate)
            .expect("validated parameters")
            .sample(&mut *rng)
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn mgf_domain_sup(&self) -> f64 {
        self.rate
    }

    fn log_mgf(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(-self.shape * (-theta / self.rate).ln_1p())
    }

    fn log_mgf_d1(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(self.shape / (self.rate - theta))
    }

    fn log_mgf_d2(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(self.shape / ((self.rate - theta) * (self.rate - theta)))
    }

    fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        if upto <= 0.0 {
            return Ok(0.0);
        }
        let s = self.rate - theta;
        if s <= 0.0 {
            // tilt beyond the rate only makes sense against a finite cap
            if !upto.is_finite() {
                return Err(Error::TiltDomain { theta, domain_sup: self.rate });
            }
            return self.exp_moment_default(r, theta, upto);
        }
        let a = self.shape + r as f64;
        // beta^alpha Gamma(a) / (s^a Gamma(alpha)) * P(a, s u)
        let ln_coeff = self.shape * self.rate.ln() + ln_gamma(a) - a * s.ln() - self.ln_gamma_shape;
        let reg = if upto.is_finite() { gamma_lr(a, s * upto) } else { 1.0 };
        Ok(ln_coeff.exp() * reg)
    }
}

impl Gamma {
    fn exp_moment_default(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        let f = |x: f64| x.powi(r as i32) * (theta * x).exp() * Law::pdf(self, x);
        let probe = numeric::integrate(&f, 0.0, upto, 1e-6);
        Ok(numeric::integrate(&f, 0.0, upto, 1e-13 * probe.abs().max(1e-300)))
    }
}

// ---------------------------------------------------------------------------
// Finite lattice: point masses on a (possibly irregular) finite support.

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLattice {
    points: Vec<f64>,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
    mean: f64,
    span: Option<(f64, f64)>,
}

impl FiniteLattice {
    /// Build from point/mass pairs. Masses are normalized to sum to one;
    /// duplicate points are merged.
    pub fn new(points: &[f64], masses: &[f64]) -> Result<Self> {
        if points.is_empty() || points.len() != masses.len() {
            return Err(param_err(
                "finite_lattice",
                format!("need matching nonempty points/masses, got {} / {}", points.len(), masses.len()),
            ));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(param_err("finite_lattice", "points must be finite".into()));
        }
        if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(param_err("finite_lattice", "masses must be finite and nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(param_err("finite_lattice", "masses must not all be zero".into()));
        }

        let mut paired: Vec<(f64, f64)> = points.iter().copied().zip(masses.iter().copied()).collect();
        paired.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut pts: Vec<f64> = Vec::with_capacity(paired.len());
        let mut ms: Vec<f64> = Vec::with_capacity(paired.len());
        for (p, m) in paired {
            if let Some(last) = pts.last() {
                if *last == p {
                    *ms.last_mut().unwrap() += m / total;
                    continue;
                }
            }
            pts.push(p);
            ms.push(m / total);
        }

        let mut cumulative = Vec::with_capacity(ms.len());
        let mut acc = 0.0;
        for &m in &ms {
            acc += m;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        let mean = pts.iter().zip(&ms).map(|(p, m)| p * m).sum();
        let span = lattice_span(&pts);
        Ok(Self { points: pts, masses: ms, cumulative, mean, span })
    }

    /// Equal-mass lattice on the given points.
    pub fn equal_mass(points: &[f64]) -> Result<Self> {
        Self::new(points, &vec![1.0; points.len()])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Lattice representation `(origin, span)`, if the points align on one.
    pub fn span(&self) -> Option<(f64, f64)> {
        self.span
    }
}

/// Detect the lattice representation `origin + j * span` of a sorted point
/// set, via a tolerant gcd of consecutive gaps.
fn lattice_span(points: &[f64]) -> Option<(f64, f64)> {
    let origin = points[0];
    if points.len() == 1 {
        return Some((origin, 1.0));
    }
    let scale = points.last().unwrap() - origin;
    let tol = 1e-9 * scale.max(1.0);
    let mut g = points[1] - points[0];
    for w in points.windows(2).skip(1) {
        let mut a = g.max(w[1] - w[0]);
        let mut b = g.min(w[1] - w[0]);
        while b > tol {
            let r = a - b * (a / b).round();
            a = b;
            b = r.abs();
        }
        g = a;
    }
    // a span that collapses far below the point spacing means the gaps
    // are incommensurable (or the data is generic continuous draws)
    if g < 1e-6 * scale {
        return None;
    }
    for &p in points {
        let j = ((p - origin) / g).round();
        if (origin + j * g - p).abs() > tol {
            return None;
        }
    }
    Some((origin, g))
}

impl Law for FiniteLattice {
    fn pdf(&self, x: f64) -> f64 {
        match self.points.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => self.masses[i],
            Err(_) => 0.0,
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|&p| p <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    fn sf(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|&p| p <= x);
        self.masses[idx..].iter().sum()
    }

    fn quantile(&self, q: f64) -> f64 {
        let idx = self.cumulative.partition_point(|&c| c < q.min(1.0));
        self.points[idx.min(self.points.len() - 1)]
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.points[idx.min(self.points.len() - 1)]
    }

    fn support(&self) -> (f64, f64) {
        (self.points[0], *self.points.last().unwrap())
    }

    fn mgf_domain_sup(&self) -> f64 {
        f64::INFINITY
    }

    fn is_discrete(&self) -> bool {
        true
    }

    fn lattice(&self) -> Option<(f64, f64)> {
        self.span
    }

    fn cheap_quantile(&self) -> bool {
        true
    }

    fn log_mgf(&self, theta: f64) -> Result<f64> {
        let values: Vec<f64> = self.points.iter().map(|&p| theta * p).collect();
        Ok(numeric::log_sum_exp_weighted(&values, &self.masses))
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

    fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        Ok(self
            .points
            .iter()
            .zip(&self.masses)
            .take_while(|(p, _)| **p <= upto)
            .map(|(&p, &m)| p.powi(r as i32) * (theta * p).exp() * m)
            .sum())
    }
}

impl FiniteLattice {
    /// Moments of e^{theta X} with the max exponent factored out.
    fn shifted_moments(&self, theta: f64) -> (f64, f64, f64) {
        let shift = self
            .points
            .iter()
            .map(|&p| theta * p)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (&p, &m) in self.points.iter().zip(&self.masses) {
            let w = m * (theta * p - shift).exp();
            m0 += w;
            m1 += w * p;
            m2 += w * p * p;
        }
        (m0, m1, m2)
    }

    /// Lattice reweighted by `e^{theta x}`: the exponential tilt stays on
    /// the same support.
    pub fn tilted(&self, theta: f64) -> FiniteLattice {
        let shift = self
            .points
            .iter()
            .map(|&p| theta * p)
            .fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self
            .points
            .iter()
            .zip(&self.masses)
            .map(|(&p, &m)| m * (theta * p - shift).exp())
            .collect();
        FiniteLattice::new(&self.points, &w).expect("tilted masses stay valid")
    }
}
