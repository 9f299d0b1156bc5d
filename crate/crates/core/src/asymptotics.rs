//! Closed-form and root-finding machinery for `P(S_n > nb)`:
//! the tilt equation `psi'(theta) = b`, exact light-tail asymptotics
//! (non-lattice and lattice, strict and non-strict), the heavy-tail
//! one-big-jump approximation, truncation-level rules, and the data-size
//! thresholds for reliable estimation.

use serde::{Deserialize, Serialize};

use crate::distributions::{Dist, TailClass};
use crate::error::{Error, Result};

/// Root of the tilt equation for one `(distribution, b)` pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TiltSolution {
    /// `theta*` with `psi'(theta*) = b`.
    pub theta_star: f64,
    /// Rate `I = b theta* - psi(theta*)`.
    pub rate: f64,
    /// `psi(theta*)`.
    pub psi_at: f64,
    /// `psi''(theta*)`, the variance of the tilted law.
    pub psi2: f64,
    pub b: f64,
    pub converged: bool,
}

const TILT_RESIDUAL_TOL: f64 = 1e-10;

/// Solve `psi'(theta) = b` on `(0, sup D)` by Newton with a bisection
/// fallback.
pub fn solve_tilt(dist: &Dist, b: f64) -> Result<TiltSolution> {
    let sup = dist.mgf_domain_sup();
    if sup <= 0.0 {
        return Err(Error::NoMgf { operation: "solve_tilt" });
    }
    let mean = dist.mean();
    if !(b > mean) {
        return Err(Error::NotRare { b, mean });
    }
    // the tilted mean can never exceed the essential supremum
    let (_, support_hi) = dist.support();
    if b >= support_hi {
        return Err(Error::UnattainableLevel { b });
    }

    // expand an upper bracket with psi'(hi) > b
    let variance = dist.log_mgf_d2(0.0)?;
    let mut hi = if sup.is_finite() {
        sup - 1e-12 * sup.abs().max(1.0)
    } else {
        ((b - mean) / variance).max(1.0)
    };
    let mut guard = 0;
    loop {
        match dist.log_mgf_d1(hi) {
            Ok(d1) if d1 > b => break,
            Ok(d1) if !d1.is_finite() => {
                // numeric overflow in the tilted moments: pull back
                hi *= 0.5;
                guard += 1;
                if guard > 400 {
                    return Err(Error::UnattainableLevel { b });
                }
            }
            Ok(_) if sup.is_finite() => {
                // psi' stays below b all the way to the domain edge
                hi = 0.5 * (hi + sup);
                guard += 1;
                if sup - hi < 1e-14 * sup.abs().max(1.0) || guard > 200 {
                    return Err(Error::UnattainableLevel { b });
                }
            }
            Ok(_) => {
                hi *= 2.0;
                guard += 1;
                if guard > 400 || !hi.is_finite() {
                    return Err(Error::UnattainableLevel { b });
                }
            }
            Err(_) => {
                hi = if sup.is_finite() { 0.5 * (hi + 0.0) } else { hi / 2.0 };
                guard += 1;
                if guard > 400 {
                    return Err(Error::UnattainableLevel { b });
                }
            }
        }
    }

    let residual = |theta: f64| -> Result<f64> { Ok(dist.log_mgf_d1(theta)? - b) };

    // Newton start: min(half the domain, the Gaussian-matched point)
    let mut theta = ((b - mean) / variance).max(1e-12);
    if sup.is_finite() {
        theta = theta.min(0.5 * sup);
    }
    theta = theta.min(hi);

    let mut lo = 0.0f64;
    let mut hi_b = hi;
    let mut converged = false;
    for _ in 0..200 {
        let r = residual(theta)?;
        if r.abs() <= TILT_RESIDUAL_TOL {
            converged = true;
            break;
        }
        if r < 0.0 {
            lo = theta;
        } else {
            hi_b = theta;
        }
        let d2 = dist.log_mgf_d2(theta)?;
        let step = r / d2;
        let next = theta - step;
        theta = if next.is_finite() && next > lo && next < hi_b {
            next
        } else {
            0.5 * (lo + hi_b)
        };
        if (hi_b - lo).abs() < f64::EPSILON * theta.abs().max(1.0) {
            break;
        }
    }
    if !converged {
        converged = residual(theta)?.abs() <= TILT_RESIDUAL_TOL;
    }

    let psi_at = dist.log_mgf(theta)?;
    let psi2 = dist.log_mgf_d2(theta)?;
    Ok(TiltSolution { theta_star: theta, rate: b * theta - psi_at, psi_at, psi2, b, converged })
}

/// Which tail event the asymptotic targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `P(S_n > nb)`
    Strict,
    /// `P(S_n >= nb)`
    NonStrict,
}

/// Exact light-tail asymptotic for `P(S_n > nb)` (or `>=`):
/// `e^{-nI} / (theta* sqrt(2 pi n psi''))` times a lattice prefactor.
///
/// Non-lattice: prefactor 1 (both inequalities). Lattice with span `h`:
/// `theta* h e^{-theta* h} / (1 - e^{-theta* h})` for the strict event and
/// `theta* h / (1 - e^{-theta* h})` for the non-strict one. `span`
/// overrides the distribution's own lattice span when given; `nb` is
/// assumed to lie on the lattice of the sum.
pub fn light_asymptotic(
    dist: &Dist,
    n: u64,
    b: f64,
    inequality: Inequality,
    span: Option<f64>,
) -> Result<f64> {
    let sol = solve_tilt(dist, b)?;
    light_asymptotic_from(&sol, dist, n, inequality, span)
}

/// Same as [`light_asymptotic`] with a precomputed tilt solution.
pub fn light_asymptotic_from(
    sol: &TiltSolution,
    dist: &Dist,
    n: u64,
    inequality: Inequality,
    span: Option<f64>,
) -> Result<f64> {
    let h = match span {
        Some(h) if h > 0.0 => Some(h),
        Some(h) => {
            return Err(Error::InvalidArgument { message: format!("span must be > 0, got {h}") })
        }
        None => match (dist.is_discrete(), dist.lattice_span()) {
            (true, Some((_, h))) => Some(h),
            (true, None) => return Err(Error::MissingSpan),
            (false, _) => None,
        },
    };
    let prefactor = match h {
        None => 1.0,
        Some(h) => {
            let th = sol.theta_star * h;
            match inequality {
                Inequality::Strict => th * (-th).exp() / (-(-th).exp_m1()),
                Inequality::NonStrict => th / (-(-th).exp_m1()),
            }
        }
    };
    let nf = n as f64;
    let log_base = -nf * sol.rate
        - (sol.theta_star * (2.0 * std::f64::consts::PI * nf * sol.psi2).sqrt()).ln();
    Ok(prefactor * log_base.exp())
}

/// One-big-jump approximation `P(S_n > gamma) ~ n sf(gamma - (n-1) mu)`
/// for regularly varying inputs.
pub fn heavy_asymptotic(dist: &Dist, n: u64, gamma: f64) -> Result<f64> {
    if !matches!(dist.tail_class(), TailClass::RegularlyVarying { .. }) {
        return Err(Error::WrongRegime { operation: "heavy_asymptotic" });
    }
    let mean = dist.mean();
    let nf = n as f64;
    if !(gamma > nf * mean) {
        return Err(Error::NotRare { b: gamma / nf, mean });
    }
    Ok(nf * dist.sf(gamma - (nf - 1.0) * mean))
}

/// Free constants in the truncation-level rules. The theory fixes only
/// asymptotic orders; these defaults are the smallest admissible constants
/// with a safety factor on top.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TruncationRule {
    /// Multiplier on the minimal admissible light-tail constant.
    pub safety: f64,
    /// Exponent for the heavy-tail rule `(n(b - mu))^beta`, beta > 1.
    pub beta: f64,
    /// Floor constant for families where any c > 0 works.
    pub c_floor: f64,
}

impl Default for TruncationRule {
    fn default() -> Self {
        Self { safety: 1.1, beta: 1.5, c_floor: 1.0 }
    }
}

/// Minimal reliable truncation level for estimating `P(S_n > nb)` under
/// the input family's rule:
///
/// - normal-like (faster-than-exponential decay): `safety * c_floor * ln n`
/// - exponential(rate): `safety * b * ln n`
/// - gamma(shape, rate): `safety * (b / shape) * ln n`
/// - regularly varying: `(n (b - mean))^beta`
pub fn reliable_truncation_level(
    dist: &Dist,
    n: u64,
    b: f64,
    rule: TruncationRule,
) -> Result<f64> {
    let ln_n = (n as f64).ln();
    match dist {
        Dist::Normal(_) | Dist::HalfNormal(_) => Ok(rule.safety * rule.c_floor * ln_n),
        Dist::Weibull(w) if w.shape > 1.0 => Ok(rule.safety * rule.c_floor * ln_n),
        Dist::Exponential(_) | Dist::Weibull(_) if matches!(dist, Dist::Exponential(_)) => {
            Ok(rule.safety * b * ln_n)
        }
        Dist::Weibull(_) => Ok(rule.safety * b * ln_n), // shape == 1 is the exponential rule
        Dist::Gamma(g) => Ok(rule.safety * (b / g.shape) * ln_n),
        Dist::GeneralizedPareto(_) | Dist::HalfStudentT(_) => {
            let mean = dist.mean();
            Ok((n as f64 * (b - mean)).powf(rule.beta))
        }
        _ => Err(Error::UnsupportedClass { family: dist.family() }),
    }
}

/// Below this truncation level a regularly varying input makes the
/// estimate void: `mu + (gamma - n mu) / sqrt(ln n)`, stated with the
/// free bound constant set to 1, so it is an order-of-magnitude figure
/// rather than a sharp cutoff.
pub fn unreliable_truncation_level(mean: f64, n: u64, gamma: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument { message: "need n >= 2 for the log factor".into() });
    }
    let nf = n as f64;
    if !(gamma > nf * mean) {
        return Err(Error::NotRare { b: gamma / nf, mean });
    }
    Ok(mean + (gamma - nf * mean) / nf.ln().sqrt())
}

/// Truncation level for a density with an `O(e^{-lambda x})` envelope:
/// `safety / (lambda - theta*) * ln n`, valid for `theta* < lambda`.
pub fn exp_decay_truncation_level(
    lambda: f64,
    theta_star: f64,
    n: u64,
    safety: f64,
) -> Result<f64> {
    if !(theta_star < lambda) {
        return Err(Error::InvalidArgument {
            message: format!("need theta* < lambda, got theta* = {theta_star}, lambda = {lambda}"),
        });
    }
    Ok(safety / (lambda - theta_star) * (n as f64).ln())
}

/// Tail regime for the minimum-data-size thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case", deny_unknown_fields)]
pub enum SampleSizeRegime {
    /// `sf(x) ~ x^{-alpha} L(x)`, alpha > 2, with the reliability
    /// exponent beta > 1.
    HeavyPowerLaw { alpha: f64, beta: f64 },
    /// Exponential with the given rate.
    ExponentialLike { rate: f64 },
    /// Normal with the given variance and truncation constant c > 0.
    NormalLike { variance: f64, c: f64 },
}

impl SampleSizeRegime {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SampleSizeRegime::HeavyPowerLaw { alpha, beta } => alpha > 2.0 && beta > 1.0,
            SampleSizeRegime::ExponentialLike { rate } => rate > 0.0,
            SampleSizeRegime::NormalLike { variance, c } => variance > 0.0 && c > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument { message: format!("invalid regime parameters: {self:?}") })
        }
    }
}

/// Minimum data size N for reliably estimating `P(S_n > nb)`.
///
/// Without a target probability the thresholds are expressed through
/// `(n, b, mu)`; with one they are expressed through `p` instead:
///
/// | regime       | minimum N              | minimum N given p                                |
/// |--------------|------------------------|--------------------------------------------------|
/// | heavy        | `(n(b-mu))^(alpha beta)` | `n^beta / p^beta`                              |
/// | exponential  | `n^(rate b)`           | `n^(1 + sqrt(-2 ln p / n))`                      |
/// | normal       | `n^(c^2/(2 var) ln n)` | `n^(-c^2 ln p ln n / ((b-mu)^2 n))`              |
///
/// These are order-of-magnitude guides, not sharp constants.
pub fn min_sample_size(
    regime: SampleSizeRegime,
    n: u64,
    b: f64,
    mu: f64,
    target_p: Option<f64>,
) -> Result<f64> {
    regime.validate()?;
    if let Some(p) = target_p {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument {
                message: format!("target probability must be in (0, 1), got {p}"),
            });
        }
    }
    let nf = n as f64;
    Ok(match (regime, target_p) {
        (SampleSizeRegime::HeavyPowerLaw { alpha, beta }, None) => {
            (nf * (b - mu)).powf(alpha * beta)
        }
        (SampleSizeRegime::HeavyPowerLaw { beta, .. }, Some(p)) => nf.powf(beta) / p.powf(beta),
        (SampleSizeRegime::ExponentialLike { rate }, None) => nf.powf(rate * b),
        (SampleSizeRegime::ExponentialLike { .. }, Some(p)) => {
            nf.powf(1.0 + (-2.0 * p.ln() / nf).sqrt())
        }
        (SampleSizeRegime::NormalLike { variance, c }, None) => {
            nf.powf(c * c / (2.0 * variance) * nf.ln())
        }
        (SampleSizeRegime::NormalLike { c, .. }, Some(p)) => {
            nf.powf(-c * c * p.ln() * nf.ln() / ((b - mu) * (b - mu) * nf))
        }
    })
}
