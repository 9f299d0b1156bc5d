//! Input models: parametric families, tail truncation, empirical
//! distributions, exponential tilting, and empirical-body/GPD-tail
//! splices — all behind one immutable, thread-safe value type.

mod empirical;
mod families;
pub(crate) mod law;
mod spliced;
mod tilted;
mod truncated;

pub use empirical::Empirical;
pub use families::{
    Exponential, FiniteLattice, Gamma, GeneralizedPareto, HalfNormal, HalfStudentT, LogNormal,
    Normal, Weibull,
};
pub use law::TailClass;
pub use spliced::Spliced;
pub use tilted::Tilted;
pub use truncated::Truncated;

use law::Law;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evt::GpdFit;

/// A serializable family spec: `{"family": name, "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    GeneralizedPareto { shape: f64 },
    HalfStudentT { degrees: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, variance: f64 },
    HalfNormal,
    Weibull { shape: f64 },
    LogNormal { log_mean: f64, log_variance: f64 },
    Gamma { shape: f64, rate: f64 },
    FiniteLattice { points: Vec<f64>, masses: Vec<f64> },
}

/// Build the distribution a family spec describes.
pub fn make_family(spec: &FamilySpec) -> Result<Dist> {
    Ok(match spec {
        FamilySpec::GeneralizedPareto { shape } => Dist::GeneralizedPareto(GeneralizedPareto::new(*shape)?),
        FamilySpec::HalfStudentT { degrees } => Dist::HalfStudentT(HalfStudentT::new(*degrees)?),
        FamilySpec::Exponential { rate } => Dist::Exponential(Exponential::new(*rate)?),
        FamilySpec::Normal { mean, variance } => Dist::Normal(Normal::new(*mean, *variance)?),
        FamilySpec::HalfNormal => Dist::HalfNormal(HalfNormal),
        FamilySpec::Weibull { shape } => Dist::Weibull(Weibull::new(*shape)?),
        FamilySpec::LogNormal { log_mean, log_variance } => {
            Dist::LogNormal(LogNormal::new(*log_mean, *log_variance)?)
        }
        FamilySpec::Gamma { shape, rate } => Dist::Gamma(Gamma::new(*shape, *rate)?),
        FamilySpec::FiniteLattice { points, masses } => {
            Dist::Lattice(FiniteLattice::new(points, masses)?)
        }
    })
}

/// An immutable input model.
#[derive(Debug, Clone)]
pub enum Dist {
    GeneralizedPareto(GeneralizedPareto),
    HalfStudentT(HalfStudentT),
    Exponential(Exponential),
    Normal(Normal),
    HalfNormal(HalfNormal),
    Weibull(Weibull),
    LogNormal(LogNormal),
    Gamma(Gamma),
    Lattice(FiniteLattice),
    Empirical(Empirical),
    Truncated(Truncated),
    Tilted(Box<Tilted>),
    Spliced(Spliced),
}

impl Dist {
    pub fn generalized_pareto(shape: f64) -> Result<Self> {
        Ok(Dist::GeneralizedPareto(GeneralizedPareto::new(shape)?))
    }

    pub fn half_student_t(degrees: f64) -> Result<Self> {
        Ok(Dist::HalfStudentT(HalfStudentT::new(degrees)?))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Dist::Exponential(Exponential::new(rate)?))
    }

    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        Ok(Dist::Normal(Normal::new(mean, variance)?))
    }

    pub fn half_normal() -> Self {
        Dist::HalfNormal(HalfNormal)
    }

    pub fn weibull(shape: f64) -> Result<Self> {
        Ok(Dist::Weibull(Weibull::new(shape)?))
    }

    pub fn log_normal(log_mean: f64, log_variance: f64) -> Result<Self> {
        Ok(Dist::LogNormal(LogNormal::new(log_mean, log_variance)?))
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Ok(Dist::Gamma(Gamma::new(shape, rate)?))
    }

    pub fn lattice(points: &[f64], masses: &[f64]) -> Result<Self> {
        Ok(Dist::Lattice(FiniteLattice::new(points, masses)?))
    }

    fn law(&self) -> &dyn Law {
        match self {
            Dist::GeneralizedPareto(d) => d,
            Dist::HalfStudentT(d) => d,
            Dist::Exponential(d) => d,
            Dist::Normal(d) => d,
            Dist::HalfNormal(d) => d,
            Dist::Weibull(d) => d,
            Dist::LogNormal(d) => d,
            Dist::Gamma(d) => d,
            Dist::Lattice(d) => d,
            Dist::Empirical(d) => d,
            Dist::Truncated(d) => d,
            Dist::Tilted(d) => &**d,
            Dist::Spliced(d) => d,
        }
    }

    /// Short family name, used in error messages and reports.
    pub fn family(&self) -> &'static str {
        match self {
            Dist::GeneralizedPareto(_) => "generalized_pareto",
            Dist::HalfStudentT(_) => "half_student_t",
            Dist::Exponential(_) => "exponential",
            Dist::Normal(_) => "normal",
            Dist::HalfNormal(_) => "half_normal",
            Dist::Weibull(_) => "weibull",
            Dist::LogNormal(_) => "log_normal",
            Dist::Gamma(_) => "gamma",
            Dist::Lattice(_) => "finite_lattice",
            Dist::Empirical(_) => "empirical",
            Dist::Truncated(_) => "truncated",
            Dist::Tilted(_) => "tilted",
            Dist::Spliced(_) => "spliced",
        }
    }

    /// Density (or probability mass on discrete supports).
    pub fn pdf(&self, x: f64) -> f64 {
        self.law().pdf(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.law().cdf(x)
    }

    /// Survival function `P(X > x)`.
    pub fn sf(&self, x: f64) -> f64 {
        self.law().sf(x)
    }

    pub fn quantile(&self, q: f64) -> f64 {
        self.law().quantile(q)
    }

    pub fn mean(&self) -> f64 {
        self.law().mean()
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.law().sample(rng)
    }

    /// Draw `count` samples into a fresh vector.
    pub fn sample_many(&self, count: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..count).map(|_| self.sample(rng)).collect()
    }

    pub fn support(&self) -> (f64, f64) {
        self.law().support()
    }

    pub fn tail_class(&self) -> TailClass {
        self.law().tail_class()
    }

    /// `sup {theta : E e^{theta X} < inf}`; 0 for heavy tails.
    pub fn mgf_domain_sup(&self) -> f64 {
        self.law().mgf_domain_sup()
    }

    pub fn is_discrete(&self) -> bool {
        self.law().is_discrete()
    }

    /// Lattice `(origin, span)` when the support lies on one.
    pub fn lattice_span(&self) -> Option<(f64, f64)> {
        self.law().lattice()
    }

    pub(crate) fn cheap_quantile(&self) -> bool {
        self.law().cheap_quantile()
    }

    /// `psi(theta) = ln E e^{theta X}`; an error outside the mgf domain.
    pub fn log_mgf(&self, theta: f64) -> Result<f64> {
        self.law().log_mgf(theta)
    }

    pub fn log_mgf_d1(&self, theta: f64) -> Result<f64> {
        self.law().log_mgf_d1(theta)
    }

    pub fn log_mgf_d2(&self, theta: f64) -> Result<f64> {
        self.law().log_mgf_d2(theta)
    }

    /// `E[X^r e^{theta X} I(X <= upto)]` for r in {0, 1, 2}.
    pub fn exp_moment(&self, r: u8, theta: f64, upto: f64) -> Result<f64> {
        self.law().exp_moment(r, theta, upto)
    }

    /// The law of X conditional on X <= level. Levels at or above the
    /// support are the identity; levels with no mass below are an error.
    pub fn truncate(&self, level: f64) -> Result<Dist> {
        let (lo, hi) = self.support();
        if level >= hi {
            return Ok(self.clone());
        }
        if self.cdf(level) <= 0.0 {
            return Err(Error::EmptyTruncation { level, support_inf: lo });
        }
        if let Dist::Truncated(t) = self {
            // nesting collapses: the support check above already handled
            // levels at or beyond the current one
            return Ok(Dist::Truncated(Truncated::new_unchecked(t.base().clone(), level)));
        }
        Ok(Dist::Truncated(Truncated::new_unchecked(self.clone(), level)))
    }

    /// Exponentially tilted law `dF_theta ∝ e^{theta x} dF`. Stays in
    /// closed form where the family allows it.
    pub fn tilt(&self, theta: f64) -> Result<Dist> {
        if theta == 0.0 {
            return Ok(self.clone());
        }
        let sup = self.mgf_domain_sup();
        if theta >= sup {
            return Err(Error::TiltDomain { theta, domain_sup: sup });
        }
        Ok(match self {
            Dist::Exponential(e) => Dist::exponential(e.rate - theta)?,
            Dist::Normal(nm) => Dist::normal(nm.mean + theta * nm.variance, nm.variance)?,
            Dist::Gamma(g) => Dist::gamma(g.shape, g.rate - theta)?,
            Dist::Lattice(l) => Dist::Lattice(l.tilted(theta)),
            Dist::Empirical(e) => {
                let lattice = FiniteLattice::equal_mass(e.values())?;
                Dist::Lattice(lattice.tilted(theta))
            }
            Dist::Tilted(t) => t.base().tilt(t.theta() + theta)?,
            Dist::Truncated(t) if theta < t.base().mgf_domain_sup() && t.base().tilts_closed() => {
                t.base().tilt(theta)?.truncate(t.level())?
            }
            _ => Dist::Tilted(Box::new(Tilted::new(self.clone(), theta)?)),
        })
    }

    /// Whether `tilt` rewrites this distribution into a closed family
    /// (including the conditioned-normal form of the half normal).
    fn tilts_closed(&self) -> bool {
        matches!(
            self,
            Dist::Exponential(_)
                | Dist::Normal(_)
                | Dist::Gamma(_)
                | Dist::Lattice(_)
                | Dist::Empirical(_)
                | Dist::HalfNormal(_)
        )
    }
}

/// Empirical distribution of a data set.
pub fn empirical_from(samples: &[f64]) -> Result<Dist> {
    Ok(Dist::Empirical(Empirical::from_samples(samples)?))
}

/// Conditional law given X <= u; see [`Dist::truncate`].
pub fn truncate(dist: &Dist, level: f64) -> Result<Dist> {
    dist.truncate(level)
}

/// Exponential tilt; see [`Dist::tilt`].
pub fn tilt(dist: &Dist, theta: f64) -> Result<Dist> {
    dist.tilt(theta)
}

/// Empirical body below the `1 - tail_quantile` empirical quantile, GPD
/// tail above it.
pub fn splice(body: &Empirical, tail_quantile: f64, fit: &GpdFit) -> Result<Dist> {
    Ok(Dist::Spliced(Spliced::new(body, tail_quantile, fit)?))
}
