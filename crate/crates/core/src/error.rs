//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Parameter outside the family's admissible range.
    #[error("invalid parameter for {family}: {message}")]
    ParameterDomain { family: &'static str, message: String },

    /// Truncation level below the support leaves no mass.
    #[error("truncation at {level} leaves zero mass (support starts at {support_inf})")]
    EmptyTruncation { level: f64, support_inf: f64 },

    /// Empirical construction from an empty sample.
    #[error("empty data: an empirical distribution needs at least one observation")]
    EmptyData,

    /// Tilt parameter outside the mgf domain.
    #[error("tilt parameter {theta} outside the mgf domain (sup = {domain_sup})")]
    TiltDomain { theta: f64, domain_sup: f64 },

    /// The distribution has no finite mgf for positive arguments.
    #[error("{operation} requires a finite moment generating function near 0, but the input is heavy-tailed")]
    NoMgf { operation: &'static str },

    /// Requested level is not in the large-deviations regime.
    #[error("level b = {b} is not above the mean {mean}; the event is not rare")]
    NotRare { b: f64, mean: f64 },

    /// No tilt root: the level exceeds what tilting can reach.
    #[error("level b = {b} is unattainable: psi' stays below it on the mgf domain")]
    UnattainableLevel { b: f64 },

    /// Lattice asymptotics need a span.
    #[error("lattice asymptotic requested but no span is available for this distribution")]
    MissingSpan,

    /// Heavy-tail asymptotic applied outside the regularly varying class.
    #[error("wrong regime: {operation} requires a regularly varying tail")]
    WrongRegime { operation: &'static str },

    /// Truncation-level rule not defined for this family.
    #[error("no truncation-level rule for family {family}")]
    UnsupportedClass { family: &'static str },

    /// Convolution grid would exceed the resource cap.
    #[error("convolution grid of {points} points exceeds the cap of {cap}")]
    ResourceLimit { points: u64, cap: u64 },

    /// Sample with no spread where spread is required.
    #[error("degenerate data: {message}")]
    DegenerateData { message: String },

    /// Too few tail observations for a GPD fit.
    #[error("insufficient tail data: {have} excesses, need at least {need}")]
    InsufficientTailData { have: usize, need: usize },

    /// Optimizer failed to converge; carries the best point found.
    #[error("GPD MLE did not converge; best point was shape {best_shape}, scale {best_scale}")]
    MleNonConvergence { best_shape: f64, best_scale: f64 },

    /// Estimator arguments invalid.
    #[error("invalid argument: {message}")]
    InvalidArgument { message: String },

    /// Tail classification had too few usable points.
    #[error("inconclusive classification: only {defined} defined index points in the window, need {need}")]
    Inconclusive { defined: usize, need: usize },

    /// Too many bootstrap resamples failed.
    #[error("bootstrap failed: {failed} of {total} resamples errored (policy cap 20%)")]
    BootstrapFailure { failed: usize, total: usize },
}
