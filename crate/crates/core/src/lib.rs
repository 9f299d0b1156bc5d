//! Rare-event probability estimation for sums of i.i.d. variables.
//!
//! The crate estimates `p = P(S_n > gamma)` for `S_n = X_1 + ... + X_n`
//! with i.i.d. summands, and quantifies how fragile that estimate is to
//! missing tail information in the input model:
//!
//! - [`distributions`] — parametric input families, tail truncation,
//!   empirical distributions, exponential tilting and body/tail splices.
//! - [`asymptotics`] — the tilt equation `psi'(theta) = b`, exact
//!   light-tail asymptotics (lattice and non-lattice), heavy-tail
//!   one-big-jump asymptotics, and data-size thresholds.
//! - [`estimators`] — crude Monte Carlo, conditional Monte Carlo,
//!   exponential-tilting importance sampling, and an exact convolution
//!   oracle for lattice inputs.
//! - [`evt`] — generalized Pareto tail fitting (MLE/MOM/PWM) and
//!   extreme-value-index series used as a heavy-tail risk detector.
//! - [`bootstrap`] — percentile bootstrap confidence intervals over the
//!   empirical input, GPD-spliced variants, and coverage studies.
//!
//! All Monte Carlo routines draw from deterministic per-replicate streams
//! derived in [`streams`], so results are reproducible and independent of
//! how work is partitioned across threads.

pub mod asymptotics;
pub mod bootstrap;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod evt;
pub mod numeric;
pub mod streams;

pub use distributions::{make_family, Dist, FamilySpec};
pub use error::{Error, Result};
