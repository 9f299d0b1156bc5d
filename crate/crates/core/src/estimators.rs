//! Monte Carlo estimators for `p = P(S_n > gamma)` and the exact
//! convolution oracle for lattice inputs.
//!
//! Every estimator derives one child stream per replicate from
//! `(seed, estimator, replicate index)`, so a result is a pure function
//! of its arguments and is reproducible across any work partitioning.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{solve_tilt, Inequality};
use crate::distributions::{Dist, FiniteLattice};
use crate::error::{Error, Result};
use crate::streams::{child_rng, domain};

/// Estimator identity carried in results and stream derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Crude,
    CondMcAk,
    TiltedIs,
}

impl EstimatorKind {
    fn stream_domain(self) -> u64 {
        match self {
            EstimatorKind::Crude => domain::CRUDE,
            EstimatorKind::CondMcAk => domain::COND_MC_AK,
            EstimatorKind::TiltedIs => domain::TILTED_IS,
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimatorKind::Crude => write!(f, "crude"),
            EstimatorKind::CondMcAk => write!(f, "cond_mc_ak"),
            EstimatorKind::TiltedIs => write!(f, "tilted_is"),
        }
    }
}

/// A Monte Carlo point estimate with its replication count and standard
/// error (sample standard deviation of replicates over sqrt(R)).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimate: f64,
    pub std_error: f64,
    pub replications: u64,
    pub estimator: EstimatorKind,
    pub seed: u64,
}

const BLOCK: u64 = 4096;

/// Run `r` replicates of `f` and reduce deterministically: replicates are
/// grouped into fixed blocks, blocks may run on any worker, and the final
/// fold is sequential in block order.
fn run_replicates<F>(r: u64, f: F) -> (f64, f64)
where
    F: Fn(u64) -> f64 + Sync,
{
    let blocks = r.div_ceil(BLOCK);
    let partials: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|bi| {
            let start = bi * BLOCK;
            let end = ((bi + 1) * BLOCK).min(r);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for j in start..end {
                let v = f(j);
                sum += v;
                sumsq += v * v;
            }
            (sum, sumsq)
        })
        .collect();
    partials.into_iter().fold((0.0, 0.0), |acc, (s, s2)| (acc.0 + s, acc.1 + s2))
}

fn finish(sum: f64, sumsq: f64, r: u64, estimator: EstimatorKind, seed: u64) -> EstimateResult {
    let rf = r as f64;
    let estimate = sum / rf;
    let std_error = if r > 1 {
        let var = ((sumsq - sum * sum / rf) / (rf - 1.0)).max(0.0);
        (var / rf).sqrt()
    } else {
        0.0
    };
    EstimateResult { estimate, std_error, replications: r, estimator, seed }
}

fn check_replications(r: u64) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument { message: "need at least one replication".into() });
    }
    Ok(())
}

/// Crude Monte Carlo: mean of `I(S_n > gamma)` over fresh n-draws.
pub fn crude_mc(dist: &Dist, n: u64, gamma: f64, r: u64, seed: u64) -> Result<EstimateResult> {
    check_replications(r)?;
    let (sum, sumsq) = run_replicates(r, |j| {
        let mut rng = child_rng(seed, EstimatorKind::Crude.stream_domain(), j);
        let mut s = 0.0;
        for _ in 0..n {
            s += dist.sample(&mut rng);
        }
        if s > gamma {
            1.0
        } else {
            0.0
        }
    });
    Ok(finish(sum, sumsq, r, EstimatorKind::Crude, seed))
}

/// One conditional Monte Carlo replicate value from the n-1 leading draws:
/// `n * sf(max(M_{n-1}, gamma - S_{n-1}))`.
pub fn ak_replicate_value(dist: &Dist, n: u64, gamma: f64, leading: &[f64]) -> f64 {
    debug_assert_eq!(leading.len() as u64 + 1, n);
    let s: f64 = leading.iter().sum();
    let m = leading.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    n as f64 * dist.sf(m.max(gamma - s))
}

/// Conditional Monte Carlo: unbiased for
/// `n P(S_n > gamma, max uniquely attained at the last index)`, which
/// equals `p` for continuous inputs. On discrete inputs it carries the
/// small downward bias bounded by [`cond_mc_bias_bound`].
pub fn cond_mc_ak(dist: &Dist, n: u64, gamma: f64, r: u64, seed: u64) -> Result<EstimateResult> {
    check_replications(r)?;
    if n == 0 {
        return Err(Error::InvalidArgument { message: "need n >= 1 summands".into() });
    }
    let (sum, sumsq) = run_replicates(r, |j| {
        let mut rng = child_rng(seed, EstimatorKind::CondMcAk.stream_domain(), j);
        let mut s = 0.0;
        let mut m = f64::NEG_INFINITY;
        for _ in 0..n - 1 {
            let x = dist.sample(&mut rng);
            s += x;
            m = m.max(x);
        }
        n as f64 * dist.sf(m.max(gamma - s))
    });
    Ok(finish(sum, sumsq, r, EstimatorKind::CondMcAk, seed))
}

/// Importance-sampling weight of one tilted replicate with sum `s`:
/// `e^{-theta s + n psi(theta)} I(s > gamma)`.
pub fn is_replicate_weight(theta: f64, psi: f64, n: u64, gamma: f64, s: f64) -> f64 {
    if s > gamma {
        (-theta * s + n as f64 * psi).exp()
    } else {
        0.0
    }
}

/// Exponential-tilting importance sampling at the root of
/// `psi'(theta) = b`, targeting `P(S_n > n b)`. Unbiased for `p`.
pub fn is_tilted_mc(dist: &Dist, n: u64, b: f64, r: u64, seed: u64) -> Result<EstimateResult> {
    check_replications(r)?;
    let sol = solve_tilt(dist, b)?;
    is_tilted_mc_at(dist, n, n as f64 * b, sol.theta_star, r, seed)
}

/// Importance sampling with an explicit tilt parameter. The estimator is
/// unbiased for `P(S_n > gamma)` for any theta in the mgf domain.
pub fn is_tilted_mc_at(
    dist: &Dist,
    n: u64,
    gamma: f64,
    theta: f64,
    r: u64,
    seed: u64,
) -> Result<EstimateResult> {
    check_replications(r)?;
    let tilted = dist.tilt(theta)?;
    let psi = dist.log_mgf(theta)?;
    let (sum, sumsq) = run_replicates(r, |j| {
        let mut rng = child_rng(seed, EstimatorKind::TiltedIs.stream_domain(), j);
        let mut s = 0.0;
        for _ in 0..n {
            s += tilted.sample(&mut rng);
        }
        is_replicate_weight(theta, psi, n, gamma, s)
    });
    Ok(finish(sum, sumsq, r, EstimatorKind::TiltedIs, seed))
}

const CONVOLUTION_GRID_CAP: u64 = 1_000_000;

/// Exact `P(S_n > gamma)` (or `>=`) for a finite lattice by dynamic
/// programming over the span grid. Cost is O(n * grid * atoms); grids
/// beyond 10^6 points are refused.
pub fn exact_convolution(
    lattice: &FiniteLattice,
    n: u64,
    gamma: f64,
    inequality: Inequality,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument { message: "need n >= 1 summands".into() });
    }
    let (origin, h) = lattice.span().ok_or(Error::MissingSpan)?;
    let points = lattice.points();
    let masses = lattice.masses();
    let offsets: Vec<usize> = points.iter().map(|&p| ((p - origin) / h).round() as usize).collect();
    let j_max = *offsets.last().unwrap_or(&0);
    let grid = n
        .checked_mul(j_max as u64)
        .and_then(|g| g.checked_add(1))
        .ok_or(Error::ResourceLimit { points: u64::MAX, cap: CONVOLUTION_GRID_CAP })?;
    if grid > CONVOLUTION_GRID_CAP {
        return Err(Error::ResourceLimit { points: grid, cap: CONVOLUTION_GRID_CAP });
    }

    let mut pmf = vec![0.0f64; grid as usize];
    for (&j, &m) in offsets.iter().zip(masses) {
        pmf[j] += m;
    }
    let mut reach = j_max;
    for _ in 1..n {
        let mut next = vec![0.0f64; grid as usize];
        for (idx, &mass) in pmf.iter().enumerate().take(reach + 1) {
            if mass == 0.0 {
                continue;
            }
            for (&j, &m) in offsets.iter().zip(masses) {
                next[idx + j] += mass * m;
            }
        }
        pmf = next;
        reach += j_max;
    }

    // threshold in index units of the sum lattice
    let t = (gamma - n as f64 * origin) / h;
    let tol = 1e-9 * t.abs().max(1.0);
    let first = match inequality {
        Inequality::Strict => {
            let mut j = t.floor() as i64 + 1;
            if (t - t.round()).abs() <= tol {
                j = t.round() as i64 + 1;
            }
            j
        }
        Inequality::NonStrict => {
            let mut j = t.ceil() as i64;
            if (t - t.round()).abs() <= tol {
                j = t.round() as i64;
            }
            j
        }
    };
    let start = first.max(0) as usize;
    if start >= pmf.len() {
        return Ok(0.0);
    }
    // accumulate the tail from the far end for precision
    let mut p = 0.0;
    for &m in pmf[start..].iter().rev() {
        p += m;
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Multiplicative factor `1 - (1 - 1/N)^n` bounding the conditional Monte
/// Carlo bias on an N-point equal-mass support, relative to
/// `P(S_n > x | max not uniquely attained)`.
pub fn cond_mc_bias_bound(n: u64, support_points: u64) -> f64 {
    if support_points == 0 {
        return 1.0;
    }
    let ln_term = (-1.0 / support_points as f64).ln_1p();
    -(n as f64 * ln_term).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bernoulli_half() -> Dist {
        Dist::lattice(&[0.0, 1.0], &[0.5, 0.5]).unwrap()
    }

    #[test]
    fn crude_trivial_events() {
        let d = Dist::lattice(&[-2.0, -1.0], &[0.5, 0.5]).unwrap();
        let r = crude_mc(&d, 3, 1.0, 500, 7).unwrap();
        assert_eq!(r.estimate, 0.0);
        let d2 = bernoulli_half();
        let r2 = crude_mc(&d2, 3, f64::NEG_INFINITY, 500, 7).unwrap();
        assert_eq!(r2.estimate, 1.0);
        assert_eq!(r2.std_error, 0.0);
    }

    #[test]
    fn crude_matches_enumeration_within_noise() {
        let d = bernoulli_half();
        let r = crude_mc(&d, 2, 1.5, 100_000, 11).unwrap();
        assert!((r.estimate - 0.25).abs() < 3.0 * r.std_error);
    }

    #[test]
    fn ak_with_one_summand_is_exact_sf() {
        let d = Dist::exponential(1.0).unwrap();
        let r = cond_mc_ak(&d, 1, 3.0, 100, 5).unwrap();
        assert!((r.estimate - (-3f64).exp()).abs() < 1e-15);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn ak_on_two_point_lattice_exposes_discrete_bias() {
        // both values of X1 give sf(.) = 0, so the estimator's mean is 0
        // while P(S_2 > 1.5) = 1/4
        let d = bernoulli_half();
        let r = cond_mc_ak(&d, 2, 1.5, 10_000, 3).unwrap();
        assert_eq!(r.estimate, 0.0);
        for x1 in [0.0, 1.0] {
            assert_eq!(ak_replicate_value(&d, 2, 1.5, &[x1]), 0.0);
        }
    }

    #[test]
    fn zero_tilt_weight_is_crude_indicator() {
        // with theta = 0 the tilted law is the base law and the weight
        // collapses to the indicator, replicate by replicate
        let d = Dist::exponential(1.0).unwrap();
        let tilted = d.tilt(0.0).unwrap();
        for j in 0..64 {
            let mut a = child_rng(9, domain::TILTED_IS, j);
            let mut b = child_rng(9, domain::TILTED_IS, j);
            let s_tilted: f64 = (0..5).map(|_| tilted.sample(&mut a)).sum();
            let s_base: f64 = (0..5).map(|_| d.sample(&mut b)).sum();
            assert_eq!(s_tilted, s_base);
            let w = is_replicate_weight(0.0, 0.0, 5, 6.0, s_tilted);
            assert_eq!(w, if s_base > 6.0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn tilted_is_on_lattice_matches_enumeration() {
        let d = bernoulli_half();
        let r = is_tilted_mc(&d, 2, 0.75, 50_000, 21).unwrap();
        assert!((r.estimate - 0.25).abs() < 4.0 * r.std_error + 1e-12);
    }

    #[test]
    fn tilted_is_rejects_heavy_input() {
        let d = Dist::generalized_pareto(0.4).unwrap();
        assert!(matches!(is_tilted_mc(&d, 2, 50.0, 10, 1), Err(Error::NoMgf { .. })));
    }

    #[test]
    fn convolution_counts_two_coin_flips() {
        let l = FiniteLattice::new(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!((exact_convolution(&l, 2, 1.5, Inequality::Strict).unwrap() - 0.25).abs() < 1e-15);
        assert!((exact_convolution(&l, 2, 1.0, Inequality::Strict).unwrap() - 0.25).abs() < 1e-15);
        assert!(
            (exact_convolution(&l, 2, 1.0, Inequality::NonStrict).unwrap() - 0.75).abs() < 1e-15
        );
    }

    #[test]
    fn convolution_rejects_oversized_grids() {
        let points: Vec<f64> = (0..2000).map(|i| i as f64).collect();
        let l = FiniteLattice::equal_mass(&points).unwrap();
        assert!(matches!(
            exact_convolution(&l, 1000, 10.0, Inequality::Strict),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn bias_bound_values() {
        assert!(cond_mc_bias_bound(100, 1_000_000) <= 1e-4);
        assert!((cond_mc_bias_bound(2, 2) - 0.75).abs() < 1e-15);
        assert!(cond_mc_bias_bound(5, u64::MAX) < 1e-15);
    }

    #[test]
    fn results_are_reproducible() {
        let d = Dist::exponential(1.0).unwrap();
        let a = cond_mc_ak(&d, 5, 12.0, 10_000, 123).unwrap();
        let b = cond_mc_ak(&d, 5, 12.0, 10_000, 123).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}
