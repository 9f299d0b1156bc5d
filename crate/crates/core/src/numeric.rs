//! Shared numerical routines: adaptive quadrature, bracketed root finding
//! and golden-section search.

/// Adaptive Simpson quadrature of `f` over the finite interval `[a, b]`.
///
/// Recursion stops when the local Richardson error estimate drops below
/// `tol` (scaled by interval share), the depth cap is hit, or the
/// per-call evaluation budget runs out (pathological integrands return a
/// best-effort value instead of hanging).
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut budget: u32 = 200_000;
    adaptive(f, a, b, fa, fm, fb, whole, tol, 50, &mut budget)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if depth == 0 || *budget == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    *budget = budget.saturating_sub(2);
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget)
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget)
}

/// Quadrature over a possibly unbounded interval.
///
/// Infinite endpoints are mapped to (0, 1) with the rational substitutions
/// `x = a + t/(1-t)` and `x = b - t/(1-t)`; a doubly infinite domain is
/// split at zero. The integrand is assumed to decay at infinity.
pub fn integrate_unbounded(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate(f, a, b, tol),
        (true, false) => {
            let g = move |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - t;
                let x = a + t / s;
                let v = f(x) / (s * s);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            integrate(&g, 0.0, 1.0, tol)
        }
        (false, true) => {
            let g = move |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - t;
                let x = b - t / s;
                let v = f(x) / (s * s);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            };
            integrate(&g, 0.0, 1.0, tol)
        }
        (false, false) => {
            integrate_unbounded(f, 0.0, f64::INFINITY, 0.5 * tol)
                + integrate_unbounded(f, f64::NEG_INFINITY, 0.0, 0.5 * tol)
        }
    }
}

/// Bisection for the root of an increasing function `f` on `[lo, hi]`.
///
/// Requires `f(lo) <= 0 <= f(hi)`. Returns the midpoint once the bracket
/// is below `xtol` or the residual below `ftol`.
pub fn bisect_increasing(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64, ftol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs() <= ftol || (hi - lo) <= xtol * (1.0 + mid.abs()) {
            return mid;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
pub fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (hi - lo).abs() <= xtol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF via the complementary error function.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal survival function, accurate deep in the tail.
pub fn norm_sf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile: inverse complementary error function seed
/// polished by two Newton steps on the cdf.
pub fn norm_quantile(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut z = -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p);
    for _ in 0..2 {
        let d = norm_pdf(z);
        if d == 0.0 {
            break;
        }
        // residual through the tail-accurate branch
        let r = if z > 0.0 { norm_sf(z) - (1.0 - p) } else { norm_cdf(z) - p };
        z -= if z > 0.0 { -r / d } else { r / d };
    }
    z
}

/// Stable `ln(sum_i w_i * exp(v_i))` for paired slices.
pub fn log_sum_exp_weighted(values: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    let m = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&v, _)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| w * (v - m).exp())
        .sum();
    m + s.ln()
}
