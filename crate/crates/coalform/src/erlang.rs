//! Erlang-B blocking for an `m`-server loss system and its inverse in the offered load.

use crate::error::{Error, Result};

/// B(m, a) through the recurrence 1/B(j) = 1 + (j/a)/B(j-1), B(0) = 1.
pub fn blocking_probability(m: u32, a: f64) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("offered load {a} must be finite and ≥ 0")));
    }
    Ok(blocking_unchecked(m, a))
}

pub(crate) fn blocking_unchecked(m: u32, a: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if a == 0.0 {
        return 0.0;
    }
    let mut inv = 1.0f64;
    for j in 1..=m {
        inv = 1.0 + (j as f64 / a) * inv;
        if inv > 1e280 {
            return (-log_inv_blocking(m, a)).exp();
        }
    }
    1.0 / inv
}

/// ln(1/B(m, a)) for a > 0. Runs the plain recurrence and moves to the log
/// domain only once 1/B would overflow, so deep light traffic stays finite.
pub(crate) fn log_inv_blocking(m: u32, a: f64) -> f64 {
    let mut inv = 1.0f64;
    for j in 1..=m {
        let next = 1.0 + (j as f64 / a) * inv;
        if next > 1e280 {
            let mut l = inv.ln();
            for k in j..=m {
                let r = k as f64 / a;
                l = l + r.ln() + (1.0 / (r * l.exp())).ln_1p();
            }
            return l;
        }
        inv = next;
    }
    inv.ln()
}

/// The offered load `a` with B(m, a) = `b_target`.
///
/// Bisection in `a`, bracket grown by doubling. Stops on a relative bracket
/// width of a few ulps, which is tighter than a residual test when the target
/// is tiny.
pub fn inverse_load(m: u32, b_target: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("inverse_load needs at least one server"));
    }
    if !(b_target > 0.0 && b_target < 1.0) {
        return Err(Error::domain(format!("target blocking {b_target} not in (0,1)")));
    }
    Ok(inverse_log(m, -b_target.ln()))
}

/// The load `a` with ln(1/B(m, a)) = `target`, target > 0.
pub(crate) fn inverse_log(m: u32, target: f64) -> f64 {
    // blocking rises with a, so ln(1/B) falls
    let above = |a: f64| log_inv_blocking(m, a) > target;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while above(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    if lo == 0.0 {
        let mut probe = hi;
        loop {
            probe *= 0.5;
            if probe < 1e-300 {
                return probe;
            }
            if above(probe) {
                lo = probe;
                break;
            }
            hi = probe;
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Direct evaluation of (a^m/m!) / Σ_{k≤m} a^k/k!, for cross-checks with moderate m.
pub fn blocking_direct(m: u32, a: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..=m {
        term *= a / k as f64;
        sum += term;
    }
    term / sum
}
