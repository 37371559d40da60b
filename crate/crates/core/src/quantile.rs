//! Hazen plotting-position quantiles shared by every module that reports
//! P-levels, so reference-class uplifts and simulated risk allowances are read
//! off their curves the same way.

use crate::error::{Error, Result};

/// Checks `0 < p < 1`.
pub fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}

/// Plotting position of the `k`-th (1-based) order statistic out of `n`.
pub fn hazen_position(k: usize, n: usize) -> f64 {
    (k as f64 - 0.5) / n as f64
}

/// Quantile of an ascending slice using plotting positions `(k - 0.5) / n`
/// with linear interpolation between adjacent order statistics. Probabilities
/// below the first or above the last position clamp to the extremes.
///
/// The slice must be nonempty and sorted; `p` must already be validated.
pub fn hazen_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    // 1-based fractional rank: p = (h - 0.5) / n
    let h = n as f64 * p + 0.5;
    if h <= 1.0 {
        return sorted[0];
    }
    if h >= n as f64 {
        return sorted[n - 1];
    }
    let k = h.floor();
    let frac = h - k;
    let lo = sorted[k as usize - 1];
    let hi = sorted[k as usize];
    if frac == 0.0 {
        lo
    } else {
        lo + frac * (hi - lo)
    }
}

/// Share of sorted values `<= x`.
pub fn ecdf_sorted(sorted: &[f64], x: f64) -> f64 {
    let count = sorted.partition_point(|&v| v <= x);
    count as f64 / sorted.len() as f64
}
