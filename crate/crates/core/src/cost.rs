//! Assembly-cost model and radix selection.
//!
//! Assembling a ciphertext for `x` costs `digitsum(x) - 1` additions, so
//! the worst case over `[0, m]` is governed by the all-(r-1) digit
//! string. With `k = floor(log_r m)` the model is
//!
//! `f(r) = (r - 1) * log_r(m + 1) - 1`
//!
//! which at `m = r^(k+1) - 1` equals `(r - 1)(k + 1) - 1` exactly. The
//! sign of `df/dr` matches the sign of `g(r) = r ln r - r + 1`, which is
//! positive for every `r >= 2`, so the model is increasing in the radix
//! and the smallest radix wins: binary decomposition minimizes worst-case
//! additions regardless of the plaintext bound. `measured_cost` verifies
//! the model by brute force on small ranges.

use std::io::{self, Write};
use std::ops::RangeInclusive;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::cache::floor_log;
use crate::error::{Error, Result};

/// Exhaustive scans are refused above this bound (just past 16^6, the
/// largest range the verification grid needs).
pub const SCAN_BUDGET: u128 = 1 << 24;

/// Worst-case additions predicted by the model, `(r-1) log_r(m+1) - 1`.
/// Requires `radix >= 2` and `m >= 1`.
pub fn predicted_cost(radix: u32, m: u128) -> f64 {
    assert!(radix >= 2, "radix must be at least 2");
    assert!(m >= 1, "plaintext bound must be at least 1");
    let r = radix as f64;
    (r - 1.0) * ((m as f64) + 1.0).ln() / r.ln() - 1.0
}

fn digit_sum(mut x: u64, radix: u64) -> u64 {
    let mut sum = 0;
    while x > 0 {
        sum += x % radix;
        x /= radix;
    }
    sum
}

/// Worst-case additions found by scanning every value in `[0, m]`.
/// Refuses ranges beyond [`SCAN_BUDGET`].
pub fn measured_cost(radix: u32, m: u128) -> Result<u64> {
    assert!(radix >= 2, "radix must be at least 2");
    if m > SCAN_BUDGET {
        return Err(Error::ScanBudget {
            m,
            budget: SCAN_BUDGET,
        });
    }
    let m = m as u64;
    let r = u64::from(radix);
    #[cfg(feature = "parallel")]
    let worst = (1..=m).into_par_iter().map(|x| digit_sum(x, r)).max();
    #[cfg(not(feature = "parallel"))]
    let worst = (1..=m).map(|x| digit_sum(x, r)).max();
    Ok(worst.map_or(0, |sum| sum - 1))
}

/// `g(r) = r ln r - r + 1`; its sign is the sign of the model's
/// derivative in the radix.
pub fn derivative_factor(r: f64) -> f64 {
    r * r.ln() - r + 1.0
}

/// Radix in `radixes` minimizing the predicted worst-case cost for
/// bound `m`, smallest radix winning ties.
pub fn optimal_radix(m: u128, radixes: RangeInclusive<u32>) -> u32 {
    assert!(*radixes.start() >= 2, "radixes must start at 2 or above");
    assert!(!radixes.is_empty(), "radix range must be nonempty");
    let mut best = *radixes.start();
    let mut best_cost = predicted_cost(best, m);
    for r in radixes {
        let cost = predicted_cost(r, m);
        if cost < best_cost {
            best = r;
            best_cost = cost;
        }
    }
    best
}

/// True if the predicted cost is non-decreasing in the radix over
/// `[2, r_max]` for the given bound.
pub fn monotonicity_check(m: u128, r_max: u32) -> bool {
    (2..r_max).all(|r| predicted_cost(r + 1, m) + 1e-9 >= predicted_cost(r, m))
}

/// One row of a radix comparison for a fixed plaintext bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RadixCostProfile {
    pub radix: u32,
    /// Highest power index a cache at this radix would hold.
    pub top_index: u32,
    pub predicted: f64,
    /// Brute-force worst case; absent when the range exceeds the scan
    /// budget.
    pub measured: Option<u64>,
}

/// Profiles every radix in the range against the bound `m`.
pub fn cost_table(m: u128, radixes: RangeInclusive<u32>) -> Vec<RadixCostProfile> {
    assert!(*radixes.start() >= 2, "radixes must start at 2 or above");
    radixes
        .map(|radix| RadixCostProfile {
            radix,
            top_index: floor_log(radix, m),
            predicted: predicted_cost(radix, m),
            measured: measured_cost(radix, m).ok(),
        })
        .collect()
}

pub fn write_cost_csv<W: Write>(w: &mut W, rows: &[RadixCostProfile]) -> io::Result<()> {
    writeln!(w, "radix,top_index,predicted_cost,measured_cost")?;
    for row in rows {
        let measured = row
            .measured
            .map_or(String::new(), |v| v.to_string());
        writeln!(
            w,
            "{},{},{:.6},{}",
            row.radix, row.top_index, row.predicted, measured
        )?;
    }
    Ok(())
}
