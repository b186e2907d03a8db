//! Descriptive statistics used by the replication harness.

use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("cannot summarise an empty sample")]
pub struct EmptySample;

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson correlation; `None` when either input has zero variance or fewer than two values.
pub fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / libm::sqrt(saa * sbb))
}

/// Percentile `p` (0..=100) of an ascending sample, interpolating linearly at
/// index `h = (k - 1) * p / 100`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p / 100.0;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median with 2.5 and 97.5 centile simulation limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary, EmptySample> {
    if values.is_empty() {
        return Err(EmptySample);
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Summary {
        median: percentile_sorted(&sorted, 50.0),
        lower: percentile_sorted(&sorted, 2.5),
        upper: percentile_sorted(&sorted, 97.5),
    })
}
