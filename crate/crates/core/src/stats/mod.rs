//! Sample statistics, normality checks and the Monte Carlo harness.

mod montecarlo;
mod shapiro;

pub use montecarlo::{
    read_samples_csv, run_monte_carlo, write_qq_csv, write_report_csv, write_samples_csv,
    EstimatorReport, Execution, McPlan, McReport, SampleRecord,
};
pub use shapiro::{shapiro_wilk, shapiro_wilk_coefficients, MAX_N, MIN_N};

use crate::error::{Error, Result};
use crate::summation::ExactSum;
use statrs::distribution::ContinuousCDF;

/// Blom plotting position `(i − 3/8)/(n + 1/4)` for 1-based rank `i`.
pub fn blom_position(i: usize, n: usize) -> f64 {
    (i as f64 - 0.375) / (n as f64 + 0.25)
}

/// Sorted sample paired with standard normal quantiles at the Blom positions.
pub fn qq_points(sample: &[f64]) -> Result<Vec<(f64, f64)>> {
    if sample.is_empty() {
        return Err(Error::InsufficientSample { min: 1, got: 0 });
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let norm = shapiro::std_normal();
    let n = x.len();
    Ok(x.into_iter()
        .enumerate()
        .map(|(i, v)| (norm.inverse_cdf(blom_position(i + 1, n)), v))
        .collect())
}

pub fn mean(sample: &[f64]) -> Option<f64> {
    if sample.is_empty() {
        return None;
    }
    let s: ExactSum = sample.iter().copied().collect();
    Some(s.value() / sample.len() as f64)
}

/// Unbiased sample variance; `None` below two points.
pub fn sample_variance(sample: &[f64]) -> Option<f64> {
    let n = sample.len();
    if n < 2 {
        return None;
    }
    let m = mean(sample)?;
    let s: ExactSum = sample.iter().map(|x| (x - m) * (x - m)).collect();
    Some(s.value() / (n - 1) as f64)
}

/// Linearly interpolated quantile (Hyndman–Fan type 7), `q ∈ [0, 1]`.
pub fn quantile(sample: &[f64], q: f64) -> Option<f64> {
    if sample.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let h = (x.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(x[lo] + (h - lo as f64) * (x[hi] - x[lo]))
}
