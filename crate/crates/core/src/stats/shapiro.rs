//! Shapiro–Wilk normality test using Royston's approximations for the
//! coefficients and the null distribution of `W` (valid for `3 ≤ n ≤ 5000`).

use crate::error::{Error, Result};
use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::PI;

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

pub const MIN_N: usize = 3;
pub const MAX_N: usize = 5000;

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

pub(crate) fn std_normal() -> Normal {
    Normal::standard()
}

/// Weights of the upper half of the order statistics, largest first, for a
/// sample of size `n ≥ 3`.
pub fn shapiro_wilk_coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![0.5_f64.sqrt()];
    }
    let norm = std_normal();
    let an25 = n as f64 + 0.25;
    let m: Vec<f64> = (1..=half)
        .map(|i| norm.inverse_cdf((i as f64 - 0.375) / an25))
        .collect();
    let summ2 = 2.0 * m.iter().map(|x| x * x).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / (n as f64).sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;
    let mut a = vec![0.0; half];
    a[0] = a1;
    let (first, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        a[1] = a2;
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        (2, fac)
    } else {
        (
            1,
            ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt(),
        )
    };
    for i in first..half {
        a[i] = -m[i] / fac;
    }
    a
}

/// Returns `(W, p)`. Small `p` is evidence against normality.
pub fn shapiro_wilk(sample: &[f64]) -> Result<(f64, f64)> {
    let n = sample.len();
    if n < MIN_N {
        return Err(Error::InsufficientSample { min: MIN_N, got: n });
    }
    if n > MAX_N {
        return Err(Error::invalid(format!(
            "Shapiro-Wilk approximation is valid up to {MAX_N} points, got {n}"
        )));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("sample contains non-finite values"));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if !(range > 1e-19 * x[0].abs().max(x[n - 1].abs()).max(1.0)) {
        return Err(Error::DegenerateObservation(
            "all sample values are identical".into(),
        ));
    }
    // Scaling by the range keeps the sums well conditioned.
    for v in &mut x {
        *v /= range;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let a = shapiro_wilk_coefficients(n);
    let num: f64 = a
        .iter()
        .enumerate()
        .map(|(i, ai)| ai * (x[n - 1 - i] - x[i]))
        .sum();
    let w = (num * num / ss).min(1.0);

    if n == 3 {
        let p = (6.0 / PI) * (w.max(0.75).sqrt().asin() - PI / 3.0);
        return Ok((w, p.clamp(0.0, 1.0)));
    }
    let w1 = 1.0 - w;
    if w1 <= 0.0 {
        return Ok((w, 1.0));
    }
    let mut y = w1.ln();
    let an = n as f64;
    let (m, s) = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return Ok((w, 1e-99));
        }
        y = -(gamma - y).ln();
        (poly(&C3, an), poly(&C4, an).exp())
    } else {
        let ln_n = an.ln();
        (poly(&C5, ln_n), poly(&C6, ln_n).exp())
    };
    let p = 1.0 - std_normal().cdf((y - m) / s);
    Ok((w, p.clamp(0.0, 1.0)))
}
