//! Limiting variances of `√T(θ̂_T − θ)` for the estimators with a central
//! limit theorem.
//!
//! The double series run over the modes of the configuration. Windows live in
//! those modes, so the truncation is exact. Terms are summed row-major into an
//! [`ExactSum`], which makes the result independent of platform and order.

use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, EstimatorSpec};
use crate::model::{d_denominator, ModelParams, SpectralConfig};
use crate::summation::ExactSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitingVariance {
    pub value: f64,
    pub kind: EstimatorKind,
    pub truncation_n: usize,
}

fn require_nonzero(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|&x| x != 0.0) {
        Ok(())
    } else {
        Err(Error::InvalidWindow(format!("{what} must be nonzero")))
    }
}

fn support(vs: &[&[f64]]) -> Vec<usize> {
    let n = vs[0].len();
    (0..n).filter(|&i| vs.iter().any(|v| v[i] != 0.0)).collect()
}

/// How the summand of the variance double series is indexed. Both orders give
/// the same value because every kernel is symmetric in `(k, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Summand {
    #[default]
    Direct,
    Transposed,
}

/// `Σ_k Σ_n term(k, n)` over `idx × idx`, row-major.
fn double_sum(idx: &[usize], order: Summand, term: impl Fn(usize, usize) -> f64) -> f64 {
    let mut acc = ExactSum::new();
    for &k in idx {
        for &n in idx {
            acc.add(match order {
                Summand::Direct => term(k, n),
                Summand::Transposed => term(n, k),
            });
        }
    }
    acc.value()
}

pub fn var_abar(params: &ModelParams, cfg: &SpectralConfig, z2: &[f64]) -> Result<f64> {
    var_abar_with(params, cfg, z2, Summand::Direct)
}

pub fn var_abar_with(
    params: &ModelParams,
    cfg: &SpectralConfig,
    z2: &[f64],
    order: Summand,
) -> Result<f64> {
    require_nonzero(z2, "z2")?;
    let q2 = cfg.q_form(z2)?;
    let (al, la, a) = (cfg.alphas(), cfg.lambdas(), params.a());
    let s = double_sum(&support(&[z2]), order, |k, n| {
        la[k] * la[n] * (al[k] + al[n]) * z2[k] * z2[k] * z2[n] * z2[n]
            / d_denominator(params, al[k], al[n])
    });
    Ok(8.0 * a.powi(3) / (q2 * q2) * s)
}

pub fn var_bbar_z1z2(
    params: &ModelParams,
    cfg: &SpectralConfig,
    z1: &[f64],
    z2: &[f64],
) -> Result<f64> {
    var_bbar_z1z2_with(params, cfg, z1, z2, Summand::Direct)
}

pub fn var_bbar_z1z2_with(
    params: &ModelParams,
    cfg: &SpectralConfig,
    z1: &[f64],
    z2: &[f64],
    order: Summand,
) -> Result<f64> {
    require_nonzero(z1, "z1")?;
    require_nonzero(z2, "z2")?;
    let q1 = cfg.q_form(z1)?;
    let q2 = cfg.q_form(z2)?;
    let (al, la, a, b) = (cfg.alphas(), cfg.lambdas(), params.a(), params.b());
    let idx = support(&[z1, z2]);
    let position = double_sum(&idx, order, |k, n| {
        la[k] * la[n] * z1[k] * z1[k] * z1[n] * z1[n] / d_denominator(params, al[k], al[n])
    });
    let mixed = double_sum(&idx, order, |k, n| {
        let (rk, rn) = (al[k].sqrt(), al[n].sqrt());
        let vel = q1 * z2[k] * z2[n];
        let pos = q2 * z1[k] * z1[n];
        let first = vel * rk - pos * rn;
        let second = vel * rn - pos * rk;
        la[k] * la[n] / d_denominator(params, al[k], al[n]) * (first * first + second * second)
    });
    Ok(64.0 * a.powi(3) * b / (q1 * q1) * position + 8.0 * a * b * b / (q1 * q1 * q2 * q2) * mixed)
}

pub fn var_bbar_z1_a(params: &ModelParams, cfg: &SpectralConfig, z1: &[f64]) -> Result<f64> {
    var_bbar_z1_a_with(params, cfg, z1, Summand::Direct)
}

pub fn var_bbar_z1_a_with(
    params: &ModelParams,
    cfg: &SpectralConfig,
    z1: &[f64],
    order: Summand,
) -> Result<f64> {
    require_nonzero(z1, "z1")?;
    let q1 = cfg.q_form(z1)?;
    let (al, la, a, b) = (cfg.alphas(), cfg.lambdas(), params.a(), params.b());
    let idx = support(&[z1]);
    let weight = |k: usize, n: usize| {
        la[k] * la[n] * z1[k] * z1[k] * z1[n] * z1[n] / d_denominator(params, al[k], al[n])
    };
    let plain = double_sum(&idx, order, weight);
    let scaled = double_sum(&idx, order, |k, n| (al[k] + al[n]) * weight(k, n));
    Ok(64.0 * a.powi(3) * b / (q1 * q1) * plain + 8.0 * a * b * b / (q1 * q1) * scaled)
}

/// Closed forms for coordinate windows: `a` for `abar_k`;
/// `4ab/α_j + 2b²/a` for `bbar_jk` with `j ≠ k` and `4ab/α_j` with `j = k`;
/// `4ab/α_j + b²/a` for `bbar_z1_a` on `f_j`.
pub fn closed_form_variance(
    kind: EstimatorKind,
    params: &ModelParams,
    alpha_j: f64,
    same_mode: bool,
) -> Result<f64> {
    if !(alpha_j > 0.0 && alpha_j.is_finite()) {
        return Err(Error::invalid("alpha_j must be positive"));
    }
    let (a, b) = (params.a(), params.b());
    let position = 4.0 * a * b / alpha_j;
    match kind {
        EstimatorKind::AbarK => Ok(a),
        EstimatorKind::BbarJk if same_mode => Ok(position),
        EstimatorKind::BbarJk => Ok(position + 2.0 * b * b / a),
        EstimatorKind::BbarZ1A => Ok(position + b * b / a),
        other => Err(Error::invalid(format!("no closed form for {other}"))),
    }
}

/// Limiting variance for an estimator spec; `None` for the general-window
/// estimators, which have no established limit law.
pub fn limiting_variance(
    spec: &EstimatorSpec,
    params: &ModelParams,
    cfg: &SpectralConfig,
) -> Result<Option<LimitingVariance>> {
    let w = spec.window();
    let value = match spec.kind {
        EstimatorKind::AbarGeneral | EstimatorKind::BbarGeneral => return Ok(None),
        EstimatorKind::AbarZ2 | EstimatorKind::AbarK => var_abar(params, cfg, w.z2())?,
        EstimatorKind::BbarZ1Z2 | EstimatorKind::BbarJk => {
            var_bbar_z1z2(params, cfg, w.z1(), w.z2())?
        }
        EstimatorKind::BbarZ1A => var_bbar_z1_a(params, cfg, w.z1())?,
    };
    Ok(Some(LimitingVariance {
        value,
        kind: spec.kind,
        truncation_n: cfg.n_modes(),
    }))
}
