//! Independent replications of one experiment, summarised per estimator.

use super::{mean, qq_points, quantile, sample_variance, shapiro_wilk};
use crate::asymptotics::limiting_variance;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorAccumulator, EstimatorSpec};
use crate::functionals::Quadrature;
use crate::output::{fmt_f64, fmt_opt};
use crate::rng::replication_seed;
use crate::simulator::{simulate, Observer, SimPlan};
use std::io::{Read, Write};

/// How replications are scheduled. Results never depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    /// Rayon work stealing; runs sequentially without the `parallel` feature.
    Parallel,
    Sequential,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone)]
pub struct McPlan {
    /// Template trajectory; its seed is replaced per replication.
    pub base: SimPlan,
    pub replications: usize,
    pub estimators: Vec<EstimatorSpec>,
    pub seed_base: u64,
    pub quadrature: Quadrature,
}

impl McPlan {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("at least one replication is required"));
        }
        let n = self.base.cfg.n_modes();
        if let Some(s) = self.estimators.iter().find(|s| s.window().n_modes() != n) {
            return Err(Error::InvalidWindow(format!(
                "{} has a window over {} modes, configuration has {n}",
                s.label(),
                s.window().n_modes()
            )));
        }
        self.base.validate()
    }

    /// Modes any estimator window touches; the others need not be simulated.
    fn observed_modes(&self) -> Vec<usize> {
        let mut modes: Vec<usize> = self
            .estimators
            .iter()
            .flat_map(|s| s.window().support())
            .collect();
        modes.sort_unstable();
        modes.dedup();
        modes
    }

    /// The trajectory plan of replication `r`.
    pub fn replication_plan(&self, r: usize) -> SimPlan {
        let mut plan = self.base.clone();
        plan.seed = replication_seed(self.seed_base, r);
        plan.active_modes = Some(self.observed_modes());
        plan
    }

    /// Every estimator evaluated at the horizon of replication `r`;
    /// estimator failures (e.g. a nonpositive denominator) become `None`.
    pub fn run_replication(&self, r: usize) -> Result<Vec<Option<f64>>> {
        let plan = self.replication_plan(r);
        let mut accs = self
            .estimators
            .iter()
            .map(|s| s.accumulator(&plan.cfg, self.quadrature))
            .collect::<Result<Vec<EstimatorAccumulator>>>()?;
        let end = {
            let mut observers: Vec<&mut dyn Observer> =
                accs.iter_mut().map(|a| a as &mut dyn Observer).collect();
            simulate(&plan, &mut observers).map_err(|e| e.in_replication(r))?
        };
        Ok(self
            .estimators
            .iter()
            .zip(&accs)
            .map(|(s, a)| s.evaluate(&plan.params, &plan.cfg, &a.snapshot(end.t)).ok())
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub label: String,
    pub true_value: f64,
    pub horizon: f64,
    /// Estimate of every replication in index order; `None` where it failed.
    pub samples: Vec<Option<f64>>,
    pub mean: Option<f64>,
    /// Sample variance of `√T(θ̂ − θ)`.
    pub var: Option<f64>,
    pub var_theoretical: Option<f64>,
    pub rel_err_max: Option<f64>,
    /// 75th percentile of the relative errors.
    pub rel_err_p75: Option<f64>,
    pub sw_w: Option<f64>,
    pub sw_p: Option<f64>,
}

impl EstimatorReport {
    fn build(spec: &EstimatorSpec, plan: &SimPlan, samples: Vec<Option<f64>>) -> Result<Self> {
        let truth = spec.kind.target(&plan.params);
        let horizon = plan.horizon;
        let valid: Vec<f64> = samples.iter().flatten().copied().collect();
        let scaled = scale(&valid, truth, horizon);
        let rel: Vec<f64> = valid
            .iter()
            .map(|x| (x - truth).abs() / truth.abs())
            .collect();
        let (sw_w, sw_p) = match shapiro_wilk(&scaled) {
            Ok((w, p)) => (Some(w), Some(p)),
            Err(_) => (None, None),
        };
        Ok(Self {
            label: spec.label(),
            true_value: truth,
            horizon,
            mean: mean(&valid),
            var: sample_variance(&scaled),
            var_theoretical: limiting_variance(spec, &plan.params, &plan.cfg)?.map(|v| v.value),
            rel_err_max: rel.iter().copied().reduce(f64::max),
            rel_err_p75: quantile(&rel, 0.75),
            sw_w,
            sw_p,
            samples,
        })
    }

    /// Centered and rescaled estimates `√T(θ̂ − θ)` of the successful replications.
    pub fn scaled_samples(&self) -> Vec<f64> {
        let valid: Vec<f64> = self.samples.iter().flatten().copied().collect();
        scale(&valid, self.true_value, self.horizon)
    }

    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| s.is_none()).count()
    }
}

fn scale(values: &[f64], truth: f64, horizon: f64) -> Vec<f64> {
    let root = horizon.sqrt();
    values.iter().map(|x| root * (x - truth)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub replications: usize,
    pub horizon: f64,
    pub estimators: Vec<EstimatorReport>,
}

/// Runs every replication and aggregates in replication order, so the report
/// is identical whatever the scheduling.
pub fn run_monte_carlo(plan: &McPlan, exec: Execution) -> Result<McReport> {
    plan.validate()?;
    let per_rep: Vec<Result<Vec<Option<f64>>>> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..plan.replications)
                .into_par_iter()
                .map(|r| plan.run_replication(r))
                .collect()
        }
        _ => (0..plan.replications)
            .map(|r| plan.run_replication(r))
            .collect(),
    };
    let mut columns: Vec<Vec<Option<f64>>> =
        vec![Vec::with_capacity(plan.replications); plan.estimators.len()];
    for rep in per_rep {
        for (col, value) in columns.iter_mut().zip(rep?) {
            col.push(value);
        }
    }
    let estimators = plan
        .estimators
        .iter()
        .zip(columns)
        .map(|(spec, samples)| EstimatorReport::build(spec, &plan.base, samples))
        .collect::<Result<Vec<_>>>()?;
    Ok(McReport {
        replications: plan.replications,
        horizon: plan.base.horizon,
        estimators,
    })
}

pub fn write_report_csv<W: Write>(mut sink: W, report: &McReport) -> Result<()> {
    writeln!(
        sink,
        "estimator,mean,var,var_theoretical,rel_err_max,rel_err_p75,sw_w,sw_p"
    )?;
    for e in &report.estimators {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{}",
            e.label,
            fmt_opt(e.mean),
            fmt_opt(e.var),
            fmt_opt(e.var_theoretical),
            fmt_opt(e.rel_err_max),
            fmt_opt(e.rel_err_p75),
            fmt_opt(e.sw_w),
            fmt_opt(e.sw_p),
        )?;
    }
    sink.flush()?;
    Ok(())
}

/// `theoretical,empirical` pairs for a sample.
pub fn write_qq_csv<W: Write>(mut sink: W, sample: &[f64]) -> Result<()> {
    writeln!(sink, "theoretical,empirical")?;
    for (t, e) in qq_points(sample)? {
        writeln!(sink, "{},{}", fmt_f64(t), fmt_f64(e))?;
    }
    sink.flush()?;
    Ok(())
}

/// One row of the persisted raw samples.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SampleRecord {
    pub estimator: String,
    pub replication: usize,
    pub estimate: Option<f64>,
    /// `√T(θ̂ − θ)`.
    pub scaled: Option<f64>,
}

/// Long-format raw samples: `estimator,replication,estimate,scaled`.
pub fn write_samples_csv<W: Write>(mut sink: W, report: &McReport) -> Result<()> {
    writeln!(sink, "estimator,replication,estimate,scaled")?;
    let root = report.horizon.sqrt();
    for e in &report.estimators {
        for (r, s) in e.samples.iter().enumerate() {
            let scaled = s.map(|x| root * (x - e.true_value));
            writeln!(sink, "{},{r},{},{}", e.label, fmt_opt(*s), fmt_opt(scaled))?;
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(source: R) -> Result<Vec<SampleRecord>> {
    let mut reader = csv::Reader::from_reader(source);
    reader
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
