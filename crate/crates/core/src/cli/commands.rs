//! Subcommand implementations. Each writes its artifacts under the configured
//! output directory and a short summary to `out`.

use super::config::RunConfig;
use crate::asymptotics::limiting_variance;
use crate::error::{Error, Result};
use crate::estimators::{estimator_time_series, write_time_series};
use crate::functionals::SnapshotRecorder;
use crate::simulator::{simulate, Observer, TrajectoryCsv};
use crate::stats::{
    read_samples_csv, run_monte_carlo, write_qq_csv, write_report_csv, write_samples_csv,
    Execution, McReport,
};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let file = File::create(&path)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn require_estimators(rc: &RunConfig) -> Result<()> {
    if rc.estimators.is_empty() {
        Err(Error::config("estimators", "no estimators configured"))
    } else {
        Ok(())
    }
}

fn qq_file_name(label: &str) -> Result<String> {
    let safe = !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if safe {
        Ok(format!("qq_{label}.csv"))
    } else {
        Err(Error::invalid(format!(
            "estimator label `{label}` is not a safe file name"
        )))
    }
}

/// Full trajectory every `stride` steps to `trajectory.csv`.
pub fn cmd_simulate(rc: &RunConfig, out: &mut dyn Write) -> Result<PathBuf> {
    let path = rc.out_dir.join("trajectory.csv");
    let mut csv = TrajectoryCsv::new(
        create(&rc.out_dir, "trajectory.csv")?,
        rc.cfg.n_modes(),
        rc.stride,
    )?;
    simulate(&rc.sim_plan(None), &mut [&mut csv])?;
    csv.finish()?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(path)
}

/// One trajectory; writes `estimate_<label>.csv` for every estimator and
/// returns the final estimates.
pub fn cmd_estimate(rc: &RunConfig, out: &mut dyn Write) -> Result<Vec<(String, Option<f64>)>> {
    require_estimators(rc)?;
    let mut recorders = rc
        .estimators
        .iter()
        .map(|s| SnapshotRecorder::new(&rc.cfg, s.window().clone(), rc.quadrature, rc.stride))
        .collect::<Result<Vec<_>>>()?;
    {
        let mut observers: Vec<&mut dyn Observer> = recorders
            .iter_mut()
            .map(|r| r as &mut dyn Observer)
            .collect();
        simulate(&rc.sim_plan(Some(rc.observed_modes())), &mut observers)?;
    }
    let mut finals = Vec::with_capacity(recorders.len());
    for (spec, rec) in rc.estimators.iter().zip(recorders) {
        let series = estimator_time_series(&rec.finish(), spec, &rc.params, &rc.cfg);
        let label = spec.label();
        write_time_series(
            create(&rc.out_dir, &format!("estimate_{label}.csv"))?,
            &series,
            &label,
        )?;
        let last = series.last().and_then(|(_, v)| *v);
        match last {
            Some(v) => writeln!(out, "{label:<22} {v:.4}")?,
            None => writeln!(out, "{label:<22} n/a")?,
        }
        finals.push((label, last));
    }
    Ok(finals)
}

/// Theoretical limiting variances, printed to four decimals.
pub fn cmd_variance(rc: &RunConfig, out: &mut dyn Write) -> Result<Vec<(String, Option<f64>)>> {
    let mut rows = Vec::with_capacity(rc.estimators.len());
    for spec in &rc.estimators {
        let v = limiting_variance(spec, &rc.params, &rc.cfg)?.map(|v| v.value);
        let label = spec.label();
        match v {
            Some(v) => writeln!(out, "{label:<22} {v:.4}")?,
            None => writeln!(out, "{label:<22} n/a")?,
        }
        rows.push((label, v));
    }
    Ok(rows)
}

/// Replicated experiment; writes `report.csv`, `samples.csv` and one Q–Q file
/// per estimator.
pub fn cmd_montecarlo(rc: &RunConfig, exec: Execution, out: &mut dyn Write) -> Result<McReport> {
    require_estimators(rc)?;
    let report = run_monte_carlo(&rc.mc_plan(), exec)?;
    write_report_csv(create(&rc.out_dir, "report.csv")?, &report)?;
    write_samples_csv(create(&rc.out_dir, "samples.csv")?, &report)?;
    for e in &report.estimators {
        let scaled = e.scaled_samples();
        if !scaled.is_empty() {
            write_qq_csv(create(&rc.out_dir, &qq_file_name(&e.label)?)?, &scaled)?;
        }
    }
    let show = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    writeln!(
        out,
        "{:<22} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "estimator", "mean", "var", "theory", "err_max", "err_p75", "sw_p"
    )?;
    for e in &report.estimators {
        writeln!(
            out,
            "{:<22} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            e.label,
            show(e.mean),
            show(e.var),
            show(e.var_theoretical),
            show(e.rel_err_max),
            show(e.rel_err_p75),
            show(e.sw_p),
        )?;
        if e.failures() > 0 {
            writeln!(out, "  {} replications produced no estimate", e.failures())?;
        }
    }
    Ok(report)
}

/// Rebuilds the Q–Q files from a persisted `samples.csv`.
pub fn cmd_qq(rc: &RunConfig, out: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let path = rc.out_dir.join("samples.csv");
    let file =
        File::open(&path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    let rows = read_samples_csv(file)?;
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for row in rows {
        let idx = match groups.iter().position(|(l, _)| *l == row.estimator) {
            Some(i) => i,
            None => {
                groups.push((row.estimator.clone(), Vec::new()));
                groups.len() - 1
            }
        };
        if let Some(s) = row.scaled {
            groups[idx].1.push(s);
        }
    }
    let mut written = Vec::new();
    for (label, sample) in groups.iter().filter(|(_, s)| !s.is_empty()) {
        let name = qq_file_name(label)?;
        write_qq_csv(create(&rc.out_dir, &name)?, sample)?;
        let p = rc.out_dir.join(name);
        writeln!(out, "wrote {}", p.display())?;
        written.push(p);
    }
    Ok(written)
}
