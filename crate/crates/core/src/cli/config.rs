//! TOML run configuration.

use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, EstimatorSpec, WindowSpec};
use crate::functionals::Quadrature;
use crate::model::{
    dirichlet_eigenvalues, paper_lambdas, InitialCondition, ModelParams, SpectralConfig, Window,
};
use crate::simulator::{Scheme, SimPlan};
use crate::stats::McPlan;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    Euler,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureName {
    #[default]
    LeftRiemann,
    Trapezoid,
}

/// `α_n = (nπ)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRule {
    #[serde(rename = "dirichlet_1d")]
    Dirichlet1d,
}

/// `λ_n = 1000/n²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    Paper,
}

/// One `[[estimators]]` entry: a kind plus either mode indices or window vectors.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorEntry {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Position component in the `f_n = e_n/√α_n` basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z1: Option<Vec<f64>>,
    /// Velocity component in the `e_n` basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// The configuration file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_rule: Option<AlphaRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_rule: Option<LambdaRule>,
    pub t_horizon: f64,
    pub dt: f64,
    #[serde(default)]
    pub scheme: SchemeName,
    #[serde(default)]
    pub quadrature: QuadratureName,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_stride")]
    pub stride: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Initial positions; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<Vec<f64>>,
    /// Initial velocities; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<f64>>,
    #[serde(default)]
    pub estimators: Vec<EstimatorEntry>,
}

fn default_replications() -> usize {
    1
}

fn default_stride() -> u64 {
    10_000
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ConfigFile {
    /// The reference experiment: ten Dirichlet modes, `a = 1`,
    /// `b = 0.2`, `T = 1000`, `dt = 10⁻⁴`, 100 replications.
    pub fn reference_preset() -> Self {
        let mode = |kind: &str, j: Option<usize>, k: Option<usize>| EstimatorEntry {
            kind: kind.to_string(),
            j,
            k,
            ..Default::default()
        };
        Self {
            a: 1.0,
            b: 0.2,
            n_modes: Some(10),
            alphas: None,
            alpha_rule: Some(AlphaRule::Dirichlet1d),
            lambdas: None,
            lambda_rule: Some(LambdaRule::Paper),
            t_horizon: 1000.0,
            dt: 1e-4,
            scheme: SchemeName::Euler,
            quadrature: QuadratureName::LeftRiemann,
            seed: 1,
            replications: 100,
            stride: default_stride(),
            out_dir: default_out_dir(),
            u0: None,
            v0: None,
            estimators: vec![
                mode("abar_k", None, Some(1)),
                mode("abar_k", None, Some(10)),
                mode("bbar_jk", Some(1), Some(1)),
                mode("bbar_jk", Some(10), Some(10)),
                mode("bbar_z1_a", Some(1), None),
                mode("bbar_z1_a", Some(10), None),
            ],
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<root>", e.to_string()))
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub cfg: SpectralConfig,
    pub x0: InitialCondition,
    pub horizon: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub quadrature: Quadrature,
    pub seed: u64,
    pub replications: usize,
    pub stride: u64,
    pub estimators: Vec<EstimatorSpec>,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// Trajectory plan for the configured seed; `active_modes` restricts the
    /// simulated modes.
    pub fn sim_plan(&self, active_modes: Option<Vec<usize>>) -> SimPlan {
        SimPlan {
            params: self.params,
            cfg: self.cfg.clone(),
            x0: self.x0.clone(),
            horizon: self.horizon,
            dt: self.dt,
            scheme: self.scheme,
            seed: self.seed,
            active_modes,
        }
    }

    pub fn mc_plan(&self) -> McPlan {
        McPlan {
            base: self.sim_plan(None),
            replications: self.replications,
            estimators: self.estimators.clone(),
            seed_base: self.seed,
            quadrature: self.quadrature,
        }
    }

    /// Modes touched by any configured estimator window (0-based).
    pub fn observed_modes(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self
            .estimators
            .iter()
            .flat_map(|s| s.window().support())
            .collect();
        m.sort_unstable();
        m.dedup();
        m
    }
}

/// Parses and validates a TOML document; errors name the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    validate(read_config_file(text)?)
}

/// Parses a TOML document without validating values.
pub fn read_config_file(text: &str) -> Result<ConfigFile> {
    let de =
        toml::Deserializer::parse(text).map_err(|e| Error::config("<document>", e.to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().message().trim().to_string();
        Error::config(error_key(&path, &message), message)
    })
}

/// Full key path, including the field named by missing/unknown-field errors.
fn error_key(path: &str, message: &str) -> String {
    // Unknown fields already appear in the path; missing ones do not.
    let named = ["missing field `", "unknown field `"]
        .iter()
        .find_map(|p| message.strip_prefix(p))
        .and_then(|rest| rest.split('`').next())
        .filter(|field| !path.ends_with(field));
    match (path, named) {
        (".", Some(field)) => field.to_string(),
        (".", None) => "<root>".to_string(),
        (p, Some(field)) => format!("{p}.{field}"),
        (p, None) => p.to_string(),
    }
}

fn at<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(key, strip_prefix(&other)),
    })
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::InvalidArgument(m) | Error::InvalidWindow(m) => m.clone(),
        other => other.to_string(),
    }
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::config(
            key,
            format!("must be a positive finite number, got {x}"),
        ))
    }
}

pub fn validate(file: ConfigFile) -> Result<RunConfig> {
    let a = positive("a", file.a)?;
    let b = positive("b", file.b)?;
    let params = at("a", ModelParams::new(a, b))?;

    let n_modes = match (file.n_modes, &file.alphas) {
        (Some(0), _) => return Err(Error::config("n_modes", "must be at least 1")),
        (Some(n), Some(al)) if al.len() != n => {
            return Err(Error::config(
                "alphas",
                format!("has {} entries but n_modes = {n}", al.len()),
            ))
        }
        (Some(n), _) => n,
        (None, Some(al)) => al.len(),
        (None, None) => return Err(Error::config("n_modes", "missing (or give `alphas`)")),
    };
    let alphas = match (file.alphas, file.alpha_rule) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "alpha_rule",
                "give either `alphas` or `alpha_rule`, not both",
            ))
        }
        (Some(al), None) => al,
        (None, _) => at("alpha_rule", dirichlet_eigenvalues(n_modes))?,
    };
    let lambdas = match (file.lambdas, file.lambda_rule) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "lambda_rule",
                "give either `lambdas` or `lambda_rule`, not both",
            ))
        }
        (Some(l), None) => {
            if l.len() != n_modes {
                return Err(Error::config(
                    "lambdas",
                    format!("has {} entries but there are {n_modes} modes", l.len()),
                ));
            }
            l
        }
        (None, _) => at("lambda_rule", paper_lambdas(n_modes))?,
    };
    let cfg = at("alphas", SpectralConfig::new(alphas, lambdas))?;

    let horizon = positive("t_horizon", file.t_horizon)?;
    let dt = positive("dt", file.dt)?;
    if dt >= horizon {
        return Err(Error::config(
            "dt",
            format!("must be smaller than t_horizon = {horizon}"),
        ));
    }
    if file.replications == 0 {
        return Err(Error::config("replications", "must be at least 1"));
    }
    if file.stride == 0 {
        return Err(Error::config("stride", "must be at least 1"));
    }
    let ones = || vec![1.0; n_modes];
    let x0 = at(
        "u0",
        InitialCondition::new(file.u0.unwrap_or_else(ones), file.v0.unwrap_or_else(ones)),
    )?;

    let mut estimators = Vec::with_capacity(file.estimators.len());
    let mut labels = HashSet::new();
    for (i, entry) in file.estimators.into_iter().enumerate() {
        let spec = estimator_spec(n_modes, entry, i)?;
        if !labels.insert(spec.label()) {
            return Err(Error::config(
                format!("estimators[{i}]"),
                format!(
                    "duplicate estimator `{}`; set a distinct `name`",
                    spec.label()
                ),
            ));
        }
        estimators.push(spec);
    }

    let plan = SimPlan {
        params,
        cfg: cfg.clone(),
        x0: x0.clone(),
        horizon,
        dt,
        scheme: Scheme::Euler,
        seed: 0,
        active_modes: None,
    };
    at("dt", plan.validate())?;

    Ok(RunConfig {
        params,
        cfg,
        x0,
        horizon,
        dt,
        scheme: match file.scheme {
            SchemeName::Euler => Scheme::Euler,
            SchemeName::Exact => Scheme::Exact,
        },
        quadrature: match file.quadrature {
            QuadratureName::LeftRiemann => Quadrature::LeftRiemann,
            QuadratureName::Trapezoid => Quadrature::Trapezoid,
        },
        seed: file.seed,
        replications: file.replications,
        stride: file.stride,
        estimators,
        out_dir: file.out_dir,
    })
}

fn estimator_spec(n_modes: usize, e: EstimatorEntry, i: usize) -> Result<EstimatorSpec> {
    let key = |field: &str| format!("estimators[{i}].{field}");
    let kind: EstimatorKind = e
        .kind
        .parse()
        .map_err(|err: Error| Error::config(key("kind"), strip_prefix(&err)))?;
    for (field, idx) in [("j", e.j), ("k", e.k)] {
        if let Some(idx) = idx {
            if idx == 0 || idx > n_modes {
                return Err(Error::config(
                    key(field),
                    format!("mode {idx} is outside 1..={n_modes}"),
                ));
            }
        }
    }
    let window = if e.z1.is_some() || e.z2.is_some() {
        if e.j.is_some() || e.k.is_some() {
            return Err(Error::config(
                format!("estimators[{i}]"),
                "give either mode indices (`j`, `k`) or window vectors (`z1`, `z2`)",
            ));
        }
        let z1 = e.z1.unwrap_or_else(|| vec![0.0; n_modes]);
        let z2 = e.z2.unwrap_or_else(|| vec![0.0; n_modes]);
        for (field, v) in [("z1", &z1), ("z2", &z2)] {
            if v.len() != n_modes {
                return Err(Error::config(
                    key(field),
                    format!("has {} entries but there are {n_modes} modes", v.len()),
                ));
            }
        }
        WindowSpec::Explicit(at(&key("z1"), Window::new(z1, z2))?)
    } else {
        WindowSpec::Modes { j: e.j, k: e.k }
    };
    let spec = at(
        &format!("estimators[{i}]"),
        EstimatorSpec::new(n_modes, kind, window),
    )?;
    match e.name {
        Some(name) => at(&key("name"), spec.with_name(name)),
        None => Ok(spec),
    }
}
