//! Minimum contrast estimators of the damping `a` and the stiffness `b`.
//!
//! Each estimator matches an observed time average to its ergodic limit.
//! With `Q₁ = Σ λ_k z₁ₖ²` and `Q₂ = Σ λ_k z₂ₖ²` those limits are
//! `j1 → Q₁/(4ab)`, `j2 → Q₂/(4a)` and `J_T → Q₁/(4ab) + Q₂/(4a)`.
//! Everything here is a pure function of those scalars.

use crate::error::{Error, Result};
use crate::functionals::{
    ComponentAccumulators, Components, QuadraticAccumulator, Quadrature, Snapshot,
};
use crate::model::{check_mode_index, ModelParams, SpectralConfig, Window};
use crate::output::fmt_opt;
use crate::simulator::{ModeState, Observer};
use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// `a` from the full window, `b` known.
    AbarGeneral,
    /// `b` from the full window, `a` known.
    BbarGeneral,
    /// `a` from the velocity component alone.
    AbarZ2,
    /// `b` from the ratio of the two components; needs neither parameter.
    BbarZ1Z2,
    /// [`EstimatorKind::AbarZ2`] with `z₂ = e_k`.
    AbarK,
    /// [`EstimatorKind::BbarZ1Z2`] with `z₁ = f_j`, `z₂ = e_k`.
    BbarJk,
    /// `b` from the position component, `a` known.
    BbarZ1A,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 7] = [
        EstimatorKind::AbarGeneral,
        EstimatorKind::BbarGeneral,
        EstimatorKind::AbarZ2,
        EstimatorKind::BbarZ1Z2,
        EstimatorKind::AbarK,
        EstimatorKind::BbarJk,
        EstimatorKind::BbarZ1A,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::AbarGeneral => "abar_general",
            EstimatorKind::BbarGeneral => "bbar_general",
            EstimatorKind::AbarZ2 => "abar_z2",
            EstimatorKind::BbarZ1Z2 => "bbar_z1z2",
            EstimatorKind::AbarK => "abar_k",
            EstimatorKind::BbarJk => "bbar_jk",
            EstimatorKind::BbarZ1A => "bbar_z1_a",
        }
    }

    /// Whether the estimator targets `a` (otherwise `b`).
    pub fn estimates_damping(self) -> bool {
        matches!(
            self,
            EstimatorKind::AbarGeneral | EstimatorKind::AbarZ2 | EstimatorKind::AbarK
        )
    }

    /// True value of the estimated parameter.
    pub fn target(self, params: &ModelParams) -> f64 {
        if self.estimates_damping() {
            params.a()
        } else {
            params.b()
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown estimator kind `{s}`")))
    }
}

/// One evaluated estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub kind: EstimatorKind,
    pub window_desc: String,
    pub horizon: f64,
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateObservation(format!(
            "{what} = {x} is not positive"
        )))
    }
}

fn known(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "known {what} must be positive, got {x}"
        )))
    }
}

fn nonzero(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|&x| x != 0.0) {
        Ok(())
    } else {
        Err(Error::InvalidWindow(format!("{what} must be nonzero")))
    }
}

fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::UnstableEstimate(format!(
            "estimate evaluated to {x}"
        )))
    }
}

pub fn abar_general(j_t: f64, w: &Window, cfg: &SpectralConfig, b_known: f64) -> Result<f64> {
    if w.is_zero() {
        return Err(Error::InvalidWindow("window must be nonzero".into()));
    }
    known(b_known, "b")?;
    positive(j_t, "J_T")?;
    let q1 = cfg.q_form(w.z1())?;
    let q2 = cfg.q_form(w.z2())?;
    finite(q1 / (4.0 * b_known * j_t) + q2 / (4.0 * j_t))
}

/// Errors when `4aJ_T ≤ Q₂`, which finite-horizon fluctuations can cause.
pub fn bbar_general(j_t: f64, w: &Window, cfg: &SpectralConfig, a_known: f64) -> Result<f64> {
    nonzero(w.z1(), "z1")?;
    known(a_known, "a")?;
    let q1 = cfg.q_form(w.z1())?;
    let q2 = cfg.q_form(w.z2())?;
    let denom = 4.0 * a_known * j_t - q2;
    if !(denom > 0.0) {
        return Err(Error::UnstableEstimate(format!(
            "denominator 4aJ_T - Q2 = {denom} is not positive"
        )));
    }
    finite(q1 / denom)
}

pub fn abar_z2(j2: f64, z2: &[f64], cfg: &SpectralConfig) -> Result<f64> {
    nonzero(z2, "z2")?;
    positive(j2, "j2")?;
    finite(cfg.q_form(z2)? / (4.0 * j2))
}

/// `λ_k / (4 j2)` with 1-based `k`.
pub fn abar_k(j2: f64, k: usize, cfg: &SpectralConfig) -> Result<f64> {
    check_mode_index(cfg.n_modes(), k)?;
    positive(j2, "j2")?;
    finite(cfg.lambdas()[k - 1] / (4.0 * j2))
}

pub fn bbar_z1z2(j1: f64, j2: f64, z1: &[f64], z2: &[f64], cfg: &SpectralConfig) -> Result<f64> {
    nonzero(z1, "z1")?;
    nonzero(z2, "z2")?;
    positive(j1, "j1")?;
    finite(cfg.q_form(z1)? / cfg.q_form(z2)? * (j2 / j1))
}

/// `(λ_j / λ_k) · (j2 / j1)` with 1-based `j`, `k`.
pub fn bbar_jk(j1: f64, j2: f64, j: usize, k: usize, cfg: &SpectralConfig) -> Result<f64> {
    check_mode_index(cfg.n_modes(), j)?;
    check_mode_index(cfg.n_modes(), k)?;
    positive(j1, "j1")?;
    let l = cfg.lambdas();
    finite(l[j - 1] / l[k - 1] * (j2 / j1))
}

pub fn bbar_z1_a(j1: f64, z1: &[f64], cfg: &SpectralConfig, a_known: f64) -> Result<f64> {
    nonzero(z1, "z1")?;
    known(a_known, "a")?;
    positive(j1, "j1")?;
    finite(cfg.q_form(z1)? / (4.0 * a_known * j1))
}

/// Which window an estimator observes.
#[derive(Debug, Clone, PartialEq)]
pub enum WindowSpec {
    /// 1-based mode indices; the meaning depends on the kind
    /// (`k` for `abar_k`, `(j, k)` for `bbar_jk`, `j` for `bbar_z1_a`).
    Modes {
        j: Option<usize>,
        k: Option<usize>,
    },
    Explicit(Window),
}

/// An estimator kind bound to its window.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    window: Window,
    modes: Option<(Option<usize>, Option<usize>)>,
    name: Option<String>,
}

impl EstimatorSpec {
    /// `ā` on `z₂ = e_k`.
    pub fn abar_k(n_modes: usize, k: usize) -> Result<Self> {
        Self::new(
            n_modes,
            EstimatorKind::AbarK,
            WindowSpec::Modes {
                j: None,
                k: Some(k),
            },
        )
    }

    /// `b̄` on `z₁ = f_j`, `z₂ = e_k`.
    pub fn bbar_jk(n_modes: usize, j: usize, k: usize) -> Result<Self> {
        Self::new(
            n_modes,
            EstimatorKind::BbarJk,
            WindowSpec::Modes {
                j: Some(j),
                k: Some(k),
            },
        )
    }

    /// `b̄` with `a` known on `z₁ = f_j`.
    pub fn bbar_fj_a(n_modes: usize, j: usize) -> Result<Self> {
        Self::new(
            n_modes,
            EstimatorKind::BbarZ1A,
            WindowSpec::Modes {
                j: Some(j),
                k: None,
            },
        )
    }

    /// Validates the window against the kind and builds the spec.
    pub fn new(n_modes: usize, kind: EstimatorKind, spec: WindowSpec) -> Result<Self> {
        use EstimatorKind::*;
        let (window, modes) = match spec {
            WindowSpec::Explicit(w) => {
                if w.n_modes() != n_modes {
                    return Err(Error::InvalidWindow(format!(
                        "window has {} modes, configuration has {n_modes}",
                        w.n_modes()
                    )));
                }
                (w, None)
            }
            WindowSpec::Modes { j, k } => {
                let need = |idx: Option<usize>, name: &str| {
                    idx.ok_or_else(|| {
                        Error::InvalidWindow(format!("{kind} needs mode index `{name}`"))
                    })
                };
                let w = match kind {
                    AbarK | AbarZ2 => Window::e_basis(n_modes, need(k, "k")?)?,
                    BbarJk | BbarZ1Z2 => Window::basis_pair(n_modes, need(j, "j")?, need(k, "k")?)?,
                    BbarZ1A => Window::f_basis(n_modes, need(j, "j")?)?,
                    AbarGeneral | BbarGeneral => {
                        let mut z1 = vec![0.0; n_modes];
                        let mut z2 = vec![0.0; n_modes];
                        if let Some(j) = j {
                            check_mode_index(n_modes, j)?;
                            z1[j - 1] = 1.0;
                        }
                        if let Some(k) = k {
                            check_mode_index(n_modes, k)?;
                            z2[k - 1] = 1.0;
                        }
                        Window::new(z1, z2)?
                    }
                };
                (w, Some((j, k)))
            }
        };
        let ok = match kind {
            AbarGeneral => !window.is_zero(),
            BbarGeneral | BbarZ1A => window.z1_nonzero(),
            AbarZ2 | AbarK => window.z2_nonzero(),
            BbarZ1Z2 | BbarJk => window.z1_nonzero() && window.z2_nonzero(),
        };
        if !ok {
            return Err(Error::InvalidWindow(format!(
                "window components required by {kind} are zero"
            )));
        }
        if matches!(kind, AbarK | BbarJk) && modes.is_none() {
            return Err(Error::InvalidWindow(format!(
                "{kind} takes mode indices, not a window"
            )));
        }
        Ok(Self {
            kind,
            window,
            modes,
            name: None,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// 1-based mode indices for the coordinate kinds.
    pub fn mode_indices(&self) -> Option<(Option<usize>, Option<usize>)> {
        self.modes
    }

    /// Short human-readable window description, e.g. `j=1,k=10`.
    pub fn window_desc(&self) -> String {
        match self.modes {
            Some((j, k)) => {
                let parts: Vec<String> = [("j", j), ("k", k)]
                    .into_iter()
                    .filter_map(|(n, v)| v.map(|v| format!("{n}={v}")))
                    .collect();
                parts.join(",")
            }
            None => "custom".to_string(),
        }
    }

    /// Overrides the generated label. Names must be usable as CSV fields and
    /// file names.
    pub fn with_name(mut self, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let ok = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
        if !ok {
            return Err(Error::invalid(format!(
                "estimator name `{name}` may only use letters, digits, `_`, `-` and `.`"
            )));
        }
        self.name = Some(name);
        Ok(self)
    }

    /// Label safe for CSV fields and file names, e.g. `bbar_jk_j1_k10`.
    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match self.modes {
            Some((j, k)) => {
                let mut s = self.kind.name().to_string();
                for (n, v) in [("j", j), ("k", k)] {
                    if let Some(v) = v {
                        s.push_str(&format!("_{n}{v}"));
                    }
                }
                s
            }
            None => format!("{}_custom", self.kind),
        }
    }

    /// Which time averages the estimator consumes.
    pub fn needs(&self) -> Needs {
        use EstimatorKind::*;
        match self.kind {
            AbarGeneral | BbarGeneral => Needs::Total,
            AbarZ2 | AbarK => Needs::Components(Components {
                j1: false,
                j2: true,
                cross: false,
            }),
            BbarZ1A => Needs::Components(Components {
                j1: true,
                j2: false,
                cross: false,
            }),
            BbarZ1Z2 | BbarJk => Needs::Components(Components {
                j1: true,
                j2: true,
                cross: false,
            }),
        }
    }

    /// Applies the estimator to observed time averages; the known parameter,
    /// when one is required, is taken from `params`.
    pub fn evaluate(
        &self,
        params: &ModelParams,
        cfg: &SpectralConfig,
        obs: &Snapshot,
    ) -> Result<f64> {
        use EstimatorKind::*;
        let missing = |what: &str| Error::DegenerateObservation(format!("{what} not observed"));
        let j1 = || obs.j1.ok_or_else(|| missing("j1"));
        let j2 = || obs.j2.ok_or_else(|| missing("j2"));
        let jt = || obs.j_t.ok_or_else(|| missing("J_T"));
        let w = &self.window;
        match (self.kind, self.modes) {
            (AbarGeneral, _) => abar_general(jt()?, w, cfg, params.b()),
            (BbarGeneral, _) => bbar_general(jt()?, w, cfg, params.a()),
            (AbarK, Some((_, Some(k)))) => abar_k(j2()?, k, cfg),
            (BbarJk, Some((Some(j), Some(k)))) => bbar_jk(j1()?, j2()?, j, k, cfg),
            (AbarZ2 | AbarK, _) => abar_z2(j2()?, w.z2(), cfg),
            (BbarZ1Z2 | BbarJk, _) => bbar_z1z2(j1()?, j2()?, w.z1(), w.z2(), cfg),
            (BbarZ1A, _) => bbar_z1_a(j1()?, w.z1(), cfg, params.a()),
        }
    }

    pub fn estimate(
        &self,
        params: &ModelParams,
        cfg: &SpectralConfig,
        obs: &Snapshot,
        horizon: f64,
    ) -> Result<Estimate> {
        if !(horizon > 0.0) {
            return Err(Error::invalid("horizon must be positive"));
        }
        Ok(Estimate {
            value: self.evaluate(params, cfg, obs)?,
            kind: self.kind,
            window_desc: self.window_desc(),
            horizon,
        })
    }

    /// Streaming accumulator tracking exactly what [`evaluate`](Self::evaluate) reads.
    pub fn accumulator(
        &self,
        cfg: &SpectralConfig,
        rule: Quadrature,
    ) -> Result<EstimatorAccumulator> {
        Ok(match self.needs() {
            Needs::Total => EstimatorAccumulator::Total(QuadraticAccumulator::new(
                cfg,
                self.window.clone(),
                rule,
            )?),
            Needs::Components(c) => EstimatorAccumulator::Components(
                ComponentAccumulators::with_components(cfg, self.window.clone(), rule, c)?,
            ),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    Total,
    Components(Components),
}

/// Observer feeding one estimator.
// Kept unboxed: it lives once per replication and is touched every step.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum EstimatorAccumulator {
    Total(QuadraticAccumulator),
    Components(ComponentAccumulators),
}

impl EstimatorAccumulator {
    pub fn snapshot(&self, t: f64) -> Snapshot {
        match self {
            EstimatorAccumulator::Total(acc) => Snapshot {
                t,
                j1: None,
                j2: None,
                j_t: acc.j_t(),
            },
            EstimatorAccumulator::Components(acc) => Snapshot {
                t,
                j1: acc.j1(),
                j2: acc.j2(),
                j_t: None,
            },
        }
    }
}

impl Observer for EstimatorAccumulator {
    fn start(&mut self, initial: &ModeState, dt: f64) {
        match self {
            EstimatorAccumulator::Total(a) => a.start(initial, dt),
            EstimatorAccumulator::Components(a) => a.start(initial, dt),
        }
    }

    #[inline]
    fn observe(&mut self, state: &ModeState) {
        match self {
            EstimatorAccumulator::Total(a) => a.observe(state),
            EstimatorAccumulator::Components(a) => a.observe(state),
        }
    }
}

/// Estimator value at each snapshot; points where it errors become `None`.
pub fn estimator_time_series(
    snapshots: &[Snapshot],
    spec: &EstimatorSpec,
    params: &ModelParams,
    cfg: &SpectralConfig,
) -> Vec<(f64, Option<f64>)> {
    snapshots
        .iter()
        .map(|s| (s.t, spec.evaluate(params, cfg, s).ok()))
        .collect()
}

/// Writes `t,estimate,kind`; missing estimates leave the field empty.
pub fn write_time_series<W: Write>(
    mut sink: W,
    series: &[(f64, Option<f64>)],
    label: &str,
) -> Result<()> {
    writeln!(sink, "t,estimate,kind")?;
    for &(t, v) in series {
        writeln!(sink, "{},{},{label}", crate::output::fmt_f64(t), fmt_opt(v))?;
    }
    sink.flush()?;
    Ok(())
}
