//! Streaming time averages of quadratic window functionals.
//!
//! All accumulators are observers of a trajectory and mergeable over adjacent
//! time spans. Integrals are kept as exact sums so a merged accumulator
//! reproduces the single-pass value bit for bit.

use crate::error::{Error, Result};
use crate::model::{SpectralConfig, Window};
use crate::simulator::{ModeState, Observer};
use crate::summation::{ExactSum, FixedSum};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Quadrature {
    /// Each step contributes the pre-step value times `dt`.
    #[default]
    LeftRiemann,
    /// Each step contributes the mean of both endpoint values times `dt`.
    Trapezoid,
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quadrature::LeftRiemann => "left_riemann",
            Quadrature::Trapezoid => "trapezoid",
        })
    }
}

/// Total time as exact `count · dt` runs.
#[derive(Debug, Clone, Default, PartialEq)]
struct Elapsed {
    runs: Vec<(f64, u64)>,
}

impl Elapsed {
    #[inline]
    fn push(&mut self, dt: f64) {
        match self.runs.last_mut() {
            Some((d, c)) if *d == dt => *c += 1,
            _ => self.runs.push((dt, 1)),
        }
    }

    fn merge(&mut self, other: &Elapsed) {
        for &(dt, count) in &other.runs {
            match self.runs.last_mut() {
                Some((d, c)) if *d == dt => *c += count,
                _ => self.runs.push((dt, count)),
            }
        }
    }

    fn value(&self) -> f64 {
        let mut s = ExactSum::new();
        for &(dt, count) in &self.runs {
            let n = count as f64;
            let hi = n * dt;
            s.add(hi);
            s.add(n.mul_add(dt, -hi));
        }
        s.value()
    }
}

/// Running `(1/t) ∫₀ᵗ f(s) ds` of a scalar integrand sampled once per step.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeAverage {
    rule: Quadrature,
    integral: FixedSum,
    elapsed: Elapsed,
    first: Option<f64>,
    last: Option<f64>,
}

impl TimeAverage {
    pub fn new(rule: Quadrature) -> Self {
        Self {
            rule,
            integral: FixedSum::new(),
            elapsed: Elapsed::default(),
            first: None,
            last: None,
        }
    }

    pub fn rule(&self) -> Quadrature {
        self.rule
    }

    /// Sets the integrand value at the start of the span.
    pub fn start(&mut self, value: f64) {
        self.first = Some(value);
        self.last = Some(value);
    }

    /// Advances by `dt`; `value` is the integrand at the end of the step.
    ///
    /// A push without a preceding [`start`](Self::start) only records the value.
    #[inline]
    pub fn push(&mut self, value: f64, dt: f64) {
        let Some(prev) = self.last else {
            self.start(value);
            return;
        };
        let contribution = match self.rule {
            Quadrature::LeftRiemann => prev * dt,
            Quadrature::Trapezoid => 0.5 * (prev + value) * dt,
        };
        self.integral.add(contribution);
        self.elapsed.push(dt);
        self.last = Some(value);
    }

    pub fn integral(&self) -> f64 {
        self.integral.value()
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed.value()
    }

    /// `None` until time has elapsed.
    pub fn average(&self) -> Option<f64> {
        let t = self.elapsed();
        (t > 0.0).then(|| self.integral() / t)
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_none()
    }

    /// Appends `next`, which must start where `self` ends.
    pub fn merge(&mut self, next: &TimeAverage) -> Result<()> {
        if self.rule != next.rule {
            return Err(Error::invalid(
                "cannot merge averages with different quadrature",
            ));
        }
        if next.is_empty() {
            return Ok(());
        }
        if self.is_empty() {
            *self = next.clone();
            return Ok(());
        }
        if self.last.map(f64::to_bits) != next.first.map(f64::to_bits) {
            return Err(Error::invalid(
                "spans are not adjacent: end value differs from next start value",
            ));
        }
        self.integral.merge(&next.integral);
        self.elapsed.merge(&next.elapsed);
        self.last = next.last;
        Ok(())
    }
}

/// `(⟨X₁, z₁⟩_{Dom((−A)^{1/2})}, ⟨X₂, z₂⟩_{L²})` for a state and window.
pub fn inner_products(state: &ModeState, cfg: &SpectralConfig, w: &Window) -> Result<(f64, f64)> {
    cfg.check_len(w.z1(), "window")?;
    cfg.check_len(&state.u, "state")?;
    let first = cfg
        .alphas()
        .iter()
        .zip(&state.u)
        .zip(w.z1())
        .map(|((a, u), z)| a.sqrt() * u * z)
        .sum();
    let second = state.v.iter().zip(w.z2()).map(|(v, z)| v * z).sum();
    Ok((first, second))
}

/// Sparse linear functional `Σ cu_k u_k + cv_k v_k` over the window support.
#[derive(Debug, Clone, PartialEq)]
struct Probe {
    idx: Vec<usize>,
    cu: Vec<f64>,
    cv: Vec<f64>,
}

impl Probe {
    fn position(cfg: &SpectralConfig, z1: &[f64]) -> Self {
        let idx: Vec<usize> = (0..z1.len()).filter(|&i| z1[i] != 0.0).collect();
        let cu = idx
            .iter()
            .map(|&i| cfg.alphas()[i].sqrt() * z1[i])
            .collect();
        let cv = vec![0.0; idx.len()];
        Self { idx, cu, cv }
    }

    fn velocity(z2: &[f64]) -> Self {
        let idx: Vec<usize> = (0..z2.len()).filter(|&i| z2[i] != 0.0).collect();
        let cv = idx.iter().map(|&i| z2[i]).collect();
        let cu = vec![0.0; idx.len()];
        Self { idx, cu, cv }
    }

    fn full(cfg: &SpectralConfig, w: &Window) -> Self {
        let idx = w.support();
        let cu = idx
            .iter()
            .map(|&i| cfg.alphas()[i].sqrt() * w.z1()[i])
            .collect();
        let cv = idx.iter().map(|&i| w.z2()[i]).collect();
        Self { idx, cu, cv }
    }

    #[inline]
    fn eval(&self, s: &ModeState) -> f64 {
        let mut acc = 0.0;
        for ((&i, cu), cv) in self.idx.iter().zip(&self.cu).zip(&self.cv) {
            acc += cu * s.u[i] + cv * s.v[i];
        }
        acc
    }
}

/// `J_t = (1/t) ∫₀ᵗ ⟨X(s), z⟩_V² ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticAccumulator {
    window: Window,
    probe: Probe,
    avg: TimeAverage,
    dt: f64,
}

impl QuadraticAccumulator {
    pub fn new(cfg: &SpectralConfig, window: Window, rule: Quadrature) -> Result<Self> {
        cfg.check_len(window.z1(), "window")?;
        let probe = Probe::full(cfg, &window);
        Ok(Self {
            window,
            probe,
            avg: TimeAverage::new(rule),
            dt: 0.0,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn start_at(&mut self, state: &ModeState) {
        let p = self.probe.eval(state);
        self.avg.start(p * p);
    }

    #[inline]
    pub fn accumulate_step(&mut self, state: &ModeState, dt: f64) {
        let p = self.probe.eval(state);
        self.avg.push(p * p, dt);
    }

    /// `∫₀ᵗ ⟨X, z⟩² ds` so far.
    pub fn running_integral(&self) -> f64 {
        self.avg.integral()
    }

    pub fn elapsed(&self) -> f64 {
        self.avg.elapsed()
    }

    pub fn j_t(&self) -> Option<f64> {
        self.avg.average()
    }

    pub fn merge(&mut self, next: &QuadraticAccumulator) -> Result<()> {
        if self.window != next.window {
            return Err(Error::invalid(
                "cannot merge accumulators over different windows",
            ));
        }
        self.avg.merge(&next.avg)
    }
}

impl Observer for QuadraticAccumulator {
    fn start(&mut self, initial: &ModeState, dt: f64) {
        self.dt = dt;
        self.start_at(initial);
    }

    #[inline]
    fn observe(&mut self, state: &ModeState) {
        self.accumulate_step(state, self.dt);
    }
}

/// Which component averages a [`ComponentAccumulators`] tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Components {
    pub j1: bool,
    pub j2: bool,
    pub cross: bool,
}

impl Components {
    pub const ALL: Components = Components {
        j1: true,
        j2: true,
        cross: true,
    };
}

/// Time averages of `⟨X₁, z₁⟩²`, `⟨X₂, z₂⟩²` and their product.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentAccumulators {
    window: Window,
    pos: Probe,
    vel: Probe,
    j1: Option<TimeAverage>,
    j2: Option<TimeAverage>,
    cross: Option<TimeAverage>,
    dt: f64,
}

impl ComponentAccumulators {
    pub fn new(cfg: &SpectralConfig, window: Window, rule: Quadrature) -> Result<Self> {
        Self::with_components(cfg, window, rule, Components::ALL)
    }

    pub fn with_components(
        cfg: &SpectralConfig,
        window: Window,
        rule: Quadrature,
        which: Components,
    ) -> Result<Self> {
        cfg.check_len(window.z1(), "window")?;
        let track = |on: bool| on.then(|| TimeAverage::new(rule));
        Ok(Self {
            pos: Probe::position(cfg, window.z1()),
            vel: Probe::velocity(window.z2()),
            window,
            j1: track(which.j1),
            j2: track(which.j2),
            cross: track(which.cross),
            dt: 0.0,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn start_at(&mut self, state: &ModeState) {
        let (p1, p2) = (self.pos.eval(state), self.vel.eval(state));
        if let Some(a) = &mut self.j1 {
            a.start(p1 * p1);
        }
        if let Some(a) = &mut self.j2 {
            a.start(p2 * p2);
        }
        if let Some(a) = &mut self.cross {
            a.start(p1 * p2);
        }
    }

    #[inline]
    pub fn accumulate_step(&mut self, state: &ModeState, dt: f64) {
        let p1 = if self.j1.is_some() || self.cross.is_some() {
            self.pos.eval(state)
        } else {
            0.0
        };
        let p2 = if self.j2.is_some() || self.cross.is_some() {
            self.vel.eval(state)
        } else {
            0.0
        };
        if let Some(a) = &mut self.j1 {
            a.push(p1 * p1, dt);
        }
        if let Some(a) = &mut self.j2 {
            a.push(p2 * p2, dt);
        }
        if let Some(a) = &mut self.cross {
            a.push(p1 * p2, dt);
        }
    }

    pub fn j1(&self) -> Option<f64> {
        self.j1.as_ref().and_then(TimeAverage::average)
    }

    pub fn j2(&self) -> Option<f64> {
        self.j2.as_ref().and_then(TimeAverage::average)
    }

    pub fn cross(&self) -> Option<f64> {
        self.cross.as_ref().and_then(TimeAverage::average)
    }

    pub fn merge(&mut self, next: &ComponentAccumulators) -> Result<()> {
        if self.window != next.window {
            return Err(Error::invalid(
                "cannot merge accumulators over different windows",
            ));
        }
        for (mine, theirs) in [
            (&mut self.j1, &next.j1),
            (&mut self.j2, &next.j2),
            (&mut self.cross, &next.cross),
        ] {
            match (mine, theirs) {
                (Some(a), Some(b)) => a.merge(b)?,
                (None, None) => {}
                _ => return Err(Error::invalid("accumulators track different components")),
            }
        }
        Ok(())
    }
}

impl Observer for ComponentAccumulators {
    fn start(&mut self, initial: &ModeState, dt: f64) {
        self.dt = dt;
        self.start_at(initial);
    }

    #[inline]
    fn observe(&mut self, state: &ModeState) {
        self.accumulate_step(state, self.dt);
    }
}

/// Time average of the product of two arbitrary window observations
/// `⟨X, y⟩_V ⟨X, z⟩_V`, e.g. `⟨X₁, f_k⟩⟨X₁, f_l⟩` for `y = (f_k, 0)`, `z = (f_l, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossAccumulator {
    left: Probe,
    right: Probe,
    avg: TimeAverage,
    dt: f64,
}

impl CrossAccumulator {
    pub fn new(
        cfg: &SpectralConfig,
        left: &Window,
        right: &Window,
        rule: Quadrature,
    ) -> Result<Self> {
        cfg.check_len(left.z1(), "window")?;
        cfg.check_len(right.z1(), "window")?;
        Ok(Self {
            left: Probe::full(cfg, left),
            right: Probe::full(cfg, right),
            avg: TimeAverage::new(rule),
            dt: 0.0,
        })
    }

    pub fn average(&self) -> Option<f64> {
        self.avg.average()
    }
}

impl Observer for CrossAccumulator {
    fn start(&mut self, initial: &ModeState, dt: f64) {
        self.dt = dt;
        self.avg
            .start(self.left.eval(initial) * self.right.eval(initial));
    }

    #[inline]
    fn observe(&mut self, state: &ModeState) {
        self.avg
            .push(self.left.eval(state) * self.right.eval(state), self.dt);
    }
}

/// Functional values at one instant of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// Average of `⟨X₁, z₁⟩²`.
    pub j1: Option<f64>,
    /// Average of `⟨X₂, z₂⟩²`.
    pub j2: Option<f64>,
    /// `J_t` for the whole window.
    pub j_t: Option<f64>,
}

/// Records a [`Snapshot`] of one window every `stride` steps.
pub struct SnapshotRecorder {
    components: ComponentAccumulators,
    total: QuadraticAccumulator,
    stride: u64,
    step: u64,
    t: f64,
    snapshots: Vec<Snapshot>,
}

impl SnapshotRecorder {
    pub fn new(
        cfg: &SpectralConfig,
        window: Window,
        rule: Quadrature,
        stride: u64,
    ) -> Result<Self> {
        if stride == 0 {
            return Err(Error::invalid("stride must be at least 1"));
        }
        let which = Components {
            j1: true,
            j2: true,
            cross: false,
        };
        Ok(Self {
            components: ComponentAccumulators::with_components(cfg, window.clone(), rule, which)?,
            total: QuadraticAccumulator::new(cfg, window, rule)?,
            stride,
            step: 0,
            t: 0.0,
            snapshots: Vec::new(),
        })
    }

    fn current(&self) -> Snapshot {
        Snapshot {
            t: self.t,
            j1: self.components.j1(),
            j2: self.components.j2(),
            j_t: self.total.j_t(),
        }
    }

    /// All snapshots, ending with the final state even when off-stride.
    pub fn finish(mut self) -> Vec<Snapshot> {
        if !self.step.is_multiple_of(self.stride) {
            let last = self.current();
            self.snapshots.push(last);
        }
        self.snapshots
    }
}

impl Observer for SnapshotRecorder {
    fn start(&mut self, initial: &ModeState, dt: f64) {
        self.components.start(initial, dt);
        self.total.start(initial, dt);
        self.step = 0;
        self.t = initial.t;
    }

    fn observe(&mut self, state: &ModeState) {
        self.components.observe(state);
        self.total.observe(state);
        self.step += 1;
        self.t = state.t;
        if self.step.is_multiple_of(self.stride) {
            let s = self.current();
            self.snapshots.push(s);
        }
    }
}
