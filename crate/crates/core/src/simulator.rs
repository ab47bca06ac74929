//! Time integration of the truncated mode system
//!
//! ```text
//! du_n = v_n dt
//! dv_n = (−bα_n u_n − 2a v_n) dt + √λ_n dβ_n
//! ```
//!
//! Modes are independent 2-dimensional linear SDEs. Two schemes are offered:
//! explicit Euler–Maruyama, and exact sampling of the Gaussian transition over
//! one step. Each mode draws from its own random stream (see [`crate::rng`]).

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::{InitialCondition, ModelParams, SpectralConfig};
use crate::rng::{mode_aux_rng, mode_rng};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::Write;

/// Coordinates `u_n = ⟨X₁(t), e_n⟩`, `v_n = ⟨X₂(t), e_n⟩` at model time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl ModeState {
    pub fn from_initial(x0: &InitialCondition) -> Self {
        Self {
            u: x0.u0.clone(),
            v: x0.v0.clone(),
            t: 0.0,
        }
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self {
            u: vec![0.0; n_modes],
            v: vec![0.0; n_modes],
            t: 0.0,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.u.len()
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &ModeState) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Euler,
    Exact,
}

/// Everything needed to reproduce one trajectory.
#[derive(Debug, Clone)]
pub struct SimPlan {
    pub params: ModelParams,
    pub cfg: SpectralConfig,
    pub x0: InitialCondition,
    pub horizon: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub seed: u64,
    /// 0-based modes to integrate. `None` integrates all of them; modes left out
    /// are held at zero and consume no random numbers.
    pub active_modes: Option<Vec<usize>>,
}

impl SimPlan {
    pub fn n_steps(&self) -> u64 {
        (self.horizon / self.dt).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.cfg.n_modes();
        if self.x0.n_modes() != n {
            return Err(Error::invalid(format!(
                "initial condition has {} modes, configuration has {n}",
                self.x0.n_modes()
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        if self.dt >= self.horizon {
            return Err(Error::invalid("dt must be smaller than the horizon"));
        }
        if self.horizon / self.dt > 1e15 {
            return Err(Error::invalid("too many steps"));
        }
        if let Some(modes) = &self.active_modes {
            if let Some(&m) = modes.iter().find(|&&m| m >= n) {
                return Err(Error::invalid(format!("active mode {m} out of range")));
            }
        }
        Ok(())
    }

    fn modes(&self) -> Vec<usize> {
        match &self.active_modes {
            Some(m) => {
                let mut m = m.clone();
                m.sort_unstable();
                m.dedup();
                m
            }
            None => (0..self.cfg.n_modes()).collect(),
        }
    }
}

/// Receives every post-step state of a trajectory.
pub trait Observer {
    /// Called once with the initial state before the first step.
    fn start(&mut self, _initial: &ModeState, _dt: f64) {}
    fn observe(&mut self, state: &ModeState);
}

/// One explicit Euler–Maruyama step driven by standard normal draws `gaussians`.
pub fn euler_step(
    state: &ModeState,
    params: &ModelParams,
    cfg: &SpectralConfig,
    dt: f64,
    gaussians: &[f64],
) -> Result<ModeState> {
    let n = cfg.n_modes();
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    if gaussians.len() != n || state.n_modes() != n {
        return Err(Error::invalid("dimension mismatch in euler_step"));
    }
    let mut next = state.clone();
    for i in 0..n {
        let (u, v) = (state.u[i], state.v[i]);
        let alpha = cfg.alphas()[i];
        let lambda = cfg.lambdas()[i];
        next.u[i] = u + v * dt;
        next.v[i] = v
            + (-params.b() * alpha * u - 2.0 * params.a() * v) * dt
            + (lambda * dt).sqrt() * gaussians[i];
        if !(next.u[i].abs() < DIVERGENCE_BOUND && next.v[i].abs() < DIVERGENCE_BOUND) {
            return Err(Error::IntegrationDiverged {
                t: state.t + dt,
                mode: i + 1,
                replication: None,
            });
        }
    }
    next.t = state.t + dt;
    Ok(next)
}

/// `exp(M t)` for the mode drift `M = [[0, 1], [−bα, −2a]]`.
///
/// With `s = M + aI` one has `s² = (a² − bα) I`, so
/// `exp(Mt) = e^{−at} (C(t) I + S(t) s)` where `C, S` are hyperbolic, polynomial or
/// trigonometric according to the sign of `a² − bα`.
pub fn mode_propagator(params: &ModelParams, alpha: f64, t: f64) -> Mat2 {
    let a = params.a();
    let delta = a * a - params.b() * alpha;
    let x = delta * t * t;
    let (c, s) = if x.abs() < 1e-4 {
        // Near-critical damping: the repeated-eigenvalue case and its neighbourhood.
        let decay = (-a * t).exp();
        let c = 1.0 + x / 2.0 + x * x / 24.0 + x * x * x / 720.0;
        let s = t * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
        (decay * c, decay * s)
    } else if delta > 0.0 {
        // Overdamped: distinct real eigenvalues −a ± r.
        let r = delta.sqrt();
        let slow = ((r - a) * t).exp();
        let fast = (-(r + a) * t).exp();
        (0.5 * (slow + fast), 0.5 * (slow - fast) / r)
    } else {
        // Underdamped: complex pair −a ± iω.
        let w = (-delta).sqrt();
        let decay = (-a * t).exp();
        let (sn, cs) = (w * t).sin_cos();
        (decay * cs, decay * sn / w)
    };
    let shifted = Mat2::new(a, 1.0, -params.b() * alpha, -a);
    Mat2::IDENTITY.scale(c) + shifted.scale(s)
}

/// Exact one-step transition of a mode: `x' = mean_matrix · x + noise`,
/// `noise ~ N(0, noise_cov)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactTransition {
    pub mean_matrix: Mat2,
    pub noise_cov: Mat2,
    pub noise_chol: Mat2,
}

/// `(∫₀ʰ e^{Ms} ds, ∫₀ʰ e^{Ms} e₂e₂ᵀ e^{Mᵀs} ds)` for the drift of mode `alpha`.
///
/// A Taylor series on a short step `h/2^k` followed by `k` doublings,
/// `Σ(2t) = Σ(t) + Φ(t) Σ(t) Φ(t)ᵀ` and `J(2t) = J(t) + Φ(t) J(t)`. Only
/// positive semidefinite terms are added, so small entries keep full
/// relative accuracy where `P∞ − Φ P∞ Φᵀ` would cancel catastrophically.
pub(crate) fn step_integrals(params: &ModelParams, alpha: f64, h: f64) -> (Mat2, Mat2) {
    let m = params.mode_drift(alpha);
    let mt = m.transpose();
    let norm = (m.get(0, 0).abs() + m.get(0, 1).abs()).max(m.get(1, 0).abs() + m.get(1, 1).abs());
    let mut levels = 0;
    let mut h0 = h;
    while h0 * norm > 0.125 {
        h0 *= 0.5;
        levels += 1;
    }
    let q = Mat2::diag(0.0, 1.0);
    let (mut m_pow, mut l_pow) = (Mat2::IDENTITY, q);
    let mut coef = h0;
    let (mut j, mut sigma) = (Mat2::IDENTITY.scale(h0), q.scale(h0));
    // With h0‖M‖ ≤ 1/8 the 20th term is below 1e-36 relative.
    for n in 1..20 {
        coef *= h0 / (n + 1) as f64;
        m_pow = m_pow * m;
        l_pow = m * l_pow + l_pow * mt;
        j = j + m_pow.scale(coef);
        sigma = sigma + l_pow.scale(coef);
    }
    let mut t = h0;
    for _ in 0..levels {
        let phi = mode_propagator(params, alpha, t);
        sigma = (sigma + phi * sigma * phi.transpose()).symmetrized();
        j = j + phi * j;
        t *= 2.0;
    }
    (j, sigma.symmetrized())
}

/// Builds the exact transition of one mode over `dt`.
pub fn exact_transition(
    params: &ModelParams,
    alpha_n: f64,
    lambda_n: f64,
    dt: f64,
) -> ExactTransition {
    let phi = mode_propagator(params, alpha_n, dt);
    let noise_cov = step_integrals(params, alpha_n, dt).1.scale(lambda_n);
    ExactTransition {
        mean_matrix: phi,
        noise_cov,
        noise_chol: noise_cov.cholesky_psd(),
    }
}

/// Exact transition conditioned on the Brownian increment `ΔW` of the step.
///
/// The exact noise `ξ = √λ ∫ e^{M(h−s)} e₂ dW(s)` splits into a part linear in
/// `ΔW` and an independent residual, so Euler and exact steps can be driven by
/// the same increments.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BridgedTransition {
    phi: Mat2,
    gain: [f64; 2],
    resid_chol: Mat2,
}

impl BridgedTransition {
    pub(crate) fn new(params: &ModelParams, alpha: f64, lambda: f64, h: f64) -> Self {
        let tr = exact_transition(params, alpha, lambda, h);
        let integral = step_integrals(params, alpha, h).0;
        let sl = lambda.sqrt();
        let cov_xi_dw = [sl * integral.get(0, 1), sl * integral.get(1, 1)];
        let gain = [cov_xi_dw[0] / h, cov_xi_dw[1] / h];
        let resid = Mat2::new(
            tr.noise_cov.get(0, 0) - cov_xi_dw[0] * gain[0],
            tr.noise_cov.get(0, 1) - cov_xi_dw[0] * gain[1],
            tr.noise_cov.get(1, 0) - cov_xi_dw[1] * gain[0],
            tr.noise_cov.get(1, 1) - cov_xi_dw[1] * gain[1],
        );
        Self {
            phi: tr.mean_matrix,
            gain,
            resid_chol: resid.cholesky_psd(),
        }
    }

    #[inline]
    fn step(&self, x: [f64; 2], dw: f64, z: [f64; 2]) -> [f64; 2] {
        let m = self.phi.apply(x);
        let r = self.resid_chol.apply(z);
        [
            m[0] + self.gain[0] * dw + r[0],
            m[1] + self.gain[1] * dw + r[1],
        ]
    }
}

/// States beyond this magnitude count as diverged. It sits far above any
/// stationary scale yet low enough that squared observations stay finite.
pub const DIVERGENCE_BOUND: f64 = 1e100;

struct EulerKernel {
    idx: usize,
    dt: f64,
    stiff: f64,
    damp: f64,
    noise: f64,
    rng: ChaCha8Rng,
}

struct ExactKernel {
    idx: usize,
    phi: Mat2,
    chol: Mat2,
    rng: ChaCha8Rng,
}

trait ModeKernel {
    fn index(&self) -> usize;
    fn advance(&mut self, u: f64, v: f64) -> (f64, f64);
}

impl ModeKernel for EulerKernel {
    #[inline]
    fn index(&self) -> usize {
        self.idx
    }

    #[inline]
    fn advance(&mut self, u: f64, v: f64) -> (f64, f64) {
        let g: f64 = self.rng.sample(StandardNormal);
        (
            u + v * self.dt,
            v + (self.stiff * u + self.damp * v) * self.dt + self.noise * g,
        )
    }
}

impl ModeKernel for ExactKernel {
    #[inline]
    fn index(&self) -> usize {
        self.idx
    }

    #[inline]
    fn advance(&mut self, u: f64, v: f64) -> (f64, f64) {
        let g0: f64 = self.rng.sample(StandardNormal);
        let g1: f64 = self.rng.sample(StandardNormal);
        let m = self.phi.0;
        let l = self.chol.0;
        (
            m[0][0] * u + m[0][1] * v + l[0][0] * g0,
            m[1][0] * u + m[1][1] * v + l[1][0] * g0 + l[1][1] * g1,
        )
    }
}

fn run_kernels<K: ModeKernel>(
    kernels: &mut [K],
    state: &mut ModeState,
    n_steps: u64,
    dt: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<()> {
    for step in 1..=n_steps {
        let t = step as f64 * dt;
        for k in kernels.iter_mut() {
            let i = k.index();
            let (u, v) = k.advance(state.u[i], state.v[i]);
            if !(u.abs() < DIVERGENCE_BOUND && v.abs() < DIVERGENCE_BOUND) {
                return Err(Error::IntegrationDiverged {
                    t,
                    mode: i + 1,
                    replication: None,
                });
            }
            state.u[i] = u;
            state.v[i] = v;
        }
        state.t = t;
        for obs in observers.iter_mut() {
            obs.observe(state);
        }
    }
    Ok(())
}

/// Integrates `plan` from `t = 0` to the horizon and returns the final state.
///
/// Observers see the initial state via [`Observer::start`] and then every
/// post-step state. Output is bit-reproducible for a fixed plan.
pub fn simulate(plan: &SimPlan, observers: &mut [&mut dyn Observer]) -> Result<ModeState> {
    plan.validate()?;
    let modes = plan.modes();
    let n = plan.cfg.n_modes();
    let mut state = ModeState::zeros(n);
    for &i in &modes {
        state.u[i] = plan.x0.u0[i];
        state.v[i] = plan.x0.v0[i];
    }
    for obs in observers.iter_mut() {
        obs.start(&state, plan.dt);
    }
    let (p, dt) = (&plan.params, plan.dt);
    let al = plan.cfg.alphas();
    let la = plan.cfg.lambdas();
    match plan.scheme {
        Scheme::Euler => {
            let mut kernels: Vec<EulerKernel> = modes
                .iter()
                .map(|&i| EulerKernel {
                    idx: i,
                    dt,
                    stiff: -p.b() * al[i],
                    damp: -2.0 * p.a(),
                    noise: (la[i] * dt).sqrt(),
                    rng: mode_rng(plan.seed, i),
                })
                .collect();
            run_kernels(&mut kernels, &mut state, plan.n_steps(), dt, observers)?;
        }
        Scheme::Exact => {
            let mut kernels: Vec<ExactKernel> = modes
                .iter()
                .map(|&i| {
                    let tr = exact_transition(p, al[i], la[i], dt);
                    ExactKernel {
                        idx: i,
                        phi: tr.mean_matrix,
                        chol: tr.noise_chol,
                        rng: mode_rng(plan.seed, i),
                    }
                })
                .collect();
            run_kernels(&mut kernels, &mut state, plan.n_steps(), dt, observers)?;
        }
    }
    Ok(state)
}

/// Euler trajectories at several step sizes compared with the exact solution,
/// all driven by one Brownian path.
#[derive(Debug, Clone)]
pub struct SharedNoiseStudy {
    /// Euler step size of each level.
    pub dts: Vec<f64>,
    /// Max over grid times and components of `|euler − exact|`, per level.
    pub max_gaps: Vec<f64>,
    /// Final Euler state per level.
    pub final_euler: Vec<ModeState>,
    pub final_exact: ModeState,
    /// Left-Riemann time averages of `v_n²` along Euler, per level and mode.
    pub v_sq_avg_euler: Vec<Vec<f64>>,
    /// The same averages along the exact path sampled on each level's grid.
    pub v_sq_avg_exact: Vec<Vec<f64>>,
}

impl SharedNoiseStudy {
    /// Convergence order `log(gap_i / gap_j) / log(dt_i / dt_j)` between two levels.
    pub fn observed_order(&self, coarse: usize, fine: usize) -> f64 {
        (self.max_gaps[coarse] / self.max_gaps[fine]).ln()
            / (self.dts[coarse] / self.dts[fine]).ln()
    }

    /// Order of the error in the time average of `v_mode²` between two levels.
    pub fn v_sq_order(&self, mode: usize, coarse: usize, fine: usize) -> f64 {
        let e = |l: usize| (self.v_sq_avg_euler[l][mode] - self.v_sq_avg_exact[l][mode]).abs();
        (e(coarse) / e(fine)).ln() / (self.dts[coarse] / self.dts[fine]).ln()
    }
}

/// Runs the exact scheme on a grid of step `fine_dt` and, for each factor `m`,
/// Euler with step `m · fine_dt` driven by the summed fine increments.
pub fn shared_noise_study(
    params: &ModelParams,
    cfg: &SpectralConfig,
    x0: &InitialCondition,
    horizon: f64,
    fine_dt: f64,
    factors: &[usize],
    seed: u64,
) -> Result<SharedNoiseStudy> {
    let n = cfg.n_modes();
    if x0.n_modes() != n {
        return Err(Error::invalid("initial condition dimension mismatch"));
    }
    if !(fine_dt > 0.0) || !(horizon > fine_dt) {
        return Err(Error::invalid("need 0 < fine_dt < horizon"));
    }
    let n_fine = (horizon / fine_dt).round() as u64;
    if factors.is_empty()
        || factors
            .iter()
            .any(|&m| m == 0 || !n_fine.is_multiple_of(m as u64))
    {
        return Err(Error::invalid(
            "every factor must be positive and divide the number of fine steps",
        ));
    }
    let al = cfg.alphas();
    let la = cfg.lambdas();
    let bridged: Vec<BridgedTransition> = (0..n)
        .map(|i| BridgedTransition::new(params, al[i], la[i], fine_dt))
        .collect();
    let mut rngs: Vec<(ChaCha8Rng, ChaCha8Rng)> = (0..n)
        .map(|i| (mode_rng(seed, i), mode_aux_rng(seed, i)))
        .collect();

    let levels = factors.len();
    let mut exact = ModeState::from_initial(x0);
    let mut euler: Vec<ModeState> = vec![exact.clone(); levels];
    let mut dw_acc = vec![vec![0.0; n]; levels];
    let mut gaps = vec![0.0_f64; levels];
    let mut sq_euler = vec![vec![0.0; n]; levels];
    let mut sq_exact = vec![vec![0.0; n]; levels];
    let sqrt_h = fine_dt.sqrt();
    let mut dw = vec![0.0; n];

    for step in 1..=n_fine {
        for i in 0..n {
            let (prim, aux) = &mut rngs[i];
            let g: f64 = prim.sample(StandardNormal);
            let z0: f64 = aux.sample(StandardNormal);
            let z1: f64 = aux.sample(StandardNormal);
            dw[i] = sqrt_h * g;
            let x = bridged[i].step([exact.u[i], exact.v[i]], dw[i], [z0, z1]);
            exact.u[i] = x[0];
            exact.v[i] = x[1];
        }
        exact.t = step as f64 * fine_dt;
        for (l, &m) in factors.iter().enumerate() {
            for i in 0..n {
                dw_acc[l][i] += dw[i];
            }
            if step % m as u64 != 0 {
                continue;
            }
            let h = m as f64 * fine_dt;
            let st = &mut euler[l];
            for i in 0..n {
                let (u, v) = (st.u[i], st.v[i]);
                // Pre-step values for the left-Riemann averages.
                sq_euler[l][i] += v * v * h;
                st.u[i] = u + v * h;
                st.v[i] = v
                    + (-params.b() * al[i] * u - 2.0 * params.a() * v) * h
                    + la[i].sqrt() * dw_acc[l][i];
                dw_acc[l][i] = 0.0;
                if !(st.u[i].abs() < DIVERGENCE_BOUND && st.v[i].abs() < DIVERGENCE_BOUND) {
                    return Err(Error::IntegrationDiverged {
                        t: exact.t,
                        mode: i + 1,
                        replication: None,
                    });
                }
            }
            st.t = exact.t;
            gaps[l] = gaps[l].max(st.max_abs_diff(&exact));
        }
        // Exact path sampled on each level's grid (pre-step value of the next step).
        for (l, &m) in factors.iter().enumerate() {
            if step % m as u64 == 0 && step < n_fine {
                let h = m as f64 * fine_dt;
                for i in 0..n {
                    sq_exact[l][i] += exact.v[i] * exact.v[i] * h;
                }
            }
        }
    }
    // The t = 0 term of the exact averages.
    for (l, &m) in factors.iter().enumerate() {
        let h = m as f64 * fine_dt;
        for i in 0..n {
            sq_exact[l][i] += x0.v0[i] * x0.v0[i] * h;
        }
    }
    let t_total = n_fine as f64 * fine_dt;
    for l in 0..levels {
        for i in 0..n {
            sq_euler[l][i] /= t_total;
            sq_exact[l][i] /= t_total;
        }
    }
    Ok(SharedNoiseStudy {
        dts: factors.iter().map(|&m| m as f64 * fine_dt).collect(),
        max_gaps: gaps,
        final_euler: euler,
        final_exact: exact,
        v_sq_avg_euler: sq_euler,
        v_sq_avg_exact: sq_exact,
    })
}

/// Writes `t,u_1,...,u_N,v_1,...,v_N` rows every `stride` steps, starting at `t = 0`.
pub struct TrajectoryCsv<W: Write> {
    writer: csv::Writer<W>,
    stride: u64,
    step: u64,
    error: Option<Error>,
}

impl<W: Write> TrajectoryCsv<W> {
    pub fn new(sink: W, n_modes: usize, stride: u64) -> Result<Self> {
        if stride == 0 {
            return Err(Error::invalid("stride must be at least 1"));
        }
        let mut writer = csv::Writer::from_writer(sink);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n_modes).map(|i| format!("u_{i}")));
        header.extend((1..=n_modes).map(|i| format!("v_{i}")));
        writer.write_record(&header)?;
        Ok(Self {
            writer,
            stride,
            step: 0,
            error: None,
        })
    }

    fn write_state(&mut self, s: &ModeState) {
        if self.error.is_some() {
            return;
        }
        let row = std::iter::once(s.t)
            .chain(s.u.iter().copied())
            .chain(s.v.iter().copied())
            .map(crate::output::fmt_f64);
        if let Err(e) = self.writer.write_record(row) {
            self.error = Some(e.into());
        }
    }

    /// Flushes and reports the first write error, if any.
    pub fn finish(mut self) -> Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.writer.flush()?;
        Ok(())
    }
}

impl<W: Write> Observer for TrajectoryCsv<W> {
    fn start(&mut self, initial: &ModeState, _dt: f64) {
        self.step = 0;
        self.write_state(initial);
    }

    fn observe(&mut self, state: &ModeState) {
        self.step += 1;
        if self.step.is_multiple_of(self.stride) {
            self.write_state(state);
        }
    }
}
