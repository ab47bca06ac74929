//! Parametric model, spectral data and the stationary covariance operator.
//!
//! The state space is `V = Dom((-A)^{1/2}) × L²(D)`. Positions are stored in the
//! `e_n` coordinates of `L²`, while the first component of an observation window
//! is stored in the `f_n = e_n / √α_n` coordinates of `Dom((-A)^{1/2})`.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::summation::ExactSum;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Damping `a` and stiffness `b` of `u_tt = bΔu − 2a u_t + noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    a: f64,
    b: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(format!(
                "damping a must be positive, got {a}"
            )));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!(
                "stiffness b must be positive, got {b}"
            )));
        }
        Ok(Self { a, b })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Drift matrix `[[0, 1], [−bα, −2a]]` of a single mode.
    pub fn mode_drift(&self, alpha: f64) -> Mat2 {
        Mat2::new(0.0, 1.0, -self.b * alpha, -2.0 * self.a)
    }
}

/// Truncated eigen-data: `−A e_n = α_n e_n`, `Q e_n = λ_n e_n` for `n = 1..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    alphas: Vec<f64>,
    lambdas: Vec<f64>,
}

impl SpectralConfig {
    pub fn new(alphas: Vec<f64>, lambdas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::invalid("at least one mode is required"));
        }
        if alphas.len() != lambdas.len() {
            return Err(Error::invalid(format!(
                "{} eigenvalues of A but {} of Q",
                alphas.len(),
                lambdas.len()
            )));
        }
        if let Some(i) = alphas.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::invalid(format!("alpha_{} must be positive", i + 1)));
        }
        if let Some(i) = alphas.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "alphas must be strictly increasing (alpha_{} >= alpha_{})",
                i + 1,
                i + 2
            )));
        }
        if let Some(i) = lambdas.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::invalid(format!("lambda_{} must be positive", i + 1)));
        }
        Ok(Self { alphas, lambdas })
    }

    /// The one-dimensional Dirichlet example: `α_n = n²π²`, `λ_n = 1000/n²`.
    pub fn dirichlet_reference(n_modes: usize) -> Result<Self> {
        Self::new(dirichlet_eigenvalues(n_modes)?, paper_lambdas(n_modes)?)
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.alphas.len()
    }

    #[inline]
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    #[inline]
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `Σ λ_k c_k²`, i.e. `⟨Qz, z⟩` for coordinates `c` in an orthonormal eigenbasis.
    ///
    /// Both `⟨Qz₁, z₁⟩` in the `f` basis and `⟨Qz₂, z₂⟩` in the `e` basis take this form.
    pub fn q_form(&self, coords: &[f64]) -> Result<f64> {
        self.check_len(coords, "window")?;
        Ok(self
            .lambdas
            .iter()
            .zip(coords)
            .map(|(l, c)| l * c * c)
            .collect::<ExactSum>()
            .value())
    }

    pub(crate) fn check_len(&self, v: &[f64], what: &str) -> Result<()> {
        if v.len() != self.n_modes() {
            return Err(Error::invalid(format!(
                "{what} has {} coordinates but the configuration has {} modes",
                v.len(),
                self.n_modes()
            )));
        }
        Ok(())
    }
}

/// `α_n = n²π²`, the eigenvalues of `−Δ` on `(0, 1)` with Dirichlet conditions.
pub fn dirichlet_eigenvalues(n_modes: usize) -> Result<Vec<f64>> {
    if n_modes == 0 {
        return Err(Error::invalid("n_modes must be at least 1"));
    }
    Ok((1..=n_modes)
        .map(|n| {
            let n = n as f64;
            n * n * PI * PI
        })
        .collect())
}

/// `λ_n = 1000 / n²`.
pub fn paper_lambdas(n_modes: usize) -> Result<Vec<f64>> {
    if n_modes == 0 {
        return Err(Error::invalid("n_modes must be at least 1"));
    }
    Ok((1..=n_modes).map(|n| 1000.0 / ((n * n) as f64)).collect())
}

/// An observation window `z = (z₁, z₂)`.
///
/// `z1` holds coordinates in the `f_k` basis of `Dom((-A)^{1/2})`, `z2` in the
/// `e_k` basis of `L²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    z1: Vec<f64>,
    z2: Vec<f64>,
}

impl Window {
    pub fn new(z1: Vec<f64>, z2: Vec<f64>) -> Result<Self> {
        if z1.len() != z2.len() {
            return Err(Error::invalid(format!(
                "window components have different lengths ({} and {})",
                z1.len(),
                z2.len()
            )));
        }
        if z1.iter().chain(&z2).any(|v| !v.is_finite()) {
            return Err(Error::InvalidWindow("non-finite coordinate".into()));
        }
        Ok(Self { z1, z2 })
    }

    pub fn zero(n_modes: usize) -> Self {
        Self {
            z1: vec![0.0; n_modes],
            z2: vec![0.0; n_modes],
        }
    }

    /// `(f_j, 0)`, with `j` 1-based.
    pub fn f_basis(n_modes: usize, j: usize) -> Result<Self> {
        check_mode_index(n_modes, j)?;
        let mut w = Self::zero(n_modes);
        w.z1[j - 1] = 1.0;
        Ok(w)
    }

    /// `(0, e_k)`, with `k` 1-based.
    pub fn e_basis(n_modes: usize, k: usize) -> Result<Self> {
        check_mode_index(n_modes, k)?;
        let mut w = Self::zero(n_modes);
        w.z2[k - 1] = 1.0;
        Ok(w)
    }

    /// `(f_j, e_k)`, with 1-based indices.
    pub fn basis_pair(n_modes: usize, j: usize, k: usize) -> Result<Self> {
        check_mode_index(n_modes, j)?;
        check_mode_index(n_modes, k)?;
        let mut w = Self::zero(n_modes);
        w.z1[j - 1] = 1.0;
        w.z2[k - 1] = 1.0;
        Ok(w)
    }

    #[inline]
    pub fn z1(&self) -> &[f64] {
        &self.z1
    }

    #[inline]
    pub fn z2(&self) -> &[f64] {
        &self.z2
    }

    pub fn n_modes(&self) -> usize {
        self.z1.len()
    }

    pub fn z1_nonzero(&self) -> bool {
        self.z1.iter().any(|&v| v != 0.0)
    }

    pub fn z2_nonzero(&self) -> bool {
        self.z2.iter().any(|&v| v != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        !self.z1_nonzero() && !self.z2_nonzero()
    }

    /// `L²` coordinates `⟨z₁, e_k⟩ = z_{1,k} / √α_k`.
    pub fn z1_l2_coords(&self, cfg: &SpectralConfig) -> Result<Vec<f64>> {
        cfg.check_len(&self.z1, "window")?;
        Ok(self
            .z1
            .iter()
            .zip(cfg.alphas())
            .map(|(z, a)| z / a.sqrt())
            .collect())
    }

    /// Builds a window from `L²` coordinates of `z₁`.
    pub fn from_l2(cfg: &SpectralConfig, z1_l2: &[f64], z2: Vec<f64>) -> Result<Self> {
        cfg.check_len(z1_l2, "window")?;
        let z1 = z1_l2
            .iter()
            .zip(cfg.alphas())
            .map(|(x, a)| x * a.sqrt())
            .collect();
        Self::new(z1, z2)
    }

    /// 0-based indices of modes where either component is nonzero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_modes())
            .filter(|&i| self.z1[i] != 0.0 || self.z2[i] != 0.0)
            .collect()
    }

    /// Multiplies `z₁` by `c1` and `z₂` by `c2`.
    pub fn scaled(&self, c1: f64, c2: f64) -> Self {
        Self {
            z1: self.z1.iter().map(|v| v * c1).collect(),
            z2: self.z2.iter().map(|v| v * c2).collect(),
        }
    }
}

pub(crate) fn check_mode_index(n_modes: usize, idx: usize) -> Result<()> {
    if idx == 0 || idx > n_modes {
        return Err(Error::invalid(format!(
            "mode index {idx} outside 1..={n_modes}"
        )));
    }
    Ok(())
}

/// Initial coordinates `⟨u₁, e_n⟩`, `⟨u₂, e_n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl InitialCondition {
    pub fn new(u0: Vec<f64>, v0: Vec<f64>) -> Result<Self> {
        if u0.len() != v0.len() {
            return Err(Error::invalid("u0 and v0 lengths differ"));
        }
        if u0.iter().chain(&v0).any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial condition has non-finite entries"));
        }
        Ok(Self { u0, v0 })
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self {
            u0: vec![0.0; n_modes],
            v0: vec![0.0; n_modes],
        }
    }

    /// All coordinates one: `u₁(ξ) = u₂(ξ) = √2 Σ sin(nπξ)`.
    pub fn ones(n_modes: usize) -> Self {
        Self {
            u0: vec![1.0; n_modes],
            v0: vec![1.0; n_modes],
        }
    }

    /// Independent draws from the stationary law of each mode.
    pub fn stationary<R: Rng + ?Sized>(
        params: &ModelParams,
        cfg: &SpectralConfig,
        rng: &mut R,
    ) -> Self {
        let (u0, v0) = cfg
            .alphas()
            .iter()
            .zip(cfg.lambdas())
            .map(|(&al, &la)| {
                let p = stationary_mode_covariance(params, al, la);
                let gu: f64 = rng.sample(StandardNormal);
                let gv: f64 = rng.sample(StandardNormal);
                (p.get(0, 0).sqrt() * gu, p.get(1, 1).sqrt() * gv)
            })
            .unzip();
        Self { u0, v0 }
    }

    pub fn n_modes(&self) -> usize {
        self.u0.len()
    }
}

/// `D_{k,l} = b(α_k − α_l)² + 8a²(α_k + α_l)`.
#[inline]
pub fn d_denominator(params: &ModelParams, alpha_k: f64, alpha_l: f64) -> f64 {
    let (a, b) = (params.a, params.b);
    let d = alpha_k - alpha_l;
    b * d * d + 8.0 * a * a * (alpha_k + alpha_l)
}

/// `⟨Q∞ z, z⟩_V = ⟨Qz₁, z₁⟩/(4ab) + ⟨Qz₂, z₂⟩/(4a)` in the diagonal case.
pub fn q_infinity_quadratic_form(
    params: &ModelParams,
    cfg: &SpectralConfig,
    w: &Window,
) -> Result<f64> {
    let q1 = cfg.q_form(w.z1())?;
    let q2 = cfg.q_form(w.z2())?;
    Ok(q1 / (4.0 * params.a * params.b) + q2 / (4.0 * params.a))
}

/// `⟨Q∞ z, z⟩_V` from the general double series for a (not necessarily diagonal)
/// noise covariance given by its `L²` matrix `q[n][k] = ⟨Q e_n, e_k⟩`, truncated at
/// `N` modes.
pub fn q_infinity_general_quadratic_form(
    params: &ModelParams,
    cfg: &SpectralConfig,
    q_matrix: &[Vec<f64>],
    w: &Window,
) -> Result<f64> {
    let n = cfg.n_modes();
    if q_matrix.len() != n || q_matrix.iter().any(|row| row.len() != n) {
        return Err(Error::invalid(format!("q_matrix must be {n}×{n}")));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (x, y) = (q_matrix[i][j], q_matrix[j][i]);
            if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(f64::MIN_POSITIVE) {
                return Err(Error::invalid(format!(
                    "q_matrix is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let x1 = w.z1_l2_coords(cfg)?;
    let x2 = w.z2();
    cfg.check_len(x2, "window")?;
    let (a, b) = (params.a, params.b);
    let al = cfg.alphas();
    let mut acc = ExactSum::new();
    for nn in 0..n {
        for k in 0..n {
            let q = q_matrix[nn][k];
            if q == 0.0 {
                continue;
            }
            let diff = al[nn] - al[k];
            let den = b * b * diff * diff + 8.0 * a * a * b * (al[nn] + al[k]);
            let c1 = 4.0 * a * al[nn] * x1[nn] + b * (al[k] - al[nn]) * x2[nn];
            let c2 = b * al[nn] * diff * x1[nn] + 2.0 * a * b * (al[nn] + al[k]) * x2[nn];
            // ⟨·, z₁⟩ in Dom((−A)^{1/2}) weights the e_k coordinate by α_k.
            acc.add(q / den * (al[k] * x1[k] * c1 + x2[k] * c2));
        }
    }
    Ok(acc.value())
}

/// Stationary covariance of the mode pair `(u_n, v_n)`:
/// `diag(λ/(4abα), λ/(4a))`.
pub fn stationary_mode_covariance(params: &ModelParams, alpha_n: f64, lambda_n: f64) -> Mat2 {
    Mat2::diag(
        lambda_n / (4.0 * params.a * params.b * alpha_n),
        lambda_n / (4.0 * params.a),
    )
}
