//! First-order learning dynamics: GDA, optimistic GDA, extra-gradient,
//! optimistic multiplicative weights and the feedback-stabilized KPV-GDA.
//!
//! All updates are simultaneous. Team A descends `U`, team B ascends it; the
//! signed field is `F(z) = s ∘ ∇U(z)` with `s = -1` on team A coordinates.
//! Projected methods move in full simplex coordinates, one probability per
//! pure strategy, and project blockwise after every (half) step.

mod init;
mod run;

pub use init::{perturbed_point, random_point};
pub use run::{run, SampleRow, Termination, Trajectory};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::game::Game;
use crate::simplex::Domain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gda,
    Ogda,
    Eg,
    Omwu,
    Kpv,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Gda, Method::Ogda, Method::Eg, Method::Omwu, Method::Kpv];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gda => "gda",
            Method::Ogda => "ogda",
            Method::Eg => "eg",
            Method::Omwu => "omwu",
            Method::Kpv => "kpv",
        }
    }

    fn uses_prev_gradient(self) -> bool {
        matches!(self, Method::Ogda | Method::Omwu)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

fn default_tol() -> f64 {
    1e-10
}
fn default_patience() -> usize {
    100
}
fn default_stride() -> usize {
    100
}
fn default_max_iters() -> usize {
    100_000
}

/// Method, step parameters and stopping rule of one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub method: Method,
    pub eta: f64,
    /// Feedback gain `K = k I` (KPV only).
    #[serde(default)]
    pub k: f64,
    /// Estimator gain `P = p I` (KPV only).
    #[serde(default)]
    pub p: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Per-step displacement (max norm) counted as "not moving".
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Consecutive still steps before stopping.
    #[serde(default = "default_patience")]
    pub patience: usize,
    /// Keep every `stride`-th iterate in the trajectory.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Point for the distance curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<f64>>,
}

impl DynamicsConfig {
    pub fn new(method: Method, eta: f64) -> Self {
        Self {
            method,
            eta,
            k: 0.0,
            p: 0.0,
            max_iters: default_max_iters(),
            tol: default_tol(),
            patience: default_patience(),
            stride: default_stride(),
            reference: None,
        }
    }

    pub fn kpv(eta: f64, k: f64, p: f64) -> Self {
        Self { k, p, ..Self::new(Method::Kpv, eta) }
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_stride(mut self, n: usize) -> Self {
        self.stride = n;
        self
    }

    pub fn with_reference(mut self, r: Vec<f64>) -> Self {
        self.reference = Some(r);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if !self.k.is_finite() || !self.p.is_finite() {
            return Err(Error::Config("k and p must be finite".into()));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be positive".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config("tol must be nonnegative".into()));
        }
        Ok(())
    }

    pub(crate) fn warn_unusual_gains(&self) {
        if self.method == Method::Kpv && (self.p <= 0.0 || self.k >= 0.0) {
            log::warn!(
                "KPV with k = {}, p = {}: the stabilizing regime needs k < 0 and p > 0",
                self.k,
                self.p
            );
        }
    }
}

/// Iterate of one dynamic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsState {
    pub z: Vec<f64>,
    /// `∇U` at the previous iterate (OGDA, OMWU).
    pub prev_gradient: Option<Vec<f64>>,
    /// Fixed-point estimate (KPV).
    pub theta: Option<Vec<f64>>,
    pub step_count: usize,
}

impl DynamicsState {
    /// Initial state at `z0`. The previous gradient starts equal to the
    /// current one, so the first optimistic step is a plain step; the KPV
    /// estimate starts at `z0`.
    pub fn new<G: Game + ?Sized>(game: &G, method: Method, z0: Vec<f64>) -> Result<Self> {
        let domain = game.domain();
        check_len("initial point", z0.len(), domain.dim())?;
        if !domain.contains(&z0, 1e-9) {
            return Err(Error::Domain("initial point is not feasible".into()));
        }
        let prev_gradient = method.uses_prev_gradient().then(|| game.gradient(&z0));
        let theta = (method == Method::Kpv).then(|| z0.clone());
        Ok(Self { z: z0, prev_gradient, theta, step_count: 0 })
    }
}

/// Reusable buffers for stepping one game.
pub struct Stepper<'g, G: Game + ?Sized> {
    game: &'g G,
    domain: Domain,
    signs: Vec<f64>,
    grad: Vec<f64>,
    half: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'g, G: Game + ?Sized> Stepper<'g, G> {
    pub fn new(game: &'g G) -> Self {
        let domain = game.domain();
        let d = domain.dim();
        Self {
            game,
            signs: game.coordinate_signs(),
            domain,
            grad: vec![0.0; d],
            half: vec![0.0; d],
            scratch: Vec::with_capacity(d),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Advances `state` by one step of `cfg.method`.
    pub fn step(&mut self, cfg: &DynamicsConfig, state: &mut DynamicsState) -> Result<()> {
        let eta = cfg.eta;
        match cfg.method {
            Method::Gda => {
                self.game.gradient_into(&state.z, &mut self.grad);
                for ((z, g), s) in state.z.iter_mut().zip(&self.grad).zip(&self.signs) {
                    *z += eta * s * g;
                }
                self.domain.project_in_place(&mut state.z, &mut self.scratch);
            }
            Method::Ogda => {
                let prev = state
                    .prev_gradient
                    .as_mut()
                    .ok_or_else(|| Error::Precondition("OGDA needs a previous gradient".into()))?;
                self.game.gradient_into(&state.z, &mut self.grad);
                for i in 0..state.z.len() {
                    state.z[i] += eta * self.signs[i] * (2.0 * self.grad[i] - prev[i]);
                }
                prev.copy_from_slice(&self.grad);
                self.domain.project_in_place(&mut state.z, &mut self.scratch);
            }
            Method::Eg => {
                self.game.gradient_into(&state.z, &mut self.grad);
                for i in 0..state.z.len() {
                    self.half[i] = state.z[i] + eta * self.signs[i] * self.grad[i];
                }
                self.domain.project_in_place(&mut self.half, &mut self.scratch);
                self.game.gradient_into(&self.half, &mut self.grad);
                for ((z, g), s) in state.z.iter_mut().zip(&self.grad).zip(&self.signs) {
                    *z += eta * s * g;
                }
                self.domain.project_in_place(&mut state.z, &mut self.scratch);
            }
            Method::Omwu => self.omwu(eta, state)?,
            Method::Kpv => {
                let theta = state
                    .theta
                    .as_mut()
                    .ok_or_else(|| Error::Precondition("KPV needs a fixed-point estimate".into()))?;
                self.game.gradient_into(&state.z, &mut self.grad);
                for i in 0..state.z.len() {
                    let d = state.z[i] - theta[i];
                    state.z[i] += eta * self.signs[i] * self.grad[i] + eta * cfg.k * d;
                    theta[i] += eta * cfg.p * d;
                }
                self.domain.project_in_place(&mut state.z, &mut self.scratch);
                self.domain.project_in_place(theta, &mut self.scratch);
            }
        }
        state.step_count += 1;
        Ok(())
    }

    /// `x_k ← x_k exp(s (2η g_k(t) − η g_k(t−1))) / normalizer`, per player.
    fn omwu(&mut self, eta: f64, state: &mut DynamicsState) -> Result<()> {
        if self.domain.is_unconstrained() {
            return Err(Error::Domain("OMWU needs a product of simplices".into()));
        }
        if state.z.iter().any(|&q| !(q > 0.0)) {
            return Err(Error::Domain(format!(
                "OMWU reached a zero probability at step {}",
                state.step_count
            )));
        }
        let prev = state
            .prev_gradient
            .as_mut()
            .ok_or_else(|| Error::Precondition("OMWU needs a previous gradient".into()))?;
        self.game.gradient_into(&state.z, &mut self.grad);
        for (off, len) in self.domain.blocks() {
            let r = off..off + len;
            let e = &mut self.half[r.clone()];
            for (j, i) in r.clone().enumerate() {
                e[j] = self.signs[i] * eta * (2.0 * self.grad[i] - prev[i]);
            }
            let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let x = &mut state.z[r];
            let mut total = 0.0;
            for (q, &ej) in x.iter_mut().zip(e.iter()) {
                *q *= (ej - m).exp();
                total += *q;
            }
            x.iter_mut().for_each(|q| *q /= total);
        }
        prev.copy_from_slice(&self.grad);
        Ok(())
    }
}

fn one_step<G: Game + ?Sized>(
    game: &G,
    state: &DynamicsState,
    cfg: &DynamicsConfig,
) -> Result<DynamicsState> {
    cfg.validate()?;
    check_len("state", state.z.len(), game.dim())?;
    let mut next = state.clone();
    Stepper::new(game).step(cfg, &mut next)?;
    Ok(next)
}

pub fn step_gda<G: Game + ?Sized>(game: &G, state: &DynamicsState, eta: f64) -> Result<DynamicsState> {
    one_step(game, state, &DynamicsConfig::new(Method::Gda, eta))
}

pub fn step_ogda<G: Game + ?Sized>(game: &G, state: &DynamicsState, eta: f64) -> Result<DynamicsState> {
    one_step(game, state, &DynamicsConfig::new(Method::Ogda, eta))
}

pub fn step_eg<G: Game + ?Sized>(game: &G, state: &DynamicsState, eta: f64) -> Result<DynamicsState> {
    one_step(game, state, &DynamicsConfig::new(Method::Eg, eta))
}

pub fn step_omwu<G: Game + ?Sized>(game: &G, state: &DynamicsState, eta: f64) -> Result<DynamicsState> {
    one_step(game, state, &DynamicsConfig::new(Method::Omwu, eta))
}

pub fn step_kpv<G: Game + ?Sized>(
    game: &G,
    state: &DynamicsState,
    eta: f64,
    k: f64,
    p: f64,
) -> Result<DynamicsState> {
    one_step(game, state, &DynamicsConfig::kpv(eta, k, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::TeamGame;

    fn uniform4() -> Vec<f64> {
        vec![0.5; 8]
    }

    #[test]
    fn equilibrium_is_fixed_for_every_method() {
        let g = TeamGame::gmp(0.5).unwrap();
        for m in Method::ALL {
            let s = DynamicsState::new(&g, m, uniform4()).unwrap();
            let cfg = DynamicsConfig { k: -1.1, p: 0.3, ..DynamicsConfig::new(m, 0.2) };
            let next = one_step(&g, &s, &cfg).unwrap();
            for (a, b) in next.z.iter().zip(&s.z) {
                assert!((a - b).abs() < 1e-15, "{m}");
            }
        }
    }

    #[test]
    fn zero_game_fixes_every_point() {
        let g = TeamGame::constant(vec![2, 3], vec![2], 0.0).unwrap();
        let z = vec![0.9, 0.1, 0.2, 0.3, 0.5, 0.0, 1.0];
        let s = DynamicsState::new(&g, Method::Gda, z.clone()).unwrap();
        assert_eq!(step_gda(&g, &s, 0.3).unwrap().z, z);
    }

    #[test]
    fn first_optimistic_step_equals_plain_step() {
        let g = TeamGame::random(vec![2, 2], vec![2, 2], 8).unwrap();
        let z = vec![0.3, 0.7, 0.6, 0.4, 0.2, 0.8, 0.55, 0.45];
        let a = step_gda(&g, &DynamicsState::new(&g, Method::Gda, z.clone()).unwrap(), 0.1).unwrap();
        let b =
            step_ogda(&g, &DynamicsState::new(&g, Method::Ogda, z.clone()).unwrap(), 0.1).unwrap();
        assert_eq!(a.z, b.z);
    }

    #[test]
    fn kpv_without_feedback_is_gda() {
        let g = TeamGame::random(vec![3], vec![2, 2], 2).unwrap();
        let z = vec![0.2, 0.5, 0.3, 0.6, 0.4, 0.1, 0.9];
        let mut s = DynamicsState::new(&g, Method::Kpv, z.clone()).unwrap();
        s.theta = Some(vec![0.4, 0.4, 0.2, 0.5, 0.5, 0.5, 0.5]);
        let a = step_kpv(&g, &s, 0.07, 0.0, 0.4).unwrap();
        let b = step_gda(&g, &DynamicsState::new(&g, Method::Gda, z).unwrap(), 0.07).unwrap();
        assert_eq!(a.z, b.z);
    }

    #[test]
    fn kpv_updates_are_simultaneous() {
        let g = TeamGame::constant(vec![2], vec![2], 0.0).unwrap();
        let mut s = DynamicsState::new(&g, Method::Kpv, vec![0.6, 0.4, 0.5, 0.5]).unwrap();
        s.theta = Some(vec![0.4, 0.6, 0.5, 0.5]);
        let n = step_kpv(&g, &s, 0.1, -1.0, 0.5).unwrap();
        // z moves by ηk(z−θ) = -0.02, θ by ηp(z−θ) = 0.01, both from the old values
        assert!((n.z[0] - 0.58).abs() < 1e-15);
        assert!((n.theta.as_ref().unwrap()[0] - 0.41).abs() < 1e-15);
    }

    #[test]
    fn uniform_gradient_player_keeps_its_mix_under_omwu() {
        // team B player's payoff never depends on their own action
        let g = TeamGame::from_fn(vec![2], vec![3], |s| s[0] as f64).unwrap();
        let z = vec![0.3, 0.7, 0.2, 0.3, 0.5];
        let s = DynamicsState::new(&g, Method::Omwu, z.clone()).unwrap();
        let n = step_omwu(&g, &s, 0.2).unwrap();
        for i in 2..5 {
            assert!((n.z[i] - z[i]).abs() < 1e-15);
        }
        assert!(n.z[0] > z[0]);
    }

    #[test]
    fn omwu_rejects_boundary_points() {
        let g = TeamGame::gmp(0.5).unwrap();
        let s = DynamicsState::new(&g, Method::Omwu, vec![1.0, 0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5])
            .unwrap();
        assert!(matches!(step_omwu(&g, &s, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn eg_on_bilinear_game_matches_closed_form() {
        // interior: projection acts as the blockwise centering P, and the signed
        // field is affine with Jacobian A, so z' = z + ηPF + η²PAPF
        use nalgebra::{DMatrix, DVector};
        let g = TeamGame::new(vec![2], vec![2], vec![0.3, -1.0, -0.7, 0.9]).unwrap();
        let z = vec![0.45, 0.55, 0.6, 0.4];
        let eta = 0.05;
        let c = eta;
        let s = DMatrix::from_diagonal(&DVector::from_vec(g.coordinate_signs()));
        let a = &s * g.hessian(&z);
        let mut p = DMatrix::<f64>::identity(4, 4);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (2, 3), (3, 2), (3, 3)] {
            p[(i, j)] -= 0.5;
        }
        let f = &s * DVector::from_vec(g.gradient(&z));
        let pf = &p * &f;
        let expect = DVector::from_vec(z.clone()) + &pf * c + &p * &a * &pf * (c * c);
        let got = step_eg(&g, &DynamicsState::new(&g, Method::Eg, z).unwrap(), eta).unwrap();
        for i in 0..4 {
            assert!((got.z[i] - expect[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn bad_configs_are_rejected() {
        let g = TeamGame::gmp(0.5).unwrap();
        let s = DynamicsState::new(&g, Method::Gda, uniform4()).unwrap();
        assert!(matches!(step_gda(&g, &s, 0.0), Err(Error::Config(_))));
        assert!(matches!(step_gda(&g, &s, f64::NAN), Err(Error::Config(_))));
        assert!(DynamicsState::new(&g, Method::Gda, vec![0.5; 7]).is_err());
        assert!(DynamicsState::new(&g, Method::Gda, vec![0.9; 8]).is_err());
        assert_eq!("OGDA".parse::<Method>().unwrap(), Method::Ogda);
        assert!("sgd".parse::<Method>().is_err());
    }
}
