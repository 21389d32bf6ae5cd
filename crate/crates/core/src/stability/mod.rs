//! Local stability analysis around equilibria: the game operator `H`,
//! Jacobians of every dynamic, spectra, the weakly-stable test, Minty checks
//! and the sufficient condition for KPV-GDA with scalar gains.

mod eigen;
mod mvi;
mod operator;
mod weak;

pub use eigen::{eigenvalues, spectral_radius, MAX_DIM};
pub use mvi::{check_mvi, mvi_field, weak_mvi_search, WeakMviResult};
pub use operator::{
    dynamics_jacobian, eg_jacobian, field_operator, game_operator, gda_jacobian, kpv_jacobian,
    ogda_jacobian, INTERIOR_TOL,
};
pub use weak::{is_weakly_stable, WeakStability, Witness, INDIFFERENCE_TOL, NE_TOL, SUPPORT_TOL};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Method;
use crate::error::Result;
use crate::game::Game;
use crate::par;

/// Real parts at or below this (relative to the spectral scale) count as
/// non-positive.
const REAL_PART_TOL: f64 = 1e-9;
const GRID_POINTS: usize = 20;
const ETA_RANGE: (f64, f64) = (1e-3, 0.2);
const P_RANGE: (f64, f64) = (1e-4, 1.0);

/// Admissible feedback gains `k ∈ (lower, upper)`; `lower = None` is `-∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KInterval {
    pub lower: Option<f64>,
    pub upper: f64,
}

impl KInterval {
    pub fn contains(&self, k: f64) -> bool {
        k < self.upper && self.lower.is_none_or(|l| k > l)
    }

    /// Midpoint, or `upper - 1` when unbounded below.
    pub fn representative(&self) -> f64 {
        match self.lower {
            Some(l) => 0.5 * (l + self.upper),
            None => self.upper - 1.0,
        }
    }
}

/// Spectral data of an operator relevant to the sufficient condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpectrum {
    /// Row-major entries.
    pub matrix: Vec<Vec<f64>>,
    /// Eigenvalues as `[re, im]`.
    pub eigenvalues: Vec<[f64; 2]>,
    /// Eigenvalues with positive real part.
    pub e_set: Vec<[f64; 2]>,
    pub e_empty: bool,
    /// `max Re ρ` over the positive set.
    pub alpha: Option<f64>,
    /// `min |ρ|² / Re ρ` over the positive set.
    pub beta: Option<f64>,
    pub invertible: bool,
    pub condition_holds: bool,
    pub k_interval: Option<KInterval>,
}

impl OperatorSpectrum {
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let ev = eigenvalues(m)?;
        let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let e: Vec<Complex64> = ev.iter().copied().filter(|z| z.re > REAL_PART_TOL * scale).collect();
        let alpha = e.iter().map(|z| z.re).reduce(f64::max);
        let beta = e.iter().map(|z| z.norm_sqr() / z.re).reduce(f64::min);
        let invertible = !ev.is_empty()
            && ev.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min) > REAL_PART_TOL * scale;
        let condition_holds = invertible
            && match (alpha, beta) {
                (Some(a), Some(b)) => b > a,
                _ => true,
            };
        let k_interval = condition_holds.then(|| match (alpha, beta) {
            (Some(a), Some(b)) => KInterval { lower: Some(-b), upper: -a },
            _ => KInterval { lower: None, upper: 0.0 },
        });
        let pairs = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect();
        Ok(Self {
            // `+ 0.0` turns negative zeros into plain zeros
            matrix: m.row_iter().map(|r| r.iter().map(|x| x + 0.0).collect()).collect(),
            eigenvalues: pairs(&ev),
            e_empty: e.is_empty(),
            e_set: pairs(&e),
            alpha,
            beta,
            invertible,
            condition_holds,
            k_interval,
        })
    }
}

/// Gains `(η, k, p)` for which the KPV Jacobian has spectral radius below one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub eta: f64,
    pub k: f64,
    pub p: f64,
    pub spectral_radius: f64,
}

/// Spectrum of one dynamic's Jacobian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsSpectrum {
    pub method: Method,
    pub eta: f64,
    pub k: f64,
    pub p: f64,
    pub eigenvalues: Vec<[f64; 2]>,
    pub spectral_radius: f64,
}

impl DynamicsSpectrum {
    pub fn compute<G: Game + ?Sized>(
        method: Method,
        game: &G,
        z: &[f64],
        eta: f64,
        k: f64,
        p: f64,
    ) -> Result<Self> {
        let j = dynamics_jacobian(method, game, z, eta, k, p)?;
        let ev = eigenvalues(&j)?;
        Ok(Self {
            method,
            eta,
            k,
            p,
            spectral_radius: ev.iter().map(|z| z.norm()).fold(0.0, f64::max),
            eigenvalues: ev.iter().map(|z| [z.re, z.im]).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub point: Vec<f64>,
    /// The game operator `H` and its sufficient-condition data.
    pub game_operator: OperatorSpectrum,
    /// Linearization of the implemented projected field; the gains of the
    /// simulated dynamics are certified against this operator.
    pub field_operator: OperatorSpectrum,
    pub certificate: Option<Certificate>,
    #[serde(default)]
    pub dynamics: Vec<DynamicsSpectrum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_stability: Option<WeakStability>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl StabilityReport {
    pub fn alpha(&self) -> Option<f64> {
        self.game_operator.alpha
    }

    pub fn beta(&self) -> Option<f64> {
        self.game_operator.beta
    }

    pub fn condition_holds(&self) -> bool {
        self.game_operator.condition_holds
    }

    pub fn k_interval(&self) -> Option<KInterval> {
        self.game_operator.k_interval
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `n` log-spaced values from `hi` down to `lo`.
fn log_grid_descending(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| hi * (lo / hi).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Sufficient condition for local convergence of KPV-GDA with `K = kI`,
/// `P = pI`: with `E` the eigenvalues of `H` in the open right half-plane,
/// `α = max Re ρ`, `β = min |ρ|²/Re ρ`, the condition is `H` invertible and
/// `β > α`, admitting `k ∈ (−β, −α)`.
///
/// When it holds for the implemented field operator as well, a log grid of
/// `(η, p)` is scanned (largest first) at the representative `k` of that
/// operator's interval and the first pair with spectral radius below one is
/// returned as a certificate.
pub fn check_sufficient<G: Game + ?Sized>(game: &G, z: &[f64]) -> Result<StabilityReport> {
    let h = game_operator(game, z)?;
    let g = field_operator(game, z)?;
    let h_spec = OperatorSpectrum::from_matrix(&h)?;
    let g_spec = OperatorSpectrum::from_matrix(&g)?;
    let mut warnings = Vec::new();
    if !h_spec.invertible {
        warnings.push("game operator is singular; the sufficient condition fails".into());
    }
    let certificate = match g_spec.k_interval {
        Some(interval) if h_spec.condition_holds => {
            let k = interval.representative();
            let etas = log_grid_descending(ETA_RANGE.0, ETA_RANGE.1, GRID_POINTS);
            let ps = log_grid_descending(P_RANGE.0, P_RANGE.1, GRID_POINTS);
            let radius = |i: usize| {
                let (eta, p) = (etas[i / GRID_POINTS], ps[i % GRID_POINTS]);
                spectral_radius(&kpv_jacobian(&g, eta, k, p)).unwrap_or(f64::INFINITY)
            };
            let hit = par::find_first(GRID_POINTS * GRID_POINTS, |i| radius(i) < 1.0);
            if hit.is_none() {
                warnings.push("no (eta, p) pair on the search grid is certified".into());
            }
            hit.map(|i| Certificate {
                eta: etas[i / GRID_POINTS],
                k,
                p: ps[i % GRID_POINTS],
                spectral_radius: radius(i),
            })
        }
        _ => None,
    };
    Ok(StabilityReport {
        point: z.to_vec(),
        game_operator: h_spec,
        field_operator: g_spec,
        certificate,
        dynamics: Vec::new(),
        weak_stability: None,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::TeamGame;

    #[test]
    fn gmp_half_interval() {
        let g = TeamGame::gmp(0.5).unwrap();
        let r = check_sufficient(&g, &[0.5; 8]).unwrap();
        assert!((r.alpha().unwrap() - 1.0).abs() < 1e-8);
        assert!((r.beta().unwrap() - 5.0).abs() < 1e-8);
        let k = r.k_interval().unwrap();
        assert!((k.lower.unwrap() + 5.0).abs() < 1e-8 && (k.upper + 1.0).abs() < 1e-8);
        let c = r.certificate.unwrap();
        assert!(c.spectral_radius < 1.0);
    }

    #[test]
    fn left_half_plane_operator_admits_any_negative_gain() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 3.0, -3.0, -2.0]);
        let s = OperatorSpectrum::from_matrix(&m).unwrap();
        assert!(s.e_empty && s.condition_holds);
        let k = s.k_interval.unwrap();
        assert_eq!(k.lower, None);
        assert!(k.contains(-1e6) && !k.contains(0.5));
    }

    #[test]
    fn constant_game_is_singular() {
        let g = TeamGame::constant(vec![2, 2], vec![2, 2], 3.0).unwrap();
        let r = check_sufficient(&g, &[0.5; 8]).unwrap();
        assert!(r.game_operator.matrix.iter().flatten().all(|&x| x == 0.0));
        assert!(!r.condition_holds() && r.certificate.is_none());
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn boundary_points_are_rejected() {
        let g = TeamGame::gmp(0.5).unwrap();
        let z = [1.0, 0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5];
        assert!(matches!(check_sufficient(&g, &z), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn grid_is_descending_and_spans_the_range() {
        let v = log_grid_descending(1e-3, 0.2, 20);
        assert!((v[0] - 0.2).abs() < 1e-15 && (v[19] - 1e-3).abs() < 1e-15);
        assert!(v.windows(2).all(|w| w[0] > w[1]));
    }
}
