use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Game, Team};
use crate::error::{Error, Result};
use crate::simplex::Domain;

/// Two-generator, two-discriminator WGAN objective on a two-component
/// Gaussian mixture with means `±mu` and weights `pi1`, `1 - pi1`:
///
/// `f(θ, p; v, w) = (π1 − π2) vᵀμ − 2p vᵀθ + vᵀθ + Σᵢ wᵢ(μᵢ² − θᵢ²)`
///
/// Generators `(θ, p)` minimize, discriminators `(v, w)` maximize. Points are
/// laid out as `[θ (n), p | v (n), w (n)]` on an unconstrained domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeamWgan {
    mu: Vec<f64>,
    pi1: f64,
}

impl TeamWgan {
    pub fn new(mu: Vec<f64>, pi1: f64) -> Result<Self> {
        if mu.is_empty() || mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::Domain("mu must be a nonempty finite vector".into()));
        }
        if !(pi1 > 0.0 && pi1 < 1.0) || pi1 == 0.5 {
            return Err(Error::Domain(format!("pi1 must lie in (0, 1) and differ from 1/2, got {pi1}")));
        }
        Ok(Self { mu, pi1 })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn pi1(&self) -> f64 {
        self.pi1
    }

    pub fn pi2(&self) -> f64 {
        1.0 - self.pi1
    }

    /// Dimension of θ.
    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// The two equilibria `(θ, p)`: `(μ, π1)` and `(−μ, π2)`, with `v = w = 0`.
    pub fn equilibria(&self) -> [(Vec<f64>, f64); 2] {
        [
            (self.mu.clone(), self.pi1),
            (self.mu.iter().map(|m| -m).collect(), self.pi2()),
        ]
    }

    /// Full equilibrium point of the given branch.
    pub fn equilibrium_point(&self, branch: usize) -> Vec<f64> {
        let (theta, p) = &self.equilibria()[branch];
        let mut z = theta.clone();
        z.push(*p);
        z.extend(std::iter::repeat_n(0.0, 2 * self.n()));
        z
    }

    /// `(branch, max |θ − θ*|, |p − p*|)` for the nearest equilibrium branch.
    pub fn parameter_error(&self, z: &[f64]) -> (usize, f64, f64) {
        let n = self.n();
        let errs = self.equilibria().map(|(theta, p)| {
            let dt = z[..n].iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (dt, (z[n] - p).abs())
        });
        let branch = if errs[0].0.max(errs[0].1) <= errs[1].0.max(errs[1].1) { 0 } else { 1 };
        (branch, errs[branch].0, errs[branch].1)
    }

    fn split<'a>(&self, z: &'a [f64]) -> (&'a [f64], f64, &'a [f64], &'a [f64]) {
        let n = self.n();
        (&z[..n], z[n], &z[n + 1..2 * n + 1], &z[2 * n + 1..3 * n + 1])
    }
}

impl Game for TeamWgan {
    fn domain(&self) -> Domain {
        let n = self.n();
        Domain::unconstrained(vec![n, 1, n, n])
    }

    fn block_teams(&self) -> Vec<Team> {
        vec![Team::A, Team::A, Team::B, Team::B]
    }

    fn utility(&self, z: &[f64]) -> f64 {
        let (theta, p, v, w) = self.split(z);
        let dpi = self.pi1 - self.pi2();
        (0..self.n())
            .map(|i| {
                dpi * v[i] * self.mu[i] - 2.0 * p * v[i] * theta[i]
                    + v[i] * theta[i]
                    + w[i] * (self.mu[i] * self.mu[i] - theta[i] * theta[i])
            })
            .sum()
    }

    fn gradient_into(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n();
        let (theta, p, v, w) = self.split(z);
        let dpi = self.pi1 - self.pi2();
        let mut dp = 0.0;
        for i in 0..n {
            out[i] = (1.0 - 2.0 * p) * v[i] - 2.0 * w[i] * theta[i];
            dp -= 2.0 * v[i] * theta[i];
            out[n + 1 + i] = dpi * self.mu[i] + (1.0 - 2.0 * p) * theta[i];
            out[2 * n + 1 + i] = self.mu[i] * self.mu[i] - theta[i] * theta[i];
        }
        out[n] = dp;
    }

    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        let (theta, p, v, w) = self.split(z);
        let d = 3 * n + 1;
        let mut h = DMatrix::zeros(d, d);
        let mut sym = |a: usize, b: usize, val: f64| {
            h[(a, b)] = val;
            h[(b, a)] = val;
        };
        for i in 0..n {
            let (vi, wi) = (n + 1 + i, 2 * n + 1 + i);
            sym(i, i, -2.0 * w[i]);
            sym(i, n, -2.0 * v[i]);
            sym(i, vi, 1.0 - 2.0 * p);
            sym(i, wi, -2.0 * theta[i]);
            sym(n, vi, -2.0 * theta[i]);
        }
        h
    }

    /// Distance of the generator parameters to the nearest equilibrium branch.
    fn equilibrium_gap(&self, z: &[f64]) -> f64 {
        let n = self.n();
        self.equilibria()
            .iter()
            .map(|(theta, p)| {
                let s: f64 = z[..n].iter().zip(theta).map(|(a, b)| (a - b).powi(2)).sum();
                (s + (z[n] - p).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn game() -> TeamWgan {
        TeamWgan::new(vec![1.0, -0.5], 0.7).unwrap()
    }

    #[test]
    fn rejects_degenerate_weights() {
        for pi in [0.0, 0.5, 1.0, -0.2, 1.3] {
            assert!(matches!(TeamWgan::new(vec![1.0], pi), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn zero_point_has_zero_value() {
        assert_eq!(game().utility(&[0.0; 7]), 0.0);
    }

    #[test]
    fn equilibria_are_stationary() {
        let g = game();
        for b in 0..2 {
            let z = g.equilibrium_point(b);
            assert!(g.gradient(&z).iter().all(|x| x.abs() < 1e-15));
            assert_eq!(g.equilibrium_gap(&z), 0.0);
            assert_eq!(g.parameter_error(&z), (b, 0.0, 0.0));
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let g = game();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let z: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let grad = g.gradient(&z);
            for i in 0..7 {
                let (mut a, mut b) = (z.clone(), z.clone());
                a[i] += 1e-5;
                b[i] -= 1e-5;
                let fd = (g.utility(&a) - g.utility(&b)) / 2e-5;
                assert!((fd - grad[i]).abs() <= 1e-6 * grad[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let g = game();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let z: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = g.hessian(&z);
        for j in 0..7 {
            let (mut a, mut b) = (z.clone(), z.clone());
            a[j] += 1e-5;
            b[j] -= 1e-5;
            let (ga, gb) = (g.gradient(&a), g.gradient(&b));
            for i in 0..7 {
                assert!(((ga[i] - gb[i]) / 2e-5 - h[(i, j)]).abs() < 1e-5);
            }
        }
    }
}
