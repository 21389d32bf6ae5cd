//! Game representations behind one gradient/Hessian interface.
//!
//! Every game exposes a utility `U` for team B (the maximizers); team A
//! receives `-U`. Points are flat coordinate vectors: the blocks of team A
//! first, then team B, in player order.

mod congestion;
mod io;
mod tensor;
mod wgan;

pub use congestion::{CongestionGame, EdgeCost};
pub use io::{load_congestion, load_team_game, save_congestion, save_team_game, TeamGameDoc};
pub use tensor::{Family, TeamGame};
pub use wgan::TeamWgan;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::simplex::Domain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Team {
    /// Minimizes `U`.
    A,
    /// Maximizes `U`.
    B,
}

impl Team {
    /// `-1` for the minimizing team, `+1` for the maximizing one.
    pub fn sign(self) -> f64 {
        match self {
            Team::A => -1.0,
            Team::B => 1.0,
        }
    }
}

/// Common interface of the tensor games and the polynomial Team-WGAN game.
pub trait Game: Send + Sync {
    fn domain(&self) -> Domain;

    /// Team of every coordinate block (one block per player).
    fn block_teams(&self) -> Vec<Team>;

    fn utility(&self, z: &[f64]) -> f64;

    /// Writes `dU/dz` into `out`.
    fn gradient_into(&self, z: &[f64], out: &mut [f64]);

    fn hessian(&self, z: &[f64]) -> DMatrix<f64>;

    /// Distance-to-equilibrium measure reported in trajectories: the NE-gap
    /// for normal-form games.
    fn equilibrium_gap(&self, z: &[f64]) -> f64;

    fn dim(&self) -> usize {
        self.domain().dim()
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; z.len()];
        self.gradient_into(z, &mut g);
        g
    }

    /// `+1` on team B coordinates, `-1` on team A coordinates.
    fn coordinate_signs(&self) -> Vec<f64> {
        let domain = self.domain();
        let teams = self.block_teams();
        domain
            .shape
            .iter()
            .zip(teams)
            .flat_map(|(&len, t)| std::iter::repeat_n(t.sign(), len))
            .collect()
    }
}

/// A mixed strategy profile: one probability vector per player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub const TOL: f64 = 1e-12;

    pub fn new(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>) -> Result<Self> {
        let p = Self { x, y };
        for v in p.x.iter().chain(&p.y) {
            if v.iter().any(|&q| !(q >= 0.0) || !q.is_finite()) {
                return Err(Error::Domain("probabilities must be finite and nonnegative".into()));
            }
            if (v.iter().sum::<f64>() - 1.0).abs() > Self::TOL {
                return Err(Error::Domain("probability vector does not sum to 1".into()));
            }
        }
        Ok(p)
    }

    pub fn uniform(team_a: &[usize], team_b: &[usize]) -> Self {
        let u = |n: &usize| vec![1.0 / *n as f64; *n];
        Self { x: team_a.iter().map(u).collect(), y: team_b.iter().map(u).collect() }
    }

    /// Pure profile from one action per player.
    pub fn pure(team_a: &[usize], team_b: &[usize], actions: &[usize]) -> Self {
        let one_hot = |n: usize, k: usize| {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            v
        };
        let (a, b) = actions.split_at(team_a.len());
        Self {
            x: team_a.iter().zip(a).map(|(&n, &k)| one_hot(n, k)).collect(),
            y: team_b.iter().zip(b).map(|(&n, &k)| one_hot(n, k)).collect(),
        }
    }

    /// Concatenated coordinates, team A first.
    pub fn to_coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).flatten().copied().collect()
    }

    pub fn from_coords(team_a: &[usize], team_b: &[usize], z: &[f64]) -> Result<Self> {
        let total: usize = team_a.iter().chain(team_b).sum();
        check_len("coordinates", z.len(), total)?;
        let mut at = 0;
        let mut take = |n: usize| {
            let v = z[at..at + n].to_vec();
            at += n;
            v
        };
        let x = team_a.iter().map(|&n| take(n)).collect();
        let y = team_b.iter().map(|&n| take(n)).collect();
        Ok(Self { x, y })
    }
}

/// Either kind of game, for configuration-driven code paths.
#[derive(Clone, Debug)]
pub enum AnyGame {
    Team(TeamGame),
    Wgan(TeamWgan),
}

impl AnyGame {
    pub fn as_team(&self) -> Option<&TeamGame> {
        match self {
            AnyGame::Team(g) => Some(g),
            AnyGame::Wgan(_) => None,
        }
    }
}

impl Game for AnyGame {
    fn domain(&self) -> Domain {
        match self {
            AnyGame::Team(g) => g.domain(),
            AnyGame::Wgan(g) => g.domain(),
        }
    }

    fn block_teams(&self) -> Vec<Team> {
        match self {
            AnyGame::Team(g) => g.block_teams(),
            AnyGame::Wgan(g) => g.block_teams(),
        }
    }

    fn utility(&self, z: &[f64]) -> f64 {
        match self {
            AnyGame::Team(g) => g.utility(z),
            AnyGame::Wgan(g) => g.utility(z),
        }
    }

    fn gradient_into(&self, z: &[f64], out: &mut [f64]) {
        match self {
            AnyGame::Team(g) => g.gradient_into(z, out),
            AnyGame::Wgan(g) => g.gradient_into(z, out),
        }
    }

    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        match self {
            AnyGame::Team(g) => g.hessian(z),
            AnyGame::Wgan(g) => g.hessian(z),
        }
    }

    fn equilibrium_gap(&self, z: &[f64]) -> f64 {
        match self {
            AnyGame::Team(g) => g.equilibrium_gap(z),
            AnyGame::Wgan(g) => g.equilibrium_gap(z),
        }
    }
}
