use serde::{Deserialize, Serialize};

use super::{Family, TeamGame};
use crate::error::{Error, Result};

/// Cost of one edge as a function of its load, tabulated for loads `1..=N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCost {
    pub costs: Vec<f64>,
}

impl EdgeCost {
    /// Cost paid by each user when `load` players share the edge.
    pub fn at(&self, load: usize) -> f64 {
        self.costs[load - 1]
    }
}

/// Unweighted congestion game; each strategy is a set of edge indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CongestionGame {
    pub num_players: usize,
    pub edges: Vec<EdgeCost>,
    pub strategies: Vec<Vec<Vec<usize>>>,
}

impl CongestionGame {
    pub fn new(
        num_players: usize,
        edges: Vec<EdgeCost>,
        strategies: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let g = Self { num_players, edges, strategies };
        g.validate()?;
        Ok(g)
    }

    /// `players` users choosing one of `costs.len()` parallel edges.
    pub fn parallel_edges(players: usize, costs: Vec<Vec<f64>>) -> Result<Self> {
        let m = costs.len();
        let edges = costs.into_iter().map(|costs| EdgeCost { costs }).collect();
        let strategies = vec![(0..m).map(|e| vec![e]).collect(); players];
        Self::new(players, edges, strategies)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_players == 0 {
            return Err(Error::Domain("congestion game needs players".into()));
        }
        if self.strategies.len() != self.num_players {
            return Err(Error::Dimension(format!(
                "{} strategy sets for {} players",
                self.strategies.len(),
                self.num_players
            )));
        }
        for (e, edge) in self.edges.iter().enumerate() {
            if edge.costs.len() < self.num_players || edge.costs.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain(format!(
                    "edge {e} must tabulate a finite cost for every load 1..={}",
                    self.num_players
                )));
            }
        }
        for (i, set) in self.strategies.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::Domain(format!("player {i} has no strategies")));
            }
            for s in set {
                if s.is_empty() {
                    return Err(Error::Domain(format!("player {i} has an empty strategy")));
                }
                if let Some(&e) = s.iter().find(|&&e| e >= self.edges.len()) {
                    return Err(Error::Domain(format!("player {i} uses unknown edge {e}")));
                }
            }
        }
        Ok(())
    }

    fn loads(&self, profile: &[usize]) -> Vec<usize> {
        let mut load = vec![0usize; self.edges.len()];
        for (i, &s) in profile.iter().enumerate() {
            for &e in &self.strategies[i][s] {
                load[e] += 1;
            }
        }
        load
    }

    /// Rosenthal potential: `sum_e sum_{j <= load_e} c_e(j)`.
    pub fn potential(&self, profile: &[usize]) -> f64 {
        self.loads(profile)
            .iter()
            .zip(&self.edges)
            .map(|(&l, edge)| (1..=l).map(|j| edge.at(j)).sum::<f64>())
            .sum()
    }

    /// Cost of `player` at a pure profile.
    pub fn player_cost(&self, player: usize, profile: &[usize]) -> f64 {
        let load = self.loads(profile);
        self.strategies[player][profile[player]].iter().map(|&e| self.edges[e].at(load[e])).sum()
    }

    /// Team game whose minimizing team is the congestion players and whose
    /// maximizing team is `n` single-strategy dummies; the tensor is the
    /// potential, so team A pays `Φ` and team B receives it.
    pub fn to_team_game(&self) -> Result<TeamGame> {
        let team_a: Vec<usize> = self.strategies.iter().map(Vec::len).collect();
        let team_b = vec![1usize; self.num_players];
        let n = self.num_players;
        Ok(TeamGame::from_fn(team_a, team_b, |s| self.potential(&s[..n]))?
            .with_family(Family::Congestion))
    }

    /// Expected cost of `player` under independent mixed strategies, with the
    /// player's own strategy optionally replaced by a pure one.
    pub fn expected_cost(&self, player: usize, mixed: &[Vec<f64>], pin: Option<usize>) -> f64 {
        let counts: Vec<usize> = self.strategies.iter().map(Vec::len).collect();
        let mut idx = vec![0usize; self.num_players];
        let mut total = 0.0;
        loop {
            let weight: f64 = idx
                .iter()
                .enumerate()
                .map(|(j, &s)| match pin {
                    Some(k) if j == player => f64::from(u8::from(s == k)),
                    _ => mixed[j][s],
                })
                .product();
            if weight != 0.0 {
                total += weight * self.player_cost(player, &idx);
            }
            let mut j = self.num_players;
            loop {
                if j == 0 {
                    return total;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < counts[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    /// Largest expected cost reduction any single player can obtain by
    /// switching to a pure strategy.
    pub fn max_deviation_gain(&self, mixed: &[Vec<f64>]) -> f64 {
        (0..self.num_players)
            .map(|i| {
                let current = self.expected_cost(i, mixed, None);
                (0..self.strategies[i].len())
                    .map(|k| current - self.expected_cost(i, mixed, Some(k)))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}
