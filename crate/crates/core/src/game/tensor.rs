use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Game, MixedProfile, Team};
use crate::error::{check_len, Error, Result};
use crate::metrics;
use crate::simplex::Domain;

/// Upper bound on players; keeps the contraction kernels allocation-free.
pub const MAX_PLAYERS: usize = 32;

/// Where a game came from, carried through serialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Gmp { omega: f64 },
    ModifiedGmp,
    MultiplayerMatchingPennies,
    MatchingPennies,
    Random { seed: u64 },
    Congestion,
}

/// Two-team zero-sum normal-form game stored as a dense payoff tensor.
///
/// The tensor has one axis per player (team A players first) in row-major
/// order and holds team B's payoff `U`. Team A's payoff is `-U` by
/// construction and is never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct TeamGame {
    team_a: Vec<usize>,
    team_b: Vec<usize>,
    counts: Vec<usize>,
    offsets: Vec<usize>,
    strides: Vec<usize>,
    payoff: Vec<f64>,
    family: Option<Family>,
}

impl TeamGame {
    pub fn new(team_a: Vec<usize>, team_b: Vec<usize>, payoff: Vec<f64>) -> Result<Self> {
        if team_a.is_empty() || team_b.is_empty() {
            return Err(Error::Domain("each team needs at least one player".into()));
        }
        let counts: Vec<usize> = team_a.iter().chain(&team_b).copied().collect();
        if counts.contains(&0) {
            return Err(Error::Domain("every player needs at least one strategy".into()));
        }
        if counts.len() > MAX_PLAYERS {
            return Err(Error::Capability(format!(
                "{} players exceeds the limit of {MAX_PLAYERS}",
                counts.len()
            )));
        }
        let entries = counts
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Capability("payoff tensor too large".into()))?;
        check_len("payoff tensor", payoff.len(), entries)?;
        if payoff.iter().any(|u| !u.is_finite()) {
            return Err(Error::Domain("payoff entries must be finite".into()));
        }
        let mut strides = vec![1usize; counts.len()];
        for i in (0..counts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * counts[i + 1];
        }
        let offsets = counts
            .iter()
            .scan(0usize, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect();
        Ok(Self { team_a, team_b, counts, offsets, strides, payoff, family: None })
    }

    /// Builds the tensor by evaluating `f` on every pure profile.
    pub fn from_fn(
        team_a: Vec<usize>,
        team_b: Vec<usize>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let counts: Vec<usize> = team_a.iter().chain(&team_b).copied().collect();
        let total: usize = counts.iter().product();
        let mut idx = vec![0usize; counts.len()];
        let mut payoff = Vec::with_capacity(total);
        for _ in 0..total {
            payoff.push(f(&idx));
            advance(&mut idx, &counts);
        }
        Self::new(team_a, team_b, payoff)
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = Some(family);
        self
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn team_a(&self) -> &[usize] {
        &self.team_a
    }

    pub fn team_b(&self) -> &[usize] {
        &self.team_b
    }

    /// Strategy counts of all players, team A first.
    pub fn strategy_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_players(&self) -> usize {
        self.counts.len()
    }

    pub fn payoff(&self) -> &[f64] {
        &self.payoff
    }

    pub fn player_team(&self, player: usize) -> Team {
        if player < self.team_a.len() {
            Team::A
        } else {
            Team::B
        }
    }

    /// Coordinate range of `player` inside a flat profile vector.
    pub fn player_range(&self, player: usize) -> std::ops::Range<usize> {
        self.offsets[player]..self.offsets[player] + self.counts[player]
    }

    pub fn total_coordinates(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Team B payoff at a pure profile.
    pub fn entry(&self, actions: &[usize]) -> f64 {
        let flat: usize = actions.iter().zip(&self.strides).map(|(a, s)| a * s).sum();
        self.payoff[flat]
    }

    pub fn check_coords(&self, z: &[f64]) -> Result<()> {
        check_len("profile coordinates", z.len(), self.total_coordinates())
    }

    fn coords_of(&self, profile: &MixedProfile) -> Result<Vec<f64>> {
        let shape_ok = profile.x.len() == self.team_a.len()
            && profile.y.len() == self.team_b.len()
            && profile.x.iter().chain(&profile.y).map(Vec::len).eq(self.counts.iter().copied());
        if !shape_ok {
            return Err(Error::Dimension("profile shape does not match the game".into()));
        }
        Ok(profile.to_coords())
    }

    /// Expected team B payoff under a mixed profile.
    pub fn evaluate_utility(&self, profile: &MixedProfile) -> Result<f64> {
        let z = self.coords_of(profile)?;
        Ok(self.utility(&z))
    }

    /// Per-player partial derivatives of the expected utility.
    pub fn gradient_profile(&self, profile: &MixedProfile) -> Result<Vec<Vec<f64>>> {
        let z = self.coords_of(profile)?;
        let g = self.gradient(&z);
        Ok((0..self.num_players()).map(|i| g[self.player_range(i)].to_vec()).collect())
    }

    pub fn hessian_blocks(&self, profile: &MixedProfile) -> Result<DMatrix<f64>> {
        let z = self.coords_of(profile)?;
        Ok(self.hessian(&z))
    }

    /// Utility and gradient in one pass; `grad` is overwritten.
    pub fn contract_with_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        self.contract(z, Some(grad))
    }

    /// Value and (optionally) gradient in one pass over the tensor.
    fn contract(&self, z: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let p = self.counts.len();
        let mut idx = [0usize; MAX_PLAYERS];
        let mut pre = [1.0f64; MAX_PLAYERS + 1];
        let mut suf = [1.0f64; MAX_PLAYERS + 1];
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut value = 0.0;
        for &t in &self.payoff {
            for j in 0..p {
                pre[j + 1] = pre[j] * z[self.offsets[j] + idx[j]];
            }
            value += t * pre[p];
            if let Some(g) = grad.as_deref_mut() {
                suf[p] = 1.0;
                for j in (0..p).rev() {
                    suf[j] = suf[j + 1] * z[self.offsets[j] + idx[j]];
                }
                for i in 0..p {
                    g[self.offsets[i] + idx[i]] += t * pre[i] * suf[i + 1];
                }
            }
            advance(&mut idx[..p], &self.counts);
        }
        value
    }

    // ---- families ----

    /// Generalized matching pennies with coordination reward `omega`.
    ///
    /// Two players per team, actions `H = 0`, `T = 1`. A team "agrees" when
    /// both members pick the same action. Both teams agreeing plays matching
    /// pennies (team A wins on a match); a lone agreeing team earns `omega`
    /// from the other; no agreement on either side pays nothing.
    pub fn gmp(omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Domain(format!("omega must be positive, got {omega}")));
        }
        if omega > 1.0 {
            return Err(Error::Domain(format!("omega must not exceed 1, got {omega}")));
        }
        if omega == 1.0 {
            log::warn!("omega = 1 adds pure equilibria; the mixed equilibrium is no longer unique");
        }
        let w = omega;
        let team_a_payoff = [[1.0, w, -1.0], [-w, 0.0, -w], [-1.0, w, 1.0]];
        Ok(Self::from_team_configs(team_a_payoff)?.with_family(Family::Gmp { omega }))
    }

    /// The GMP variant whose average iterates stall away from equilibrium.
    pub fn modified_gmp() -> Result<Self> {
        let team_a_payoff = [[2.0, 0.5, -2.0], [-0.5, 0.0, -0.5], [-1.0, 0.5, 1.0]];
        Ok(Self::from_team_configs(team_a_payoff)?.with_family(Family::ModifiedGmp))
    }

    /// Two-versus-two matching pennies; GMP(1/2) with the winning team flipped.
    pub fn multiplayer_matching_pennies() -> Result<Self> {
        let team_a_payoff = [[-1.0, -0.5, 1.0], [0.5, 0.0, 0.5], [1.0, -0.5, -1.0]];
        Ok(Self::from_team_configs(team_a_payoff)?.with_family(Family::MultiplayerMatchingPennies))
    }

    /// Classic one-versus-one matching pennies; the maximizer wins on a match.
    pub fn matching_pennies() -> Result<Self> {
        Ok(Self::new(vec![2], vec![2], vec![1.0, -1.0, -1.0, 1.0])?
            .with_family(Family::MatchingPennies))
    }

    /// 2v2 binary game from a team-A payoff table indexed by team
    /// configuration: 0 = both H, 1 = disagree, 2 = both T.
    fn from_team_configs(team_a_payoff: [[f64; 3]; 3]) -> Result<Self> {
        let config = |a: usize, b: usize| match (a, b) {
            (0, 0) => 0,
            (1, 1) => 2,
            _ => 1,
        };
        Self::from_fn(vec![2, 2], vec![2, 2], |s| {
            -team_a_payoff[config(s[0], s[1])][config(s[2], s[3])]
        })
    }

    /// Payoffs i.i.d. uniform on `[-1, 1]` from a seeded generator.
    pub fn random(team_a: Vec<usize>, team_b: Vec<usize>, seed: u64) -> Result<Self> {
        if team_a.is_empty() || team_b.is_empty() || team_a.iter().chain(&team_b).any(|&n| n == 0)
        {
            return Err(Error::Domain("random games need players with at least one strategy".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::from_fn(team_a, team_b, |_| rng.gen_range(-1.0..=1.0))?
            .with_family(Family::Random { seed }))
    }

    pub fn constant(team_a: Vec<usize>, team_b: Vec<usize>, value: f64) -> Result<Self> {
        Self::from_fn(team_a, team_b, |_| value)
    }
}

/// Odometer increment, last axis fastest.
fn advance(idx: &mut [usize], counts: &[usize]) {
    for j in (0..idx.len()).rev() {
        idx[j] += 1;
        if idx[j] < counts[j] {
            return;
        }
        idx[j] = 0;
    }
}

impl Game for TeamGame {
    fn domain(&self) -> Domain {
        Domain::simplices(self.counts.clone())
    }

    fn block_teams(&self) -> Vec<Team> {
        (0..self.num_players()).map(|i| self.player_team(i)).collect()
    }

    fn utility(&self, z: &[f64]) -> f64 {
        self.contract(z, None)
    }

    fn gradient_into(&self, z: &[f64], out: &mut [f64]) {
        self.contract(z, Some(out));
    }

    /// Second partials. Entries pairing two players are the expected utility
    /// with both pinned; blocks within one player are zero (multilinearity).
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let p = self.counts.len();
        let d = self.total_coordinates();
        let mut h = DMatrix::zeros(d, d);
        let mut idx = [0usize; MAX_PLAYERS];
        let mut prob = [0.0f64; MAX_PLAYERS];
        let mut pre = [1.0f64; MAX_PLAYERS + 1];
        let mut suf = [1.0f64; MAX_PLAYERS + 1];
        for &t in &self.payoff {
            for j in 0..p {
                prob[j] = z[self.offsets[j] + idx[j]];
                pre[j + 1] = pre[j] * prob[j];
            }
            suf[p] = 1.0;
            for j in (0..p).rev() {
                suf[j] = suf[j + 1] * prob[j];
            }
            for i in 0..p {
                let mut mid = 1.0;
                for j in i + 1..p {
                    let w = t * pre[i] * mid * suf[j + 1];
                    let (a, b) = (self.offsets[i] + idx[i], self.offsets[j] + idx[j]);
                    h[(a, b)] += w;
                    h[(b, a)] += w;
                    mid *= prob[j];
                }
            }
            advance(&mut idx[..p], &self.counts);
        }
        h
    }

    fn equilibrium_gap(&self, z: &[f64]) -> f64 {
        metrics::ne_gap_coords(self, z)
    }
}
