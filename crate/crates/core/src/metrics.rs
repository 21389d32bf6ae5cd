//! Equilibrium-quality measurements.
//!
//! Best responses are found by enumerating pure strategies: by multilinearity
//! the partial derivative of `U` along a pure strategy is exactly the payoff
//! of switching to it, so one gradient evaluation yields every deviation.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::game::{Game, MixedProfile, TeamGame};

/// One row of a metric curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub step: usize,
    pub ne_gap: f64,
    pub dist_ref: Option<f64>,
    pub utility: f64,
}

fn coords(game: &TeamGame, profile: &MixedProfile) -> Result<Vec<f64>> {
    let z = profile.to_coords();
    check_len("profile coordinates", z.len(), game.total_coordinates())?;
    let shapes_match =
        profile.x.iter().chain(&profile.y).map(Vec::len).eq(game.strategy_counts().iter().copied());
    if !shapes_match || profile.x.len() != game.team_a().len() {
        return Err(Error::Dimension("profile shape does not match the game".into()));
    }
    Ok(z)
}

/// Best payoff `player` can reach by a unilateral deviation; team A players
/// are scored by `-U`.
pub fn best_response_value(game: &TeamGame, player: usize, profile: &MixedProfile) -> Result<f64> {
    if player >= game.num_players() {
        return Err(Error::Dimension(format!(
            "player {player} out of range for a {}-player game",
            game.num_players()
        )));
    }
    let z = coords(game, profile)?;
    let g = game.gradient(&z);
    Ok(best_in_block(game, player, &g))
}

fn best_in_block(game: &TeamGame, player: usize, grad: &[f64]) -> f64 {
    let sign = game.player_team(player).sign();
    grad[game.player_range(player)].iter().map(|&v| sign * v).fold(f64::NEG_INFINITY, f64::max)
}

/// Per-player regret `max_k u_i(k, z_-i) - u_i(z)`, clipped at zero.
pub fn ne_gap_terms(game: &TeamGame, z: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; z.len()];
    let u = game.contract_with_gradient(z, &mut g);
    (0..game.num_players())
        .map(|i| {
            let current = game.player_team(i).sign() * u;
            (best_in_block(game, i, &g) - current).max(0.0)
        })
        .collect()
}

/// Sum of per-player regrets on flat coordinates (no shape checks).
pub fn ne_gap_coords(game: &TeamGame, z: &[f64]) -> f64 {
    ne_gap_terms(game, z).iter().sum()
}

pub fn ne_gap(game: &TeamGame, profile: &MixedProfile) -> Result<f64> {
    let z = coords(game, profile)?;
    Ok(ne_gap_coords(game, &z))
}

pub fn dist_l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn dist_linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gmp_uniform_is_an_equilibrium() {
        let g = TeamGame::gmp(0.5).unwrap();
        let u = MixedProfile::uniform(&[2, 2], &[2, 2]);
        assert!(ne_gap(&g, &u).unwrap().abs() < 1e-15);
        let cur = g.evaluate_utility(&u).unwrap();
        for i in 0..4 {
            let br = best_response_value(&g, i, &u).unwrap();
            assert!((br - g.player_team(i).sign() * cur).abs() < 1e-15);
        }
    }

    #[test]
    fn gmp_all_heads_has_positive_gap() {
        let g = TeamGame::gmp(0.5).unwrap();
        let p = MixedProfile::pure(&[2, 2], &[2, 2], &[0, 0, 0, 0]);
        let terms = ne_gap_terms(&g, &p.to_coords());
        // team A already wins; a lone team B deviator turns -1 into -ω
        assert_eq!(terms[0], 0.0);
        assert_eq!(terms[1], 0.0);
        assert!((terms[2] - 0.5).abs() < 1e-15 && (terms[3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pinned_teammate_prefers_an_endpoint() {
        // x1 = T, y uniform: team A player 2's payoff is affine in x2 and best at x2 = T
        let w = 0.5;
        let g = TeamGame::gmp(w).unwrap();
        let value_at = |q: f64| {
            let p = MixedProfile::new(
                vec![vec![0.0, 1.0], vec![q, 1.0 - q]],
                vec![vec![0.5, 0.5]; 2],
            )
            .unwrap();
            -g.evaluate_utility(&p).unwrap()
        };
        let p = MixedProfile::new(vec![vec![0.0, 1.0], vec![0.5, 0.5]], vec![vec![0.5, 0.5]; 2])
            .unwrap();
        let br = best_response_value(&g, 1, &p).unwrap();
        assert!((br - value_at(0.0)).abs() < 1e-15);
        assert!(value_at(0.0) > value_at(1.0));
    }

    #[test]
    fn pure_profile_best_response_enumerates_deviations() {
        let g = TeamGame::random(vec![2], vec![3], 3).unwrap();
        let p = MixedProfile::pure(&[2], &[3], &[1, 0]);
        let br_b = best_response_value(&g, 1, &p).unwrap();
        let expect = (0..3).map(|k| g.entry(&[1, k])).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(br_b, expect);
        let br_a = best_response_value(&g, 0, &p).unwrap();
        assert_eq!(br_a, (-g.entry(&[0, 0])).max(-g.entry(&[1, 0])));
        assert!(best_response_value(&g, 2, &p).is_err());
    }

    proptest! {
        #[test]
        fn gap_ignores_constant_shifts(seed in 0u64..500, c in -3.0f64..3.0, a in 0.01f64..0.99, b in 0.01f64..0.99) {
            let g = TeamGame::random(vec![2, 2], vec![2], seed).unwrap();
            let shifted = TeamGame::new(
                g.team_a().to_vec(),
                g.team_b().to_vec(),
                g.payoff().iter().map(|u| u + c).collect(),
            ).unwrap();
            let z = [a, 1.0 - a, b, 1.0 - b, 0.3, 0.7];
            prop_assert!((ne_gap_coords(&g, &z) - ne_gap_coords(&shifted, &z)).abs() < 1e-12);
            prop_assert!(ne_gap_terms(&g, &z).iter().all(|&t| t >= 0.0));
        }
    }
}
