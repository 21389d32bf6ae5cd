use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile, TeamGame};
use crate::metrics::ne_gap_coords;

/// Probabilities above this count as part of a support.
pub const SUPPORT_TOL: f64 = 1e-9;
/// Largest payoff spread across a support still treated as indifference.
pub const INDIFFERENCE_TOL: f64 = 1e-8;
/// NE-gap required before the test runs.
pub const NE_TOL: f64 = 1e-8;

/// A teammate who stops being indifferent once `pinned_player` commits to
/// `pinned_action`: `preferred_action` then pays `spread` more than
/// `other_action`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub pinned_player: usize,
    pub pinned_action: usize,
    pub teammate: usize,
    pub preferred_action: usize,
    pub other_action: usize,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakStability {
    pub weakly_stable: bool,
    pub witness: Option<Witness>,
}

/// Checks that pinning any randomizing player to any action in their support
/// leaves every teammate indifferent across their own support.
pub fn is_weakly_stable(game: &TeamGame, ne: &MixedProfile) -> Result<WeakStability> {
    let gap = crate::metrics::ne_gap(game, ne)?;
    if gap >= NE_TOL {
        return Err(Error::Precondition(format!("profile is not an equilibrium (NE-gap {gap:.3e})")));
    }
    let z = ne.to_coords();
    let supports: Vec<Vec<usize>> = (0..game.num_players())
        .map(|i| game.player_range(i).filter(|&c| z[c] > SUPPORT_TOL).collect())
        .collect();
    for i in 0..game.num_players() {
        if supports[i].len() < 2 {
            continue;
        }
        let range = game.player_range(i);
        for &kc in &supports[i] {
            let mut pinned = z.clone();
            pinned[range.clone()].fill(0.0);
            pinned[kc] = 1.0;
            let grad = game.gradient(&pinned);
            for j in (0..game.num_players()).filter(|&j| j != i) {
                if game.player_team(j) != game.player_team(i) || supports[j].len() < 2 {
                    continue;
                }
                let sign = game.player_team(j).sign();
                let value = |c: usize| sign * grad[c];
                let best = *supports[j].iter().max_by(|&&a, &&b| value(a).total_cmp(&value(b))).unwrap();
                let worst = *supports[j].iter().min_by(|&&a, &&b| value(a).total_cmp(&value(b))).unwrap();
                let spread = value(best) - value(worst);
                if spread > INDIFFERENCE_TOL {
                    let start = game.player_range(j).start;
                    return Ok(WeakStability {
                        weakly_stable: false,
                        witness: Some(Witness {
                            pinned_player: i,
                            pinned_action: kc - range.start,
                            teammate: j,
                            preferred_action: best - start,
                            other_action: worst - start,
                            spread,
                        }),
                    });
                }
            }
        }
    }
    debug_assert!(ne_gap_coords(game, &z) < NE_TOL);
    Ok(WeakStability { weakly_stable: true, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmp_uniform_is_not_weakly_stable() {
        let w = 0.5;
        let g = TeamGame::gmp(w).unwrap();
        let r = is_weakly_stable(&g, &MixedProfile::uniform(&[2, 2], &[2, 2])).unwrap();
        assert!(!r.weakly_stable);
        let wit = r.witness.unwrap();
        assert_eq!(g.player_team(wit.pinned_player), g.player_team(wit.teammate));
        assert_ne!(wit.pinned_player, wit.teammate);
        // the teammate's payoff moves by ω per unit of their own mix
        assert!((wit.spread - w).abs() < 1e-12);
    }

    #[test]
    fn single_player_teams_are_vacuously_stable() {
        let g = TeamGame::matching_pennies().unwrap();
        let r = is_weakly_stable(&g, &MixedProfile::uniform(&[2], &[2])).unwrap();
        assert!(r.weakly_stable && r.witness.is_none());
    }

    #[test]
    fn pure_equilibria_are_weakly_stable() {
        // with ω = 1 both team A members agreeing on H against a split team B is an NE
        let g = TeamGame::gmp(1.0).unwrap();
        let mut found = 0;
        for a in 0..16usize {
            let s = [a >> 3 & 1, a >> 2 & 1, a >> 1 & 1, a & 1];
            let p = MixedProfile::pure(&[2, 2], &[2, 2], &s);
            if crate::metrics::ne_gap(&g, &p).unwrap() < NE_TOL {
                found += 1;
                assert!(is_weakly_stable(&g, &p).unwrap().weakly_stable);
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn non_equilibria_are_rejected() {
        let g = TeamGame::gmp(0.5).unwrap();
        let p = MixedProfile::pure(&[2, 2], &[2, 2], &[0, 0, 0, 0]);
        assert!(matches!(is_weakly_stable(&g, &p), Err(Error::Precondition(_))));
    }
}
