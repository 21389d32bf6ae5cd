//! Brute-force Nash equilibrium search for tiny games, used as a test oracle.
//!
//! A grid over the product of simplices is scanned and the lowest-gap grid
//! point of every support pattern is polished with Newton steps on the
//! indifference system of that support.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile, TeamGame};
use crate::metrics::{dist_linf, ne_gap_coords};

pub const MAX_COORDINATES: usize = 8;
pub const MAX_RESOLUTION: usize = 50;
const MAX_GRID_POINTS: usize = 20_000_000;
const ACCEPT_GAP: f64 = 1e-6;

/// All NE found on a `grid_resolution` grid after local refinement.
pub fn find_ne_bruteforce(game: &TeamGame, grid_resolution: usize) -> Result<Vec<MixedProfile>> {
    let d = game.total_coordinates();
    if d > MAX_COORDINATES {
        return Err(Error::Capability(format!(
            "{d} probability coordinates exceed the brute-force limit of {MAX_COORDINATES}"
        )));
    }
    if grid_resolution == 0 || grid_resolution > MAX_RESOLUTION {
        return Err(Error::Capability(format!(
            "grid resolution must be in 1..={MAX_RESOLUTION}, got {grid_resolution}"
        )));
    }
    let per_player: Vec<Vec<Vec<f64>>> =
        game.strategy_counts().iter().map(|&n| compositions(n, grid_resolution)).collect();
    let total = per_player.iter().try_fold(1usize, |acc, g| acc.checked_mul(g.len()));
    if total.is_none_or(|t| t > MAX_GRID_POINTS) {
        return Err(Error::Capability("grid too large for brute-force search".into()));
    }

    // best grid point per support pattern
    let mut best: BTreeMap<Vec<bool>, (f64, Vec<f64>)> = BTreeMap::new();
    let mut idx = vec![0usize; per_player.len()];
    let mut z = vec![0.0; d];
    'scan: loop {
        let mut at = 0;
        for (i, &k) in idx.iter().enumerate() {
            let p = &per_player[i][k];
            z[at..at + p.len()].copy_from_slice(p);
            at += p.len();
        }
        let gap = ne_gap_coords(game, &z);
        let support: Vec<bool> = z.iter().map(|&q| q > 0.0).collect();
        match best.get_mut(&support) {
            Some(entry) if entry.0 <= gap => {}
            Some(entry) => *entry = (gap, z.clone()),
            None => {
                best.insert(support, (gap, z.clone()));
            }
        }
        for j in (0..idx.len()).rev() {
            idx[j] += 1;
            if idx[j] < per_player[j].len() {
                continue 'scan;
            }
            idx[j] = 0;
        }
        break;
    }

    let mut found: Vec<Vec<f64>> = Vec::new();
    for (support, (_, start)) in best {
        let refined = refine(game, &support, start);
        if ne_gap_coords(game, &refined) < ACCEPT_GAP
            && !found.iter().any(|f| dist_linf(f, &refined) < ACCEPT_GAP)
        {
            found.push(refined);
        }
    }
    found
        .into_iter()
        .map(|z| MixedProfile::from_coords(game.team_a(), game.team_b(), &z))
        .collect()
}

/// Grid points of the `n`-simplex with denominators `res`.
fn compositions(n: usize, res: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / res as f64).collect());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(n, left - c, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, res, res, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Newton iteration on "supported strategies earn equal payoff, probabilities
/// sum to one", restricted to `support`. Returns the start point if the
/// iteration leaves the simplex.
fn refine(game: &TeamGame, support: &[bool], start: Vec<f64>) -> Vec<f64> {
    let vars: Vec<usize> = (0..support.len()).filter(|&i| support[i]).collect();
    let mut z = start.clone();
    for _ in 0..50 {
        let g = game.gradient(&z);
        let h = game.hessian(&z);
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for p in 0..game.num_players() {
            let r = game.player_range(p);
            let sup: Vec<usize> = r.clone().filter(|&i| support[i]).collect();
            let base = sup[0];
            for &k in &sup[1..] {
                let row = vars.iter().map(|&j| h[(k, j)] - h[(base, j)]).collect();
                rows.push((row, g[k] - g[base]));
            }
            let row = vars.iter().map(|&j| if r.contains(&j) { 1.0 } else { 0.0 }).collect();
            rows.push((row, sup.iter().map(|&i| z[i]).sum::<f64>() - 1.0));
        }
        let jac = DMatrix::from_fn(rows.len(), vars.len(), |i, j| rows[i].0[j]);
        let res = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
        if res.amax() < 1e-14 {
            break;
        }
        let Ok(step) = jac.svd(true, true).solve(&res, 1e-12) else {
            break;
        };
        for (n, &j) in vars.iter().enumerate() {
            z[j] -= step[n];
        }
        if z.iter().any(|&q| !(q > -1e-9)) {
            return start;
        }
    }
    z.iter_mut().for_each(|q| *q = q.max(0.0));
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmp_has_only_the_uniform_equilibrium() {
        let g = TeamGame::gmp(0.5).unwrap();
        let ne = find_ne_bruteforce(&g, 10).unwrap();
        assert_eq!(ne.len(), 1);
        assert!(ne[0].to_coords().iter().all(|q| (q - 0.5).abs() < 1e-9));
    }

    #[test]
    fn matching_pennies_equilibrium_is_uniform() {
        let g = TeamGame::matching_pennies().unwrap();
        let ne = find_ne_bruteforce(&g, 7).unwrap();
        assert_eq!(ne.len(), 1);
        assert!(ne[0].to_coords().iter().all(|q| (q - 0.5).abs() < 1e-12));
    }

    #[test]
    fn off_grid_equilibrium_is_recovered() {
        // row player mixes 1/3 : 2/3, not on a grid of 10
        let g = TeamGame::new(vec![2], vec![2], vec![2.0, -1.0, -1.0, 0.5]).unwrap();
        let ne = find_ne_bruteforce(&g, 10).unwrap();
        assert_eq!(ne.len(), 1);
        assert!(ne_gap_coords(&g, &ne[0].to_coords()) < 1e-12);
    }

    #[test]
    fn capability_limits() {
        let g = TeamGame::random(vec![3, 3], vec![3], 1).unwrap();
        assert!(matches!(find_ne_bruteforce(&g, 5), Err(Error::Capability(_))));
        let g = TeamGame::matching_pennies().unwrap();
        assert!(matches!(find_ne_bruteforce(&g, 51), Err(Error::Capability(_))));
    }

    #[test]
    fn grid_counts() {
        assert_eq!(compositions(2, 4).len(), 5);
        assert_eq!(compositions(3, 4).len(), 15);
        assert!(compositions(3, 4).iter().all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-15));
    }
}
