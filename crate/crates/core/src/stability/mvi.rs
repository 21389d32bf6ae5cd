use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::random_point;
use crate::error::{check_len, Result};
use crate::game::Game;

/// Operator `F(x, y) = (∇ₓU, −∇ᵧU)` in full coordinates.
pub fn mvi_field<G: Game + ?Sized>(game: &G, z: &[f64]) -> Vec<f64> {
    let mut f = game.gradient(z);
    for (v, s) in f.iter_mut().zip(game.coordinate_signs()) {
        *v *= -s;
    }
    f
}

/// `⟨F(z), z − z*⟩`; negative values violate the Minty inequality at `z`.
pub fn check_mvi<G: Game + ?Sized>(game: &G, z: &[f64], z_star: &[f64]) -> Result<f64> {
    check_len("point", z.len(), game.dim())?;
    check_len("reference point", z_star.len(), game.dim())?;
    let f = mvi_field(game, z);
    Ok(f.iter().zip(z).zip(z_star).map(|((fi, a), b)| fi * (a - b)).sum())
}

/// Outcome of the weak-MVI search for one `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakMviResult {
    pub rho: f64,
    /// A point with `⟨F(z), z − z*⟩ < −(ρ/2)‖F(z)‖²`, if one was found.
    pub witness: Option<Vec<f64>>,
}

/// Randomized search for violations of the weak Minty inequality
/// `⟨F(z), z − z*⟩ ≥ −(ρ/2)‖F(z)‖²`, one verdict per `ρ`.
///
/// Candidates are `extra` points plus `samples` uniform draws from the domain.
/// A point violates the inequality for every `ρ < −2⟨F, z − z*⟩ / ‖F‖²`, so
/// the best candidate is the one maximizing that ratio. Failing to find a
/// witness is not a proof that the inequality holds.
pub fn weak_mvi_search<G: Game + ?Sized>(
    game: &G,
    z_star: &[f64],
    rhos: &[f64],
    extra: &[Vec<f64>],
    samples: usize,
    seed: u64,
) -> Result<Vec<WeakMviResult>> {
    let domain = game.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let draws = (0..samples).map(|_| random_point(&domain, &mut rng));
    for z in extra.iter().cloned().chain(draws) {
        let inner = check_mvi(game, &z, z_star)?;
        let norm2: f64 = mvi_field(game, &z).iter().map(|v| v * v).sum();
        if inner >= 0.0 || norm2 == 0.0 {
            continue;
        }
        let limit = -2.0 * inner / norm2;
        if best.as_ref().is_none_or(|(b, _)| limit > *b) {
            best = Some((limit, z));
        }
    }
    Ok(rhos
        .iter()
        .map(|&rho| WeakMviResult {
            rho,
            witness: best.as_ref().filter(|(limit, _)| rho < *limit).map(|(_, z)| z.clone()),
        })
        .collect())
}
