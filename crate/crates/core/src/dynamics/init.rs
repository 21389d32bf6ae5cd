use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{check_len, Result};
use crate::simplex::Domain;

/// Uniform draw from the domain: Dirichlet(1, …, 1) on every simplex block,
/// or uniform on `[-1, 1]` per coordinate when unconstrained.
pub fn random_point<R: Rng + ?Sized>(domain: &Domain, rng: &mut R) -> Vec<f64> {
    let mut z = vec![0.0; domain.dim()];
    if domain.is_unconstrained() {
        z.iter_mut().for_each(|q| *q = rng.gen_range(-1.0..=1.0));
        return z;
    }
    for (off, len) in domain.blocks() {
        let block = &mut z[off..off + len];
        for q in block.iter_mut() {
            *q = Exp1.sample(rng);
        }
        let s: f64 = block.iter().sum();
        block.iter_mut().for_each(|q| *q /= s);
    }
    z
}

/// Random feasible point within max-norm distance `radius` of `center`.
///
/// Simplex blocks get a zero-sum offset, rescaled so no coordinate moves by
/// more than `radius`; the result is projected back onto the domain.
pub fn perturbed_point<R: Rng + ?Sized>(
    domain: &Domain,
    center: &[f64],
    radius: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_len("perturbation center", center.len(), domain.dim())?;
    let mut delta: Vec<f64> = (0..center.len()).map(|_| rng.gen_range(-radius..=radius)).collect();
    if !domain.is_unconstrained() {
        for (off, len) in domain.blocks() {
            let b = &mut delta[off..off + len];
            let mean = b.iter().sum::<f64>() / len as f64;
            b.iter_mut().for_each(|d| *d -= mean);
            let big = b.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            if big > radius {
                b.iter_mut().for_each(|d| *d *= radius / big);
            }
        }
    }
    let raw: Vec<f64> = center.iter().zip(&delta).map(|(c, d)| c + d).collect();
    domain.project_profile(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_points_are_feasible_and_seeded() {
        let d = Domain::simplices(vec![2, 3, 4]);
        let a = random_point(&d, &mut ChaCha8Rng::seed_from_u64(1));
        let b = random_point(&d, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert!(d.contains(&a, 1e-12));
        let u = Domain::unconstrained(vec![3]);
        let p = random_point(&u, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(p.iter().all(|q| (-1.0..=1.0).contains(q)));
    }

    #[test]
    fn perturbation_stays_in_the_ball() {
        let d = Domain::simplices(vec![2, 2, 3]);
        let c = d.center();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let z = perturbed_point(&d, &c, 0.1, &mut rng).unwrap();
            assert!(d.contains(&z, 1e-12));
            assert!(z.iter().zip(&c).all(|(a, b)| (a - b).abs() <= 0.1 + 1e-15));
        }
    }
}
