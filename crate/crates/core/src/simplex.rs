//! Feasible sets: Euclidean projection onto the probability simplex, products
//! of simplices, and the reduced-coordinate adapter used by the stability
//! analysis.
//!
//! A product-of-simplices point is stored in full coordinates, one
//! probability per pure strategy, blocks concatenated in player order. The
//! reduced chart drops the last probability of every block, so a block with
//! `n` strategies contributes `n - 1` free coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Euclidean projection of `v` onto the standard simplex.
pub fn project_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Dimension("cannot project an empty vector".into()));
    }
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Numeric("NaN in simplex projection input".into()));
    }
    let mut out = v.to_vec();
    let mut scratch = Vec::with_capacity(v.len());
    project_simplex_in_place(&mut out, &mut scratch);
    Ok(out)
}

/// In-place simplex projection; `scratch` is reused across calls.
///
/// Sort-and-threshold: with `u` sorted descending, the pivot is the largest
/// `j` with `u_j + (1 - sum_{i<=j} u_i) / j > 0`, and the result is
/// `max(v + tau, 0)` for the matching shift `tau`. Points already on the
/// simplex are left untouched. Inputs must be NaN-free.
pub fn project_simplex_in_place(v: &mut [f64], scratch: &mut Vec<f64>) {
    let n = v.len();
    if n > 1 {
        let sum: f64 = v.iter().sum();
        if v.iter().all(|&x| x >= 0.0) && (sum - 1.0).abs() <= 4.0 * f64::EPSILON * n as f64 {
            return;
        }
    }
    match n {
        0 => {}
        1 => v[0] = 1.0,
        2 => {
            // closed form on a segment
            let a = 0.5 * (1.0 + v[0] - v[1]);
            let a = a.clamp(0.0, 1.0);
            v[0] = a;
            v[1] = 1.0 - a;
        }
        _ => {
            scratch.clear();
            scratch.extend_from_slice(v);
            scratch.sort_unstable_by(|a, b| b.total_cmp(a));
            let mut cumsum = 0.0;
            let mut tau = 0.0;
            for (j, &u) in scratch.iter().enumerate() {
                cumsum += u;
                let t = (1.0 - cumsum) / (j + 1) as f64;
                if u + t > 0.0 {
                    tau = t;
                }
            }
            for x in v.iter_mut() {
                *x = (*x + tau).max(0.0);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    ProductOfSimplices,
    Unconstrained,
}

/// Feasible set of a game: a kind plus per-block coordinate counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    pub shape: Vec<usize>,
}

impl Domain {
    pub fn simplices(shape: Vec<usize>) -> Self {
        Self { kind: DomainKind::ProductOfSimplices, shape }
    }

    pub fn unconstrained(shape: Vec<usize>) -> Self {
        Self { kind: DomainKind::Unconstrained, shape }
    }

    pub fn dim(&self) -> usize {
        self.shape.iter().sum()
    }

    pub fn is_unconstrained(&self) -> bool {
        self.kind == DomainKind::Unconstrained
    }

    /// Iterator over `(offset, len)` of every block.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.shape.iter().scan(0usize, |off, &len| {
            let start = *off;
            *off += len;
            Some((start, len))
        })
    }

    pub fn project_profile(&self, raw: &[f64]) -> Result<Vec<f64>> {
        check_len("profile", raw.len(), self.dim())?;
        if raw.iter().any(|x| x.is_nan()) {
            return Err(Error::Numeric("NaN in projection input".into()));
        }
        let mut out = raw.to_vec();
        let mut scratch = Vec::new();
        self.project_in_place(&mut out, &mut scratch);
        Ok(out)
    }

    pub fn project_in_place(&self, z: &mut [f64], scratch: &mut Vec<f64>) {
        if self.is_unconstrained() {
            return;
        }
        for (off, len) in self.blocks() {
            project_simplex_in_place(&mut z[off..off + len], scratch);
        }
    }

    /// Membership test with tolerance `tol` on sums and signs.
    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        if z.len() != self.dim() || z.iter().any(|x| !x.is_finite()) {
            return false;
        }
        if self.is_unconstrained() {
            return true;
        }
        self.blocks().all(|(off, len)| {
            let b = &z[off..off + len];
            b.iter().all(|&x| x >= -tol) && (b.iter().sum::<f64>() - 1.0).abs() <= tol
        })
    }

    /// Smallest coordinate over all simplex blocks (`+inf` when unconstrained).
    pub fn min_coordinate(&self, z: &[f64]) -> f64 {
        if self.is_unconstrained() {
            return f64::INFINITY;
        }
        z.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_interior(&self, z: &[f64], margin: f64) -> bool {
        self.min_coordinate(z) >= margin
    }

    /// Barycentre of every simplex, or the origin when unconstrained.
    pub fn center(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        if !self.is_unconstrained() {
            for (off, len) in self.blocks() {
                z[off..off + len].fill(1.0 / len as f64);
            }
        }
        z
    }

    pub fn reduced_dim(&self) -> usize {
        match self.kind {
            DomainKind::Unconstrained => self.dim(),
            DomainKind::ProductOfSimplices => self.shape.iter().map(|n| n - 1).sum(),
        }
    }

    /// Drops the last coordinate of every simplex block.
    pub fn reduce(&self, z: &[f64]) -> Vec<f64> {
        if self.is_unconstrained() {
            return z.to_vec();
        }
        self.blocks()
            .flat_map(|(off, len)| z[off..off + len - 1].iter().copied())
            .collect()
    }

    /// Lifts a reduced point back onto the simplices.
    pub fn expand_point(&self, r: &[f64]) -> Vec<f64> {
        self.expand_with(r, 1.0)
    }

    /// Lifts a reduced tangent direction (block sums zero).
    pub fn expand_tangent(&self, r: &[f64]) -> Vec<f64> {
        self.expand_with(r, 0.0)
    }

    fn expand_with(&self, r: &[f64], total: f64) -> Vec<f64> {
        if self.is_unconstrained() {
            return r.to_vec();
        }
        let mut z = Vec::with_capacity(self.dim());
        let mut at = 0;
        for &len in &self.shape {
            let free = &r[at..at + len - 1];
            z.extend_from_slice(free);
            z.push(total - free.iter().sum::<f64>());
            at += len - 1;
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn feasible_point_is_unchanged() {
        assert_eq!(project_simplex(&[0.5, 0.5]).unwrap(), vec![0.5, 0.5]);
        let p = [0.2, 0.3, 0.5];
        assert_eq!(project_simplex(&p).unwrap(), p.to_vec());
    }

    #[test]
    fn two_dimensional_cases() {
        // KKT: the multiplier pushes all mass onto the first coordinate
        assert_eq!(project_simplex(&[1.2, -0.2]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(project_simplex(&[0.6, 0.6]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn general_path_matches_two_dimensional_closed_form() {
        let v = [0.9, 0.6, -3.0];
        // third coordinate is clipped, the rest shift by -0.25
        let p = project_simplex(&v).unwrap();
        assert!((p[0] - 0.65).abs() < 1e-15 && (p[1] - 0.35).abs() < 1e-15 && p[2] == 0.0);
    }

    #[test]
    fn nan_is_rejected() {
        assert!(matches!(project_simplex(&[f64::NAN, 1.0]), Err(Error::Numeric(_))));
    }

    #[test]
    fn blockwise_projection() {
        let d = Domain::simplices(vec![2, 2]);
        let p = d.project_profile(&[1.2, -0.2, 0.6, 0.6]).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.5, 0.5]);
        assert!(d.project_profile(&[1.0]).is_err());
    }

    #[test]
    fn unconstrained_is_identity() {
        let d = Domain::unconstrained(vec![2, 1]);
        let v = [3.0, -7.5, 1e9];
        assert_eq!(d.project_profile(&v).unwrap(), v.to_vec());
    }

    #[test]
    fn reduce_expand_round_trip() {
        let d = Domain::simplices(vec![2, 3]);
        let z = [0.25, 0.75, 0.2, 0.3, 0.5];
        let r = d.reduce(&z);
        assert_eq!(r, vec![0.25, 0.2, 0.3]);
        let back = d.expand_point(&r);
        for (a, b) in back.iter().zip(&z) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(d.expand_tangent(&[1.0, 1.0, -2.0]), vec![1.0, -1.0, 1.0, -2.0, 1.0]);
    }

    #[test]
    fn projection_beats_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let v: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p = project_simplex(&v).unwrap();
            let best = dist(&p, &v);
            for _ in 0..1000 {
                let mut q: Vec<f64> = (0..5).map(|_| -rng.gen::<f64>().ln()).collect();
                let s: f64 = q.iter().sum();
                q.iter_mut().for_each(|x| *x /= s);
                assert!(best <= dist(&q, &v) + 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(v in prop::collection::vec(-5.0f64..5.0, 1..9)) {
            let p = project_simplex(&v).unwrap();
            let pp = project_simplex(&p).unwrap();
            for (a, b) in p.iter().zip(&pp) {
                prop_assert!((a - b).abs() <= 1e-15);
            }
        }

        #[test]
        fn projection_is_feasible(v in prop::collection::vec(-5.0f64..5.0, 1..9)) {
            let p = project_simplex(&v).unwrap();
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn projection_is_nonexpansive(
            u in prop::collection::vec(-5.0f64..5.0, 4),
            v in prop::collection::vec(-5.0f64..5.0, 4),
        ) {
            let pu = project_simplex(&u).unwrap();
            let pv = project_simplex(&v).unwrap();
            prop_assert!(dist(&pu, &pv) <= dist(&u, &v) + 1e-12);
        }
    }
}
