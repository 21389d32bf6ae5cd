use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{random_point, DynamicsConfig, DynamicsState, Method, Stepper};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::metrics::dist_l2;

/// Coordinates below this count as "on the boundary".
const BOUNDARY_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    #[serde(rename = "max_iters")]
    MaxIters,
    /// Stopped moving at an interior point.
    #[serde(rename = "stabilized")]
    Stabilized,
    /// Stopped moving with some probability at zero; not evidence of an NE.
    #[serde(rename = "stabilized (boundary)")]
    StabilizedBoundary,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::MaxIters => "max_iters",
            Termination::Stabilized => "stabilized",
            Termination::StabilizedBoundary => "stabilized (boundary)",
        }
    }
}

/// One sampled step of a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub step: usize,
    pub z: Vec<f64>,
    pub avg: Vec<f64>,
    pub ne_gap: f64,
    pub dist_ref: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub method: Method,
    pub samples: Vec<SampleRow>,
    /// Running mean of all iterates including the initial point.
    pub average: Vec<f64>,
    pub final_state: DynamicsState,
    pub iterations: usize,
    pub termination: Termination,
}

impl Trajectory {
    pub fn final_point(&self) -> &[f64] {
        &self.final_state.z
    }

    pub fn final_ne_gap(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.ne_gap)
    }

    pub fn final_dist_ref(&self) -> Option<f64> {
        self.samples.last().and_then(|s| s.dist_ref)
    }

    /// CSV with columns `step, coord_i…, avg_i…, ne_gap, dist_ref`; the
    /// distance column is empty when no reference was configured.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.average.len();
        let mut header = vec!["step".to_string()];
        header.extend((0..d).map(|i| format!("coord_{i}")));
        header.extend((0..d).map(|i| format!("avg_{i}")));
        header.push("ne_gap".into());
        header.push("dist_ref".into());
        writeln!(w, "{}", header.join(","))?;
        for s in &self.samples {
            let mut row = vec![s.step.to_string()];
            row.extend(s.z.iter().map(f64::to_string));
            row.extend(s.avg.iter().map(f64::to_string));
            row.push(s.ne_gap.to_string());
            row.push(s.dist_ref.map(|x| x.to_string()).unwrap_or_default());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Iterates `config.method` from `initial` (or a seeded uniform draw) until
/// the iteration budget runs out or the iterate stops moving.
pub fn run<G: Game + ?Sized>(
    game: &G,
    config: &DynamicsConfig,
    initial: Option<&[f64]>,
    seed: u64,
) -> Result<Trajectory> {
    config.validate()?;
    config.warn_unusual_gains();
    let domain = game.domain();
    if let Some(r) = &config.reference {
        crate::error::check_len("reference point", r.len(), domain.dim())?;
    }
    let z0 = match initial {
        Some(z) => z.to_vec(),
        None => random_point(&domain, &mut ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut state = DynamicsState::new(game, config.method, z0)?;
    let mut stepper = Stepper::new(game);

    let sample = |state: &DynamicsState, avg: &[f64]| SampleRow {
        step: state.step_count,
        z: state.z.clone(),
        avg: avg.to_vec(),
        ne_gap: game.equilibrium_gap(&state.z),
        dist_ref: config.reference.as_ref().map(|r| dist_l2(&state.z, r)),
    };

    let mut avg = state.z.clone();
    let mut samples = vec![sample(&state, &avg)];
    let mut prev = state.z.clone();
    let mut prev_theta = state.theta.clone();
    let mut still = 0usize;
    let mut termination = Termination::MaxIters;

    while state.step_count < config.max_iters {
        prev.copy_from_slice(&state.z);
        if let (Some(pt), Some(t)) = (prev_theta.as_mut(), state.theta.as_ref()) {
            pt.copy_from_slice(t);
        }
        stepper.step(config, &mut state)?;
        let t = state.step_count;
        if state.z.iter().any(|q| !q.is_finite())
            || state.theta.as_ref().is_some_and(|th| th.iter().any(|q| !q.is_finite()))
        {
            return Err(Error::Divergence { step: t });
        }
        let mut moved = state.z.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if let (Some(pt), Some(th)) = (prev_theta.as_ref(), state.theta.as_ref()) {
            moved = th.iter().zip(pt).fold(moved, |m, (a, b)| m.max((a - b).abs()));
        }
        let inv = 1.0 / (t + 1) as f64;
        for (a, z) in avg.iter_mut().zip(&state.z) {
            *a += (z - *a) * inv;
        }
        still = if moved < config.tol { still + 1 } else { 0 };
        let stop = still >= config.patience;
        if stop {
            termination = if domain.is_interior(&state.z, BOUNDARY_MARGIN) {
                Termination::Stabilized
            } else {
                Termination::StabilizedBoundary
            };
        }
        if t % config.stride == 0 || stop || t == config.max_iters {
            samples.push(sample(&state, &avg));
        }
        if stop {
            break;
        }
    }

    Ok(Trajectory {
        method: config.method,
        samples,
        average: avg,
        iterations: state.step_count,
        final_state: state,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::TeamGame;

    #[test]
    fn samples_follow_the_stride_and_end_on_the_last_step() {
        let g = TeamGame::gmp(0.5).unwrap();
        let cfg = DynamicsConfig::new(Method::Gda, 0.1).with_max_iters(250).with_stride(100);
        let t = run(&g, &cfg, None, 3).unwrap();
        let steps: Vec<usize> = t.samples.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![0, 100, 200, 250]);
        assert_eq!(t.termination, Termination::MaxIters);
        assert_eq!(t.final_ne_gap(), t.samples.last().unwrap().ne_gap);
    }

    #[test]
    fn average_is_the_mean_of_all_iterates() {
        let g = TeamGame::random(vec![2], vec![2, 2], 1).unwrap();
        let cfg = DynamicsConfig::new(Method::Eg, 0.05).with_max_iters(40).with_stride(1);
        let t = run(&g, &cfg, None, 9).unwrap();
        let n = t.samples.len() as f64;
        for i in 0..t.average.len() {
            let mean = t.samples.iter().map(|s| s.z[i]).sum::<f64>() / n;
            assert!((mean - t.average[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn equilibrium_start_stabilizes() {
        let g = TeamGame::gmp(0.5).unwrap();
        let cfg = DynamicsConfig::kpv(0.05, -1.1, 0.3);
        let t = run(&g, &cfg, Some(&[0.5; 8]), 0).unwrap();
        assert_eq!(t.termination, Termination::Stabilized);
        assert_eq!(t.iterations, 100);
    }

    #[test]
    fn boundary_rest_points_are_flagged() {
        // team A's first action is strictly dominated; GDA parks on the boundary
        let g = TeamGame::new(vec![2], vec![1], vec![1.0, 0.0]).unwrap();
        let cfg = DynamicsConfig::new(Method::Gda, 0.1);
        let t = run(&g, &cfg, Some(&[0.5, 0.5, 1.0]), 0).unwrap();
        assert_eq!(t.termination, Termination::StabilizedBoundary);
        assert_eq!(t.final_point(), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn reruns_are_identical() {
        let g = TeamGame::random(vec![2, 2], vec![2, 2], 5).unwrap();
        let cfg = DynamicsConfig::new(Method::Omwu, 0.1).with_max_iters(500).with_stride(7);
        let a = run(&g, &cfg, None, 42).unwrap().to_csv_string();
        let b = run(&g, &cfg, None, 42).unwrap().to_csv_string();
        assert_eq!(a, b);
        assert!(a.starts_with("step,coord_0,"));
        assert!(a.lines().next().unwrap().ends_with("avg_7,ne_gap,dist_ref"));
    }

    #[test]
    fn divergence_reports_the_step() {
        use crate::game::TeamWgan;
        let g = TeamWgan::new(vec![1.0], 0.7).unwrap();
        let cfg = DynamicsConfig::new(Method::Gda, 1e150).with_max_iters(50);
        let err = run(&g, &cfg, Some(&[0.5, 0.5, 0.5, 0.5]), 0).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }
}
