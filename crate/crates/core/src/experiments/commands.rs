use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, InitSpec, StabilityConfig, SweepConfig};
use crate::dynamics::{perturbed_point, random_point, run, Method};
use crate::error::{Error, Result};
use crate::game::{AnyGame, Game, MixedProfile, TeamGame};
use crate::par;
use crate::stability::{check_sufficient, is_weakly_stable, DynamicsSpectrum, StabilityReport, NE_TOL};

/// Outcome of one method in a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub eta: f64,
    pub k: f64,
    pub p: f64,
    /// Trajectory file name inside the output directory.
    pub csv: Option<String>,
    pub final_ne_gap: Option<f64>,
    pub final_dist_ref: Option<f64>,
    /// NE-gap of the running average of all iterates.
    pub average_ne_gap: Option<f64>,
    pub termination: Option<String>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the trajectory failed (for example by diverging).
    pub error: Option<String>,
    pub wall_clock_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: Option<String>,
    pub seed: u64,
    pub initial_point: Vec<f64>,
    pub methods: Vec<MethodSummary>,
    pub wall_clock_s: f64,
}

fn initial_point(config: &ExperimentConfig, game: &AnyGame) -> Result<Vec<f64>> {
    let domain = game.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match &config.init {
        InitSpec::Point { z } => Ok(z.clone()),
        InitSpec::Random => Ok(random_point(&domain, &mut rng)),
        InitSpec::Perturbation { radius } => {
            let center = config.reference.as_ref().ok_or_else(|| {
                Error::Config("a perturbation start needs a reference point".into())
            })?;
            perturbed_point(&domain, center, *radius, &mut rng)
        }
    }
}

fn csv_names(methods: &[Method]) -> Vec<String> {
    methods
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if methods.iter().filter(|&&o| o == *m).count() > 1 {
                format!("{m}_{i}.csv")
            } else {
                format!("{m}.csv")
            }
        })
        .collect()
}

/// Runs every configured method from one shared start, writing a CSV per
/// method and `summary.json` into `out`. A method that fails at run time is
/// recorded in the summary instead of aborting the command.
pub fn cmd_run(config: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let game = config.validate()?;
    let z0 = initial_point(config, &game)?;
    fs::create_dir_all(out)?;
    let started = Instant::now();
    let methods = config.effective_methods();
    let names = csv_names(&methods.iter().map(|m| m.method).collect::<Vec<_>>());
    let mut summaries = Vec::with_capacity(methods.len());
    for (cfg, name) in methods.iter().zip(names) {
        let t0 = Instant::now();
        let mut s = MethodSummary {
            method: cfg.method,
            eta: cfg.eta,
            k: cfg.k,
            p: cfg.p,
            csv: None,
            final_ne_gap: None,
            final_dist_ref: None,
            average_ne_gap: None,
            termination: None,
            iterations: 0,
            converged: false,
            error: None,
            wall_clock_s: 0.0,
        };
        match run(&game, cfg, Some(&z0), config.seed) {
            Ok(t) => {
                t.write_csv(BufWriter::new(File::create(out.join(&name))?))?;
                s.csv = Some(name);
                s.final_ne_gap = Some(t.final_ne_gap());
                s.final_dist_ref = t.final_dist_ref();
                s.average_ne_gap = Some(game.equilibrium_gap(&t.average));
                s.termination = Some(t.termination.as_str().into());
                s.iterations = t.iterations;
                s.converged = t.final_ne_gap() < config.converged_below;
            }
            Err(e @ (Error::Config(_) | Error::Dimension(_) | Error::Io(_))) => return Err(e),
            Err(e) => {
                log::warn!("{} failed: {e}", cfg.method);
                if let Error::Divergence { step } = e {
                    s.iterations = step;
                }
                s.error = Some(e.to_string());
            }
        }
        s.wall_clock_s = t0.elapsed().as_secs_f64();
        summaries.push(s);
    }
    let summary = RunSummary {
        name: config.name.clone(),
        seed: config.seed,
        initial_point: z0,
        methods: summaries,
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// One row of `sweep.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub game_index: usize,
    pub seed: u64,
    pub converged: bool,
    /// `NaN` when the trajectory failed.
    pub final_ne_gap: f64,
    pub iters: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub name: Option<String>,
    pub n_games: usize,
    pub converged: usize,
    pub fraction_converged: Option<f64>,
    pub median_final_ne_gap: Option<f64>,
    pub failures: usize,
    pub wall_clock_s: f64,
}

pub const SWEEP_HEADER: &str = "game_index,seed,converged,final_ne_gap,iters";

fn sweep_one(config: &SweepConfig, index: usize) -> SweepRow {
    let seed = config.seed.wrapping_add(index as u64);
    let outcome = TeamGame::random(config.team_a.clone(), config.team_b.clone(), seed)
        .and_then(|g| run(&g, &config.method, None, seed));
    match outcome {
        Ok(t) => SweepRow {
            game_index: index,
            seed,
            converged: t.final_ne_gap() < config.converged_below,
            final_ne_gap: t.final_ne_gap(),
            iters: t.iterations,
        },
        Err(e) => {
            log::warn!("sweep game {index} failed: {e}");
            let iters = match e {
                Error::Divergence { step } => step,
                _ => 0,
            };
            SweepRow { game_index: index, seed, converged: false, final_ne_gap: f64::NAN, iters }
        }
    }
}

/// Median of the finite values, if any.
fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Computes the sweep rows (games in parallel, at most `jobs` threads) and
/// their aggregate without touching the file system.
pub fn sweep_rows(config: &SweepConfig, jobs: Option<usize>) -> Result<(Vec<SweepRow>, SweepSummary)> {
    config.validate()?;
    let started = Instant::now();
    let rows = par::with_jobs(jobs, || par::map_range(config.n_games, |i| sweep_one(config, i)));
    let converged = rows.iter().filter(|r| r.converged).count();
    let gaps: Vec<f64> = rows.iter().map(|r| r.final_ne_gap).collect();
    let summary = SweepSummary {
        name: config.name.clone(),
        n_games: config.n_games,
        converged,
        fraction_converged: (config.n_games > 0).then(|| converged as f64 / config.n_games as f64),
        median_final_ne_gap: median(&gaps),
        failures: gaps.iter().filter(|g| !g.is_finite()).count(),
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    Ok((rows, summary))
}

/// Runs the sweep and writes `sweep.csv` and `sweep_summary.json` into `out`.
pub fn cmd_sweep(config: &SweepConfig, jobs: Option<usize>, out: &Path) -> Result<SweepSummary> {
    let (rows, summary) = sweep_rows(config, jobs)?;
    fs::create_dir_all(out)?;
    let mut w = BufWriter::new(File::create(out.join("sweep.csv"))?);
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in &rows {
        writeln!(w, "{},{},{},{},{}", r.game_index, r.seed, r.converged, r.final_ne_gap, r.iters)?;
    }
    w.flush()?;
    fs::write(out.join("sweep_summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// Full stability report at the configured point: the sufficient-condition
/// verdict, one spectrum per requested dynamic and, for equilibria of
/// normal-form games, the weakly-stable test.
pub fn cmd_stability(config: &StabilityConfig) -> Result<StabilityReport> {
    let (game, z) = config.validate()?;
    let mut report = check_sufficient(&game, &z)?;
    for d in &config.dynamics {
        match DynamicsSpectrum::compute(d.method, &game, &z, d.eta, d.k, d.p) {
            Ok(s) => report.dynamics.push(s),
            Err(e) => report.warnings.push(format!("{}: {e}", d.method)),
        }
    }
    let gap = game.equilibrium_gap(&z);
    if gap >= NE_TOL {
        report.warnings.push(format!("point is not an equilibrium (NE-gap {gap:.3e})"));
    }
    match &game {
        AnyGame::Team(g) if gap < NE_TOL => {
            let profile = MixedProfile::from_coords(g.team_a(), g.team_b(), &z)?;
            report.weak_stability = Some(is_weakly_stable(g, &profile)?);
        }
        AnyGame::Team(_) => report.warnings.push("weakly-stable test skipped".into()),
        AnyGame::Wgan(_) => {}
    }
    Ok(report)
}
