use serde::Serialize;

use super::config::{ExperimentConfig, GameSpec, InitSpec, StabilityConfig, SweepConfig};
use crate::dynamics::{DynamicsConfig, Method};
use crate::error::{Error, Result};

/// A compiled-in configuration, runnable with one command.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "command", content = "config", rename_all = "snake_case")]
pub enum Preset {
    Run(ExperimentConfig),
    Sweep(SweepConfig),
    Stability(StabilityConfig),
}

impl Preset {
    pub fn command(&self) -> &'static str {
        match self {
            Preset::Run(_) => "run",
            Preset::Sweep(_) => "sweep",
            Preset::Stability(_) => "stability",
        }
    }
}

pub const PRESET_NAMES: [(&str, &str); 6] = [
    ("gmp-figure", "GMP(1/2) near its equilibrium under all five dynamics"),
    ("wgan-figure", "Team-WGAN with mu = (1, -0.5), pi1 = 0.7 from a random start"),
    ("avg-iterate", "average iterates of the four baselines on modified GMP"),
    ("sweep-2v2", "KPV-GDA on 100 random 2v2 games with 2 strategies"),
    ("sweep-2v2-3s", "KPV-GDA on 100 random 2v2 games with 3 strategies"),
    ("stability", "spectral report at the GMP(1/2) equilibrium"),
];

/// Step sizes of the four baselines used across the GMP presets.
fn baselines() -> Vec<DynamicsConfig> {
    vec![
        DynamicsConfig::new(Method::Gda, 0.2),
        DynamicsConfig::new(Method::Ogda, 0.1),
        DynamicsConfig::new(Method::Eg, 0.2),
        DynamicsConfig::new(Method::Omwu, 0.2),
    ]
}

fn run_config(name: &str, game: GameSpec, methods: Vec<DynamicsConfig>, init: InitSpec) -> ExperimentConfig {
    ExperimentConfig {
        name: Some(name.into()),
        game,
        methods,
        init,
        budget: Some(100_000),
        stride: Some(100),
        reference: None,
        seed: 0,
        converged_below: 1e-2,
        out: None,
    }
}

fn sweep_config(name: &str, strategies: usize, eta: f64, k: f64, p: f64) -> SweepConfig {
    SweepConfig {
        name: Some(name.into()),
        n_games: 100,
        team_a: vec![strategies; 2],
        team_b: vec![strategies; 2],
        method: DynamicsConfig::kpv(eta, k, p).with_max_iters(200_000),
        seed: 0,
        converged_below: 1e-2,
        out: None,
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    Ok(match name {
        "gmp-figure" => {
            let mut methods = baselines();
            methods.push(DynamicsConfig::kpv(0.05, -1.1, 0.3));
            let mut c = run_config(
                name,
                GameSpec::Gmp { omega: 0.5 },
                methods,
                InitSpec::Perturbation { radius: 0.1 },
            );
            c.reference = Some(vec![0.5; 8]);
            Preset::Run(c)
        }
        "wgan-figure" => {
            let methods = vec![
                DynamicsConfig::new(Method::Gda, 0.05),
                DynamicsConfig::new(Method::Ogda, 0.05),
                DynamicsConfig::new(Method::Eg, 0.05),
                DynamicsConfig::kpv(0.05, -1.1, 0.3),
            ];
            let mut c = run_config(
                name,
                GameSpec::Wgan { mu: vec![1.0, -0.5], pi1: 0.7 },
                methods,
                InitSpec::Random,
            );
            c.reference = Some(vec![1.0, -0.5, 0.7, 0.0, 0.0, 0.0, 0.0]);
            Preset::Run(c)
        }
        "avg-iterate" => {
            Preset::Run(run_config(name, GameSpec::ModifiedGmp, baselines(), InitSpec::Random))
        }
        "sweep-2v2" => Preset::Sweep(sweep_config(name, 2, 0.05, -1.2, 0.02)),
        "sweep-2v2-3s" => Preset::Sweep(sweep_config(name, 3, 0.05, -1.05, 0.005)),
        "stability" => {
            let mut dynamics = baselines();
            dynamics.push(DynamicsConfig::kpv(0.05, -1.1, 0.3));
            Preset::Stability(StabilityConfig {
                name: Some(name.into()),
                game: GameSpec::Gmp { omega: 0.5 },
                point: None,
                dynamics,
                out: None,
            })
        }
        other => {
            let known: Vec<&str> = PRESET_NAMES.iter().map(|p| p.0).collect();
            return Err(Error::Config(format!(
                "unknown preset '{other}' (known: {})",
                known.join(", ")
            )));
        }
    })
}
