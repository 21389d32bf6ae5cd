use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicsConfig;
use crate::error::{Error, Result};
use crate::game::{load_congestion, load_team_game, AnyGame, Game, TeamGame, TeamWgan};

/// Which game to play.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameSpec {
    Gmp { omega: f64 },
    ModifiedGmp,
    MultiplayerMatchingPennies,
    MatchingPennies,
    Wgan { mu: Vec<f64>, pi1: f64 },
    Random { team_a: Vec<usize>, team_b: Vec<usize>, seed: u64 },
    /// A saved team game.
    File { path: PathBuf },
    /// A saved congestion game, played through its team-game reduction.
    Congestion { path: PathBuf },
}

impl GameSpec {
    pub fn build(&self) -> Result<AnyGame> {
        Ok(match self {
            GameSpec::Gmp { omega } => AnyGame::Team(TeamGame::gmp(*omega)?),
            GameSpec::ModifiedGmp => AnyGame::Team(TeamGame::modified_gmp()?),
            GameSpec::MultiplayerMatchingPennies => {
                AnyGame::Team(TeamGame::multiplayer_matching_pennies()?)
            }
            GameSpec::MatchingPennies => AnyGame::Team(TeamGame::matching_pennies()?),
            GameSpec::Wgan { mu, pi1 } => AnyGame::Wgan(TeamWgan::new(mu.clone(), *pi1)?),
            GameSpec::Random { team_a, team_b, seed } => {
                AnyGame::Team(TeamGame::random(team_a.clone(), team_b.clone(), *seed)?)
            }
            GameSpec::File { path } => AnyGame::Team(load_team_game(existing(path)?)?),
            GameSpec::Congestion { path } => {
                AnyGame::Team(load_congestion(existing(path)?)?.to_team_game()?)
            }
        })
    }
}

fn existing(path: &Path) -> Result<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::Config(format!("game file {} does not exist", path.display())))
    }
}

/// Where trajectories start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitSpec {
    Point { z: Vec<f64> },
    /// Uniform draw from the domain, seeded by the experiment seed.
    Random,
    /// Uniform offset of at most `radius` (max norm) around the reference point.
    Perturbation { radius: f64 },
}

fn default_threshold() -> f64 {
    1e-2
}

/// One figure-style run: several dynamics from the same starting point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub game: GameSpec,
    pub methods: Vec<DynamicsConfig>,
    pub init: InitSpec,
    /// Iteration budget applied to every method.
    #[serde(default)]
    pub budget: Option<usize>,
    /// Sampling stride applied to every method.
    #[serde(default)]
    pub stride: Option<usize>,
    /// Reference point for the distance column and perturbed starts.
    #[serde(default)]
    pub reference: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    /// A run counts as converged when its final NE-gap is below this.
    #[serde(default = "default_threshold")]
    pub converged_below: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Method configs with the shared budget, stride and reference applied.
    pub fn effective_methods(&self) -> Vec<DynamicsConfig> {
        self.methods
            .iter()
            .map(|m| {
                let mut m = m.clone();
                if let Some(b) = self.budget {
                    m.max_iters = b;
                }
                if let Some(s) = self.stride {
                    m.stride = s;
                }
                if m.reference.is_none() {
                    m.reference = self.reference.clone();
                }
                m
            })
            .collect()
    }

    /// Checks everything that can be checked before running; returns the game.
    pub fn validate(&self) -> Result<AnyGame> {
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.budget == Some(0) || self.stride == Some(0) {
            return Err(Error::Config("budget and stride must be positive".into()));
        }
        if !(self.converged_below > 0.0) {
            return Err(Error::Config("converged_below must be positive".into()));
        }
        for m in self.effective_methods() {
            m.validate()?;
        }
        let game = self.game.build()?;
        let d = game.dim();
        if let Some(r) = &self.reference {
            expect_len("reference", r.len(), d)?;
        }
        match &self.init {
            InitSpec::Point { z } => {
                expect_len("initial point", z.len(), d)?;
                if !game.domain().contains(z, 1e-9) {
                    return Err(Error::Config("initial point is not feasible".into()));
                }
            }
            InitSpec::Random => {}
            InitSpec::Perturbation { radius } => {
                if !(*radius >= 0.0 && radius.is_finite()) {
                    return Err(Error::Config(format!("perturbation radius {radius} is invalid")));
                }
                if self.reference.is_none() {
                    return Err(Error::Config("a perturbation start needs a reference point".into()));
                }
            }
        }
        Ok(game)
    }
}

fn expect_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} has {got} coordinates, the game has {want}")))
    }
}

/// Many seeded random games under one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub n_games: usize,
    /// Strategy counts of team A's players.
    pub team_a: Vec<usize>,
    pub team_b: Vec<usize>,
    pub method: DynamicsConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub converged_below: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.method.validate()?;
        if !(self.converged_below > 0.0) {
            return Err(Error::Config("converged_below must be positive".into()));
        }
        // shape errors surface here rather than once per game
        TeamGame::constant(self.team_a.clone(), self.team_b.clone(), 0.0)
            .map_err(|e| Error::Config(format!("invalid sweep shape: {e}")))?;
        Ok(())
    }
}

/// Spectral report at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub game: GameSpec,
    /// Defaults to the center of the domain.
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    /// Dynamics whose Jacobian spectra are reported (only method, η, k, p
    /// are used).
    #[serde(default)]
    pub dynamics: Vec<DynamicsConfig>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl StabilityConfig {
    pub fn validate(&self) -> Result<(AnyGame, Vec<f64>)> {
        for m in &self.dynamics {
            m.validate()?;
        }
        let game = self.game.build()?;
        let z = match &self.point {
            Some(z) => {
                expect_len("point", z.len(), game.dim())?;
                z.clone()
            }
            None => game.domain().center(),
        };
        Ok((game, z))
    }
}

/// Reads a JSON document; parse failures are configuration errors.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
