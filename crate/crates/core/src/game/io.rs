use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CongestionGame, Family, TeamGame};
use crate::error::Result;

/// On-disk form of a [`TeamGame`]: strategy counts per team, the row-major
/// payoff tensor (team B's payoff), and optional family metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeamGameDoc {
    pub team_a: Vec<usize>,
    pub team_b: Vec<usize>,
    pub payoff: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Family>,
}

impl From<&TeamGame> for TeamGameDoc {
    fn from(g: &TeamGame) -> Self {
        Self {
            team_a: g.team_a().to_vec(),
            team_b: g.team_b().to_vec(),
            payoff: g.payoff().to_vec(),
            meta: g.family().cloned(),
        }
    }
}

impl TryFrom<TeamGameDoc> for TeamGame {
    type Error = crate::Error;

    fn try_from(doc: TeamGameDoc) -> Result<Self> {
        let g = TeamGame::new(doc.team_a, doc.team_b, doc.payoff)?;
        Ok(match doc.meta {
            Some(f) => g.with_family(f),
            None => g,
        })
    }
}

pub fn save_team_game(game: &TeamGame, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&TeamGameDoc::from(game))?)?;
    Ok(())
}

pub fn load_team_game(path: &Path) -> Result<TeamGame> {
    let doc: TeamGameDoc = serde_json::from_str(&fs::read_to_string(path)?)?;
    doc.try_into()
}

pub fn save_congestion(game: &CongestionGame, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(game)?)?;
    Ok(())
}

pub fn load_congestion(path: &Path) -> Result<CongestionGame> {
    let g: CongestionGame = serde_json::from_str(&fs::read_to_string(path)?)?;
    g.validate()?;
    Ok(g)
}
