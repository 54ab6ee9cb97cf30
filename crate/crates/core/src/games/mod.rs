//! Security-game harnesses for copy-protected malleable-puncturable schemes.

mod copy;
mod hybrids;
mod moe;
mod protect;
mod scheme;
mod security;

pub use copy::*;
pub use hybrids::*;
pub use moe::*;
pub use protect::*;
pub use scheme::*;
pub use security::*;

use serde::Serialize;

use crate::stats::{wilson, RateSummary};

/// One trial of a game.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub outcome: bool,
    /// Per-side outcomes for two-party games.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side_outcomes: Option<(bool, bool)>,
    /// Acceptance probabilities recorded along the way, when known.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub probabilities: Vec<f64>,
}

impl TrialRecord {
    pub fn new(trial: u64, outcome: bool) -> Self {
        TrialRecord {
            trial,
            outcome,
            side_outcomes: None,
            probabilities: Vec::new(),
        }
    }
}

/// All trials of one game run plus the summary rate.
#[derive(Clone, Debug, Serialize)]
pub struct GameRun {
    pub game: String,
    pub adversary: String,
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
    pub summary: RateSummary,
    /// The rate the adversary is expected to achieve, if known in closed form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
}

impl GameRun {
    pub(crate) fn new(game: &str, adversary: &str, seed: u64, trials: Vec<TrialRecord>, expected: Option<f64>) -> Self {
        let wins = trials.iter().filter(|t| t.outcome).count() as u64;
        GameRun {
            game: game.to_string(),
            adversary: adversary.to_string(),
            seed,
            summary: wilson(wins, trials.len() as u64),
            trials,
            expected,
        }
    }

    pub fn rate(&self) -> f64 {
        self.summary.rate
    }
}
