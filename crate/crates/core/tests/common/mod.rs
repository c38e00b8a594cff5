#![allow(dead_code)]

use xrsa::analysis::{default_truth, simulate_trials, synthetic_politeness};
use xrsa::data::TrialRecord;
use xrsa::fitting::{CmaConfig, FitConfig};
use xrsa::{Experiment, PolitenessTable, SemanticConstants, StateGrid};

pub fn grid() -> StateGrid {
    StateGrid::new(-4.0, 4.0, 101).unwrap()
}

/// Synthetic dialogue trials from the default generating parameters.
pub fn synthetic(n: usize, seed: u64) -> (Vec<TrialRecord>, PolitenessTable) {
    let pol = synthetic_politeness();
    let truth = default_truth(SemanticConstants::default());
    (simulate_trials(&truth, &pol, &grid(), n, seed, false).unwrap(), pol)
}

/// The same draw relabelled as narrator trials.
pub fn as_narrator(trials: &[TrialRecord]) -> Vec<TrialRecord> {
    trials
        .iter()
        .map(|t| TrialRecord { experiment: Experiment::Narrator, ..t.clone() })
        .collect()
}

pub fn quick(starts: usize, generations: usize) -> FitConfig {
    FitConfig {
        cma: CmaConfig { max_generations: generations, ..CmaConfig::default() },
        starts,
        ..FitConfig::default()
    }
}
