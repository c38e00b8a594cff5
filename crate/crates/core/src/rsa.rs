//! Literal listener, speaker, and pragmatic listener over a discretized state
//! space.
//!
//! The speaker trades off informativity (log-probability that a literal
//! listener recovers the state), social value (politeness rating of the
//! utterance), and a flat production cost for every overt modifier. The
//! pragmatic listener inverts that speaker with Bayes' rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::StateGrid;
use crate::lexicon::{Country, Modifier, Predicate, Utterance};
use crate::politeness::PolitenessTable;
use crate::semantics::{denotation, SemanticParams};

/// Weights on informativity and social utility, and the modifier cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PragmaticParams {
    pub phi_i: f64,
    pub phi_s: f64,
    pub cost: f64,
}

impl PragmaticParams {
    pub fn new(phi_i: f64, phi_s: f64, cost: f64) -> Result<Self> {
        let p = Self { phi_i, phi_s, cost };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi_i >= 0.0) || !(self.cost >= 0.0) || !self.phi_s.is_finite() {
            return Err(Error::Config(format!(
                "pragmatic params need phi_i >= 0, cost >= 0, finite phi_s; got {self:?}"
            )));
        }
        Ok(())
    }

    /// The same weights with the social term switched off.
    pub fn without_social(self) -> Self {
        Self { phi_s: 0.0, ..self }
    }
}

/// Everything the speaker needs to score utterances for one culture.
#[derive(Debug, Clone, Copy)]
pub struct SpeakerContext<'a> {
    pub grid: &'a StateGrid,
    pub semantics: &'a SemanticParams,
    pub pragmatics: &'a PragmaticParams,
    pub politeness: &'a PolitenessTable,
    pub country: Country,
}

/// `P_L0(s | u)` over the grid points.
pub fn literal_listener(utterance: &Utterance, sem: &SemanticParams, grid: &StateGrid) -> Vec<f64> {
    let mut mass: Vec<f64> = grid
        .points()
        .iter()
        .zip(grid.prior_mass())
        .map(|(&s, &p)| denotation(s, utterance, sem) * p)
        .collect();
    let total: f64 = mass.iter().sum();
    debug_assert!(total > 0.0, "literal listener mass vanished");
    for m in &mut mass {
        *m /= total;
    }
    mass
}

#[inline]
fn combine(phi_i: f64, ln_literal: f64, phi_s: f64, social: f64, cost: f64) -> f64 {
    phi_i * ln_literal + phi_s * social - cost
}

fn modifier_cost(utterance: &Utterance, prag: &PragmaticParams) -> f64 {
    if utterance.modifier.is_modified() {
        prag.cost
    } else {
        0.0
    }
}

/// Speaker utility of `utterance` when the intended state is grid point `state`.
pub fn speaker_utility(utterance: &Utterance, state: usize, ctx: &SpeakerContext<'_>) -> Result<f64> {
    check_state(state, ctx.grid)?;
    let social = ctx.politeness.get(ctx.country, *utterance)?;
    let l0 = literal_listener(utterance, ctx.semantics, ctx.grid);
    let prag = ctx.pragmatics;
    Ok(combine(prag.phi_i, l0[state].ln(), prag.phi_s, social, modifier_cost(utterance, prag)))
}

/// `ln P_L0(s | ·)` for the six modifier slots, `[modifier index][state]`.
///
/// The literal listener ignores the predicate, so one table serves every
/// predicate's alternative set.
pub fn literal_log_table(sem: &SemanticParams, grid: &StateGrid) -> Vec<Vec<f64>> {
    Modifier::ALL
        .iter()
        .map(|&m| {
            let u = Utterance::new(Predicate::Helpful, m);
            literal_listener(&u, sem, grid).into_iter().map(f64::ln).collect()
        })
        .collect()
}

fn utilities_from_log_table(
    alternatives: &[Utterance],
    log_l0: &[Vec<f64>],
    ctx: &SpeakerContext<'_>,
) -> Result<Vec<Vec<f64>>> {
    let prag = ctx.pragmatics;
    alternatives
        .iter()
        .map(|u| {
            let social = ctx.politeness.get(ctx.country, *u)?;
            let cost = modifier_cost(u, prag);
            Ok(log_l0[u.modifier.index()]
                .iter()
                .map(|&ln_p| combine(prag.phi_i, ln_p, prag.phi_s, social, cost))
                .collect())
        })
        .collect()
}

/// Utilities of every alternative at every state, `[alternative][state]`.
pub fn utility_table(alternatives: &[Utterance], ctx: &SpeakerContext<'_>) -> Result<Vec<Vec<f64>>> {
    let log_l0 = literal_log_table(ctx.semantics, ctx.grid);
    utilities_from_log_table(alternatives, &log_l0, ctx)
}

/// Max-shifted softmax.
pub fn softmax(utilities: &[f64]) -> Vec<f64> {
    let max = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = utilities.iter().map(|u| (u - max).exp()).collect();
    let total: f64 = out.iter().sum();
    for p in &mut out {
        *p /= total;
    }
    out
}

/// Production probabilities `P_S1(· | state)` over `alternatives`, where each
/// row of `utilities` holds one alternative's utilities across states.
fn production_at(utilities: &[Vec<f64>], state: usize) -> Vec<f64> {
    let column: Vec<f64> = utilities.iter().map(|row| row[state]).collect();
    softmax(&column)
}

/// `P_S1(· | s)` over `alternatives` at grid point `state`.
pub fn speaker_dist(state: usize, alternatives: &[Utterance], ctx: &SpeakerContext<'_>) -> Result<Vec<f64>> {
    check_state(state, ctx.grid)?;
    if alternatives.is_empty() {
        return Err(Error::Usage("speaker needs at least one alternative".into()));
    }
    let utilities = utility_table(alternatives, ctx)?;
    Ok(production_at(&utilities, state))
}

/// Pragmatic-listener posteriors for every alternative, `[alternative][state]`.
///
/// Row `j` is `P_L1(s | alternatives[j])`. A single pass shares the speaker's
/// normalization across all alternatives.
pub fn listener_table(alternatives: &[Utterance], ctx: &SpeakerContext<'_>) -> Result<Vec<Vec<f64>>> {
    let log_l0 = literal_log_table(ctx.semantics, ctx.grid);
    listener_table_with(alternatives, &log_l0, ctx)
}

/// [`listener_table`] reusing a precomputed [`literal_log_table`].
pub fn listener_table_with(
    alternatives: &[Utterance],
    log_l0: &[Vec<f64>],
    ctx: &SpeakerContext<'_>,
) -> Result<Vec<Vec<f64>>> {
    if alternatives.is_empty() {
        return Err(Error::Usage("speaker needs at least one alternative".into()));
    }
    let utilities = utilities_from_log_table(alternatives, log_l0, ctx)?;
    let n = ctx.grid.len();
    let prior = ctx.grid.prior_mass();
    let mut joint = vec![vec![0.0; n]; alternatives.len()];
    for state in 0..n {
        let s1 = production_at(&utilities, state);
        for (row, p) in joint.iter_mut().zip(&s1) {
            row[state] = p * prior[state];
        }
    }
    for row in &mut joint {
        let total: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    Ok(joint)
}

/// `P_L1(s | utterance)` given the speaker's alternative set.
pub fn pragmatic_listener(
    utterance: &Utterance,
    alternatives: &[Utterance],
    ctx: &SpeakerContext<'_>,
) -> Result<Vec<f64>> {
    let idx = alternatives
        .iter()
        .position(|a| a == utterance)
        .ok_or_else(|| Error::Usage(format!("'{utterance}' is not among the speaker's alternatives")))?;
    Ok(listener_table(alternatives, ctx)?.swap_remove(idx))
}

fn check_state(state: usize, grid: &StateGrid) -> Result<()> {
    if state >= grid.len() {
        return Err(Error::Usage(format!("state index {state} outside grid of {} points", grid.len())));
    }
    Ok(())
}
