//! Negative log-likelihood of interpretation responses under the pragmatic
//! listener.
//!
//! Each response is scored by the L1 probability mass of the grid bin nearest
//! to its z-scored value. Narrator-condition trials are scored with the
//! social weight set to zero.

use std::collections::BTreeMap;

use crate::data::TrialRecord;
use crate::error::{Error, Result};
use crate::grid::StateGrid;
use crate::lexicon::{Country, Experiment, Modifier, Predicate, Utterance};
use crate::model::{unpack, CultureModel, CultureParams, ModelSpec, SemanticConstants};
use crate::politeness::PolitenessTable;
use crate::rsa::{listener_table_with, literal_log_table, pragmatic_listener, PragmaticParams, SpeakerContext};

fn effective_pragmatics(model: &CultureModel, experiment: Experiment) -> PragmaticParams {
    match experiment {
        Experiment::Narrator => model.pragmatics.without_social(),
        _ => model.pragmatics,
    }
}

fn observed_z(trial: &TrialRecord) -> Result<f64> {
    if !trial.experiment.is_interpretation() {
        return Err(Error::Usage(format!(
            "trial of participant {} is a politeness rating, not an interpretation",
            trial.participant_id
        )));
    }
    trial
        .response_z
        .ok_or_else(|| Error::Data(format!("trial of participant {} has not been z-scored", trial.participant_id)))
}

/// `-ln` of the posterior mass in the grid bin nearest to `z`.
pub fn response_nll(posterior: &[f64], grid: &StateGrid, z: f64) -> f64 {
    -posterior[grid.nearest_index(z)].ln()
}

/// `-ln P_L1(bin(z) | utterance)` for a single trial.
pub fn trial_nll(
    trial: &TrialRecord,
    params: &CultureParams,
    politeness: &PolitenessTable,
    grid: &StateGrid,
) -> Result<f64> {
    let z = observed_z(trial)?;
    let model = params.get(trial.country);
    let prag = effective_pragmatics(model, trial.experiment);
    let ctx = SpeakerContext {
        grid,
        semantics: &model.semantics,
        pragmatics: &prag,
        politeness,
        country: trial.country,
    };
    let u = trial.utterance();
    let l1 = pragmatic_listener(&u, &u.alternatives(), &ctx)?;
    Ok(response_nll(&l1, grid, z))
}

/// Response counts per (country, condition, predicate, modifier, bin): a
/// sufficient statistic for the dataset likelihood.
#[derive(Debug, Clone)]
pub struct ResponseCounts {
    groups: Vec<CountGroup>,
    n_trials: usize,
}

#[derive(Debug, Clone)]
struct CountGroup {
    country: Country,
    experiment: Experiment,
    predicate: Predicate,
    /// `[modifier index]` -> sorted (bin, count)
    rows: [Vec<(usize, f64)>; 6],
}

impl ResponseCounts {
    /// Tallies interpretation trials; politeness trials are ignored.
    pub fn new(trials: &[TrialRecord], grid: &StateGrid) -> Result<Self> {
        let mut tally: BTreeMap<(Country, Experiment, Predicate), [BTreeMap<usize, f64>; 6]> = BTreeMap::new();
        let mut n_trials = 0;
        for t in trials.iter().filter(|t| t.experiment.is_interpretation()) {
            let z = observed_z(t)?;
            let rows = tally.entry((t.country, t.experiment, t.predicate)).or_default();
            *rows[t.modifier.index()].entry(grid.nearest_index(z)).or_insert(0.0) += 1.0;
            n_trials += 1;
        }
        let groups = tally
            .into_iter()
            .map(|((country, experiment, predicate), rows)| CountGroup {
                country,
                experiment,
                predicate,
                rows: rows.map(|r| r.into_iter().collect()),
            })
            .collect();
        Ok(Self { groups, n_trials })
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }

    /// Summed NLL per country.
    pub fn nll_by_country(
        &self,
        params: &CultureParams,
        politeness: &PolitenessTable,
        grid: &StateGrid,
    ) -> Result<[f64; 2]> {
        let mut totals = [0.0; 2];
        let mut log_l0: [Option<Vec<Vec<f64>>>; 2] = [None, None];
        for g in &self.groups {
            let model = params.get(g.country);
            let log_l0 = log_l0[g.country.index()].get_or_insert_with(|| literal_log_table(&model.semantics, grid));
            let prag = effective_pragmatics(model, g.experiment);
            let ctx = SpeakerContext {
                grid,
                semantics: &model.semantics,
                pragmatics: &prag,
                politeness,
                country: g.country,
            };
            let alternatives = Utterance::bare(g.predicate).alternatives();
            let l1 = listener_table_with(&alternatives, log_l0, &ctx)?;
            let mut sum = 0.0;
            for m in Modifier::ALL {
                for &(bin, count) in &g.rows[m.index()] {
                    sum -= count * l1[m.index()][bin].ln();
                }
            }
            totals[g.country.index()] += sum;
        }
        Ok(totals)
    }

    pub fn nll(&self, params: &CultureParams, politeness: &PolitenessTable, grid: &StateGrid) -> Result<f64> {
        let [uk, us] = self.nll_by_country(params, politeness, grid)?;
        Ok(uk + us)
    }
}

/// Reusable dataset objective over flat parameter vectors.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    counts: ResponseCounts,
    spec: &'a ModelSpec,
    constants: SemanticConstants,
    politeness: &'a PolitenessTable,
    grid: &'a StateGrid,
}

impl<'a> Objective<'a> {
    pub fn new(
        trials: &[TrialRecord],
        spec: &'a ModelSpec,
        constants: SemanticConstants,
        politeness: &'a PolitenessTable,
        grid: &'a StateGrid,
    ) -> Result<Self> {
        Ok(Self { counts: ResponseCounts::new(trials, grid)?, spec, constants, politeness, grid })
    }

    pub fn spec(&self) -> &ModelSpec {
        self.spec
    }

    pub fn constants(&self) -> SemanticConstants {
        self.constants
    }

    pub fn n_trials(&self) -> usize {
        self.counts.n_trials()
    }

    pub fn unpack(&self, v: &[f64]) -> Result<CultureParams> {
        unpack(v, self.spec, self.constants)
    }

    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        self.eval_params(&self.unpack(v)?)
    }

    pub fn eval_params(&self, params: &CultureParams) -> Result<f64> {
        self.counts.nll(params, self.politeness, self.grid)
    }

    pub fn eval_by_country(&self, params: &CultureParams) -> Result<[f64; 2]> {
        self.counts.nll_by_country(params, self.politeness, self.grid)
    }
}

/// Sum of [`trial_nll`] over every interpretation trial, using the UK or US
/// parameters unpacked from `v` according to each trial's country.
pub fn dataset_nll(
    trials: &[TrialRecord],
    v: &[f64],
    spec: &ModelSpec,
    constants: SemanticConstants,
    politeness: &PolitenessTable,
    grid: &StateGrid,
) -> Result<f64> {
    Objective::new(trials, spec, constants, politeness, grid)?.eval(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use crate::semantics::Interval;

    fn trial(country: Country, exp: Experiment, pred: Predicate, m: Modifier, z: f64) -> TrialRecord {
        TrialRecord {
            participant_id: format!("p{z}"),
            country,
            experiment: exp,
            predicate: pred,
            modifier: m,
            response: 0.5,
            response_z: Some(z),
            paired_modifier: None,
        }
    }

    fn uninformative(constants: SemanticConstants) -> CultureParams {
        let mut m = CultureModel::initial(constants);
        for modifier in Modifier::ALL {
            *m.semantics.interval_mut(modifier) = Interval::new(-50.0, 50.0);
        }
        m.pragmatics = PragmaticParams { phi_i: 1.0, phi_s: 0.0, cost: 0.0 };
        CultureParams::shared(m)
    }

    #[test]
    fn bin_scoring() {
        let grid = StateGrid::new(-4.0, 4.0, 101).unwrap();
        let uniform = vec![1.0 / 101.0; 101];
        assert!((response_nll(&uniform, &grid, 0.37) - 101f64.ln()).abs() < 1e-12);
        assert!((101f64.ln() - 4.615).abs() < 1e-3);
        let mut certain = vec![0.0; 101];
        certain[grid.nearest_index(1.3)] = 1.0;
        assert_eq!(response_nll(&certain, &grid, 1.3), 0.0);
        // out-of-range responses land in the edge bins
        certain = vec![0.0; 101];
        certain[100] = 1.0;
        assert_eq!(response_nll(&certain, &grid, 9.0), 0.0);
    }

    #[test]
    fn uninformative_listener_scores_prior_bin() {
        let grid = StateGrid::new(-4.0, 4.0, 101).unwrap();
        let params = uninformative(SemanticConstants::default());
        let pol = PolitenessTable::constant(0.0);
        let t = trial(Country::UK, Experiment::Dialogue, Predicate::Helpful, Modifier::Very, 0.0);
        let nll = trial_nll(&t, &params, &pol, &grid).unwrap();
        assert!((nll + grid.prior_mass()[50].ln()).abs() < 1e-9);
    }

    #[test]
    fn empty_and_duplicated_datasets() {
        let grid = StateGrid::new(-4.0, 4.0, 101).unwrap();
        let spec = ModelSpec::builtin("M1").unwrap();
        let c = SemanticConstants::default();
        let pol = PolitenessTable::constant(0.1);
        let v = crate::model::pack(&CultureParams::shared(CultureModel::initial(c)), &spec);
        assert_eq!(dataset_nll(&[], &v, &spec, c, &pol, &grid).unwrap(), 0.0);
        let trials = vec![
            trial(Country::UK, Experiment::Dialogue, Predicate::Helpful, Modifier::Very, 1.2),
            trial(Country::US, Experiment::Narrator, Predicate::Boring, Modifier::None, -0.3),
            trial(Country::US, Experiment::Dialogue, Predicate::Boring, Modifier::Slightly, -4.6),
        ];
        let once = dataset_nll(&trials, &v, &spec, c, &pol, &grid).unwrap();
        let doubled: Vec<_> = trials.iter().chain(&trials).cloned().collect();
        let twice = dataset_nll(&doubled, &v, &spec, c, &pol, &grid).unwrap();
        assert_eq!(twice, 2.0 * once);
    }

    #[test]
    fn politeness_trials_rejected_by_trial_nll() {
        let grid = StateGrid::new(-4.0, 4.0, 11).unwrap();
        let params = uninformative(SemanticConstants::default());
        let pol = PolitenessTable::constant(0.0);
        let t = trial(Country::UK, Experiment::Politeness, Predicate::Helpful, Modifier::Very, 0.0);
        assert!(matches!(trial_nll(&t, &params, &pol, &grid), Err(Error::Usage(_))));
        let mut t = trial(Country::UK, Experiment::Dialogue, Predicate::Helpful, Modifier::Very, 0.0);
        t.response_z = None;
        assert!(matches!(trial_nll(&t, &params, &pol, &grid), Err(Error::Data(_))));
    }
}
