use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::TrialRecord;
use crate::error::{Error, Result};
use crate::fitting::cmaes::{cma_es, CmaConfig, CmaOutcome, Termination, TraceEntry};
use crate::fitting::objective::Objective;
use crate::grid::GridConfig;
use crate::model::{pack, CultureModel, CultureParams, ModelSpec, SemanticConstants};
use crate::politeness::PolitenessTable;

/// Multi-start fitting configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub cma: CmaConfig,
    /// Number of independent starts from the default initial point.
    pub starts: usize,
    /// Additional starting vectors (in the layout of the spec being fit).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_starts: Vec<Vec<f64>>,
    pub constants: SemanticConstants,
    pub grid: GridConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            cma: CmaConfig::default(),
            starts: 5,
            extra_starts: Vec::new(),
            constants: SemanticConstants::default(),
            grid: GridConfig::default(),
        }
    }
}

impl FitConfig {
    pub fn with_extra_start(mut self, v: Vec<f64>) -> Self {
        self.extra_starts.push(v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub stream: u64,
    /// Whether this start came from [`FitConfig::extra_starts`].
    pub supplied: bool,
    pub nll: f64,
    pub generations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

/// Best multi-start fit of one model spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub layout: Vec<String>,
    pub vector: Vec<f64>,
    pub params: CultureParams,
    pub df: usize,
    pub n_trials: usize,
    pub nll: f64,
    pub nll_by_country: BTreeMap<String, f64>,
    pub aic: f64,
    pub bic: f64,
    pub seed: u64,
    pub final_sigma: f64,
    pub starts: Vec<StartSummary>,
    /// Trace of the winning start.
    pub trace: Vec<TraceEntry>,
}

impl FitResult {
    pub fn score(&self) -> crate::fitting::compare::ModelScore {
        crate::fitting::compare::ModelScore {
            name: self.spec.name.clone(),
            varied: self.spec.varied.iter().map(|p| p.to_string()).collect(),
            df: self.df,
            nll: self.nll,
            n_trials: self.n_trials,
        }
    }
}

pub fn aic(nll: f64, df: usize) -> f64 {
    2.0 * nll + 2.0 * df as f64
}

pub fn bic(nll: f64, df: usize, n: usize) -> f64 {
    2.0 * nll + df as f64 * (n as f64).ln()
}

/// Default starting vector for a spec.
pub fn initial_vector(spec: &ModelSpec, constants: SemanticConstants) -> Vec<f64> {
    let mut model = CultureModel::initial(constants);
    if spec.freeze_social {
        model.pragmatics.phi_s = 0.0;
    }
    pack(&CultureParams::shared(model), spec)
}

fn in_bounds(bounds: &[(f64, f64)], v: &[f64]) -> bool {
    bounds.iter().zip(v).all(|(&(lo, hi), x)| *x >= lo && *x <= hi)
}

fn slot_bounds(spec: &ModelSpec) -> Vec<(f64, f64)> {
    spec.layout().iter().map(|s| s.bounds()).collect()
}

/// Fits `spec` to every interpretation trial in `trials` (politeness trials
/// are ignored) with multi-start CMA-ES and returns the best start.
pub fn fit_model(
    trials: &[TrialRecord],
    politeness: &PolitenessTable,
    spec: &ModelSpec,
    config: &FitConfig,
) -> Result<FitResult> {
    let grid = config.grid.build()?;
    let objective = Objective::new(trials, spec, config.constants, politeness, &grid)?;
    if objective.n_trials() == 0 {
        return Err(Error::Data("no interpretation trials to fit".into()));
    }
    let df = spec.df();
    for v in &config.extra_starts {
        if v.len() != df {
            return Err(Error::Usage(format!("start vector has length {}, model {} needs {df}", v.len(), spec.name)));
        }
    }
    let bounds = slot_bounds(spec);
    let f = |v: &[f64]| {
        if !in_bounds(&bounds, v) {
            return f64::INFINITY;
        }
        objective.eval(v).unwrap_or(f64::INFINITY)
    };
    let x0 = initial_vector(spec, config.constants);
    let (best, starts) = multi_start(f, &x0, &config.extra_starts, config)?;
    finish(spec, &objective, best.best, df, best.final_sigma, config.cma.seed, starts, best.trace)
}

/// Fits only the entries `free` of `base`, holding the rest fixed. The
/// result's `df` counts the free entries.
pub fn fit_partial(
    trials: &[TrialRecord],
    politeness: &PolitenessTable,
    spec: &ModelSpec,
    base: &[f64],
    free: &[usize],
    config: &FitConfig,
) -> Result<FitResult> {
    let grid = config.grid.build()?;
    let objective = Objective::new(trials, spec, config.constants, politeness, &grid)?;
    if objective.n_trials() == 0 {
        return Err(Error::Data("no interpretation trials to fit".into()));
    }
    if base.len() != spec.df() {
        return Err(Error::Usage(format!("base vector has length {}, model {} needs {}", base.len(), spec.name, spec.df())));
    }
    if free.is_empty() || free.iter().any(|&i| i >= base.len()) {
        return Err(Error::Usage(format!("free indices {free:?} do not address a vector of length {}", base.len())));
    }
    let bounds = slot_bounds(spec);
    let merge = |sub: &[f64]| {
        let mut v = base.to_vec();
        for (&i, &x) in free.iter().zip(sub) {
            v[i] = x;
        }
        v
    };
    let f = |sub: &[f64]| {
        let v = merge(sub);
        if !in_bounds(&bounds, &v) {
            return f64::INFINITY;
        }
        objective.eval(&v).unwrap_or(f64::INFINITY)
    };
    let x0: Vec<f64> = free.iter().map(|&i| base[i]).collect();
    let (best, starts) = multi_start(f, &x0, &[], config)?;
    let vector = merge(&best.best);
    finish(spec, &objective, vector, free.len(), best.final_sigma, config.cma.seed, starts, best.trace)
}

/// Runs `config.starts` CMA-ES starts from `x0` on streams `0..starts`, then
/// one from each extra vector on the following streams, and keeps the best.
fn multi_start<F>(f: F, x0: &[f64], extras: &[Vec<f64>], config: &FitConfig) -> Result<(CmaOutcome, Vec<StartSummary>)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut jobs: Vec<(u64, bool, &[f64])> = (0..config.starts as u64).map(|k| (k, false, x0)).collect();
    for (j, v) in extras.iter().enumerate() {
        jobs.push((config.starts as u64 + j as u64, true, v.as_slice()));
    }
    if jobs.is_empty() {
        return Err(Error::Config("fit needs at least one start".into()));
    }
    let runs: Vec<(u64, bool, Result<CmaOutcome>)> = jobs
        .par_iter()
        .map(|&(stream, supplied, start)| {
            let cfg = CmaConfig { stream, ..config.cma.clone() };
            (stream, supplied, cma_es(&f, start, &cfg))
        })
        .collect();

    let mut starts = Vec::new();
    let mut failures = Vec::new();
    let mut winner: Option<CmaOutcome> = None;
    for (stream, supplied, run) in runs {
        match run {
            Ok(out) => {
                starts.push(StartSummary {
                    stream,
                    supplied,
                    nll: out.best_value,
                    generations: out.generations,
                    evaluations: out.evaluations,
                    termination: out.termination,
                });
                if winner.as_ref().is_none_or(|w| out.best_value < w.best_value) {
                    winner = Some(out);
                }
            }
            Err(e) => failures.push(format!("start {stream}: {e}")),
        }
    }
    match winner.filter(|w| w.best_value.is_finite()) {
        Some(best) => Ok((best, starts)),
        None => Err(Error::Optimization(format!("every start failed:\n{}", failures.join("\n")))),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    spec: &ModelSpec,
    objective: &Objective<'_>,
    vector: Vec<f64>,
    df: usize,
    final_sigma: f64,
    seed: u64,
    starts: Vec<StartSummary>,
    trace: Vec<TraceEntry>,
) -> Result<FitResult> {
    let params = objective.unpack(&vector)?;
    let [uk, us] = objective.eval_by_country(&params)?;
    let nll = objective.eval(&vector)?;
    let n = objective.n_trials();
    Ok(FitResult {
        spec: spec.clone(),
        layout: crate::model::layout_labels(spec),
        vector,
        params,
        df,
        n_trials: n,
        nll,
        nll_by_country: BTreeMap::from([("UK".to_string(), uk), ("US".to_string(), us)]),
        aic: aic(nll, df),
        bic: bic(nll, df, n),
        seed,
        final_sigma,
        starts,
        trace,
    })
}

/// Scores a fixed vector as if it were a fit (no optimization).
pub fn evaluate_vector(
    trials: &[TrialRecord],
    politeness: &PolitenessTable,
    spec: &ModelSpec,
    vector: Vec<f64>,
    config: &FitConfig,
) -> Result<FitResult> {
    let grid = config.grid.build()?;
    let objective = Objective::new(trials, spec, config.constants, politeness, &grid)?;
    finish(spec, &objective, vector, spec.df(), 0.0, config.cma.seed, Vec::new(), Vec::new())
}
