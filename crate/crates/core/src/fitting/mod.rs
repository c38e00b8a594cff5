//! Likelihood, optimizer, and model comparison.

pub mod cmaes;
pub mod compare;
pub mod fit;
pub mod objective;

pub use cmaes::{cma_es, CmaConfig, CmaOutcome, Termination, TraceEntry};
pub use compare::{compare_models, ComparisonReport, ComparisonRow, ModelScore};
pub use fit::{aic, bic, evaluate_vector, fit_model, fit_partial, initial_vector, FitConfig, FitResult, StartSummary};
pub use objective::{dataset_nll, response_nll, trial_nll, Objective, ResponseCounts};
