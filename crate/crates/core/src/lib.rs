//! Cross-cultural Rational Speech Act model of intensifier interpretation.
//!
//! A literal listener interprets "very helpful" through a smooth
//! double-threshold denotation; a speaker chooses among the six forms of a
//! predicate by trading off informativity, politeness, and modifier cost; a
//! pragmatic listener inverts that speaker. Parameters can be shared or made
//! culture-specific (UK/US), fitted with CMA-ES by maximum likelihood, and
//! compared by AIC/BIC.
//!
//! Modules, bottom-up:
//! - [`lexicon`], [`grid`], [`semantics`], [`politeness`], [`rsa`]: the model.
//! - [`data`]: trial CSVs, z-scoring, effect scores, politeness table.
//! - [`model`]: culture-sharing specs and the flat parameter layout.
//! - [`fitting`]: likelihood, CMA-ES, multi-start fits, comparison.
//! - [`analysis`]: robustness checks and synthetic parameter recovery.

pub mod adapter;
pub mod analysis;
pub mod data;
pub mod error;
pub mod fitting;
pub mod grid;
pub mod lexicon;
pub mod model;
pub mod politeness;
pub mod rsa;
pub mod semantics;

pub use error::{Error, Result};
pub use grid::{GridConfig, StateGrid};
pub use lexicon::{Country, Experiment, Modifier, Predicate, Utterance, Valence};
pub use model::{builtin_specs, CultureModel, CultureParams, ModelSpec, ParamName, SemanticConstants};
pub use politeness::PolitenessTable;
pub use rsa::{literal_listener, pragmatic_listener, speaker_dist, speaker_utility, PragmaticParams, SpeakerContext};
pub use semantics::{denotation, Interval, SemanticParams};
