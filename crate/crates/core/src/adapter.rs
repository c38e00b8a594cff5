//! Conversion of raw long-format exports into the trial schema.
//!
//! A raw file has one row per response but may name its columns and values
//! differently. An [`AdapterConfig`] says which column holds each field
//! (columns left unset are looked up among common aliases), how labels map
//! onto schema values, and how to rescale responses onto [0, 1]:
//!
//! ```json
//! {
//!   "columns": { "participant_id": "workerid", "response": "slider" },
//!   "experiment": "dialogue",
//!   "response_scale": 100,
//!   "values": { "experiment": { "exp1": "dialogue" } }
//! }
//! ```
//!
//! Built-in value aliases cover `GB`/`British`/`USA`/`American` for country,
//! `bare`/`unmodified`/`kind of` for modifier, and `dialog`/`speaker` for
//! experiment. Labels are matched case-insensitively.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::data::{TrialRecord, HEADER, PAIRED_COLUMN};
use crate::error::{Error, Result};
use crate::lexicon::{Country, Experiment, Modifier, Predicate};

/// Raw column name for each schema field; `None` means auto-detect.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMap {
    pub participant_id: Option<String>,
    pub country: Option<String>,
    pub experiment: Option<String>,
    pub predicate: Option<String>,
    pub modifier: Option<String>,
    pub response: Option<String>,
    pub paired_modifier: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdapterConfig {
    pub columns: ColumnMap,
    /// Condition for every row, unless an experiment column is configured.
    pub experiment: Option<Experiment>,
    /// Raw responses are divided by this (100 for a 0-100 slider).
    pub response_scale: f64,
    /// Extra label aliases per field: field -> raw label -> schema label.
    pub values: BTreeMap<String, BTreeMap<String, String>>,
}

impl Default for AdapterConfig {
    fn default() -> Self {
        Self { columns: ColumnMap::default(), experiment: None, response_scale: 1.0, values: BTreeMap::new() }
    }
}

impl AdapterConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(json)?;
        if !(cfg.response_scale > 0.0 && cfg.response_scale.is_finite()) {
            return Err(Error::Config(format!("response_scale must be positive, got {}", cfg.response_scale)));
        }
        Ok(cfg)
    }
}

const ALIASES: [(&str, &[&str]); 7] = [
    ("participant_id", &["participant_id", "participant", "subject", "subject_id", "workerid", "worker_id", "pid"]),
    ("country", &["country", "nationality", "culture", "dialect"]),
    ("experiment", &["experiment", "condition", "exp", "task"]),
    ("predicate", &["predicate", "adjective", "adj", "item", "word"]),
    ("modifier", &["modifier", "intensifier", "degree", "adverb"]),
    ("response", &["response", "rating", "slider", "value", "score"]),
    (PAIRED_COLUMN, &[PAIRED_COLUMN, "paired", "pair_modifier", "baseline_for"]),
];

fn normalize(s: &str) -> String {
    s.trim().to_ascii_lowercase().replace([' ', '-'], "_")
}

fn locate(header: &[String], field: &str, configured: &Option<String>) -> Result<Option<usize>> {
    let norm: Vec<String> = header.iter().map(|h| normalize(h)).collect();
    if let Some(name) = configured {
        return norm
            .iter()
            .position(|h| *h == normalize(name))
            .map(Some)
            .ok_or_else(|| Error::Config(format!("column '{name}' configured for {field} is not in the file")));
    }
    let aliases = ALIASES.iter().find(|(f, _)| *f == field).map(|(_, a)| *a).unwrap_or(&[]);
    Ok(aliases.iter().find_map(|a| norm.iter().position(|h| h == a)))
}

fn builtin_alias(field: &str, label: &str) -> Option<&'static str> {
    match (field, label) {
        ("country", "uk" | "gb" | "british" | "united_kingdom" | "england") => Some("UK"),
        ("country", "us" | "usa" | "american" | "united_states") => Some("US"),
        ("modifier", "bare" | "unmodified" | "na" | "null") => Some("none"),
        ("experiment", "dialog" | "speaker") => Some("dialogue"),
        _ => None,
    }
}

impl AdapterConfig {
    fn translate(&self, field: &str, raw: &str) -> String {
        let norm = normalize(raw);
        if let Some(map) = self.values.get(field) {
            if let Some(v) = map.iter().find(|(k, _)| normalize(k) == norm).map(|(_, v)| v) {
                return v.clone();
            }
        }
        builtin_alias(field, &norm).map(str::to_owned).unwrap_or_else(|| raw.trim().to_owned())
    }
}

/// Reads a raw export and converts it into trial records, collecting every
/// row problem before failing.
pub fn adapt(reader: impl Read, source: &str, config: &AdapterConfig) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let cols = &config.columns;
    let find_required = |field: &str, configured: &Option<String>| -> Result<usize> {
        locate(&header, field, configured)?
            .ok_or_else(|| Error::Config(format!("{source}: no column for {field} (header: {})", header.join(","))))
    };
    let pid = find_required(HEADER[0], &cols.participant_id)?;
    let country = find_required(HEADER[1], &cols.country)?;
    let predicate = find_required(HEADER[3], &cols.predicate)?;
    let modifier = find_required(HEADER[4], &cols.modifier)?;
    let response = find_required(HEADER[5], &cols.response)?;
    // a fixed experiment wins over an auto-detected column
    let experiment = match (&config.experiment, &cols.experiment) {
        (Some(_), None) => None,
        _ => locate(&header, HEADER[2], &cols.experiment)?,
    };
    let paired = locate(&header, PAIRED_COLUMN, &cols.paired_modifier)?;
    if experiment.is_none() && config.experiment.is_none() {
        return Err(Error::Config(format!("{source}: no experiment column and no fixed experiment configured")));
    }

    let mut trials = Vec::new();
    let mut problems = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("line {line}: {e}"));
                continue;
            }
        };
        let cell = |idx: usize| row.get(idx).unwrap_or("");
        let parsed = (|| -> Result<TrialRecord> {
            let experiment = match experiment {
                Some(idx) => config.translate("experiment", cell(idx)).parse()?,
                None => config.experiment.unwrap(),
            };
            let raw_response: f64 = cell(response)
                .parse()
                .map_err(|_| Error::Data(format!("response '{}' is not a number", cell(response))))?;
            let value = raw_response / config.response_scale;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Data(format!("response {raw_response} falls outside [0, 1] after scaling")));
            }
            let participant_id = cell(pid).to_owned();
            if participant_id.is_empty() {
                return Err(Error::Data("empty participant id".into()));
            }
            let paired_modifier = match paired.map(cell).filter(|s| !s.is_empty()) {
                Some(s) => Some(config.translate("modifier", s).parse::<Modifier>()?),
                None => None,
            };
            Ok(TrialRecord {
                participant_id,
                country: config.translate("country", cell(country)).parse::<Country>()?,
                experiment,
                predicate: config.translate("predicate", cell(predicate)).parse::<Predicate>()?,
                modifier: config.translate("modifier", cell(modifier)).parse::<Modifier>()?,
                response: value,
                response_z: None,
                paired_modifier: paired_modifier.filter(|m| m.is_modified()),
            })
        })();
        match parsed {
            Ok(t) => trials.push(t),
            Err(e) => problems.push(format!("line {line}: {e}")),
        }
    }
    if !problems.is_empty() {
        return Err(Error::Load { path: source.to_owned(), problems });
    }
    Ok(trials)
}
