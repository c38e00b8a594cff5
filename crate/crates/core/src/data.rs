//! Trial loading, per-participant z-scoring, modifier-effect scores, and the
//! politeness table.
//!
//! The on-disk format is a UTF-8 CSV with the header
//! `participant_id,country,experiment,predicate,modifier,response`. An optional
//! seventh column `paired_modifier` may follow; on unmodified rows it names the
//! modified scenario the row is the baseline for, which lets one participant
//! contribute several unmodified ratings of the same predicate.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lexicon::{Country, Experiment, Modifier, Predicate, Utterance};
use crate::politeness::PolitenessTable;

pub const HEADER: [&str; 6] = ["participant_id", "country", "experiment", "predicate", "modifier", "response"];
pub const PAIRED_COLUMN: &str = "paired_modifier";

/// One behavioral observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub participant_id: String,
    pub country: Country,
    pub experiment: Experiment,
    pub predicate: Predicate,
    pub modifier: Modifier,
    /// Slider position in [0, 1].
    pub response: f64,
    /// Filled by [`zscore_by_participant`].
    pub response_z: Option<f64>,
    /// For unmodified rows: the modified scenario this row is the baseline of.
    pub paired_modifier: Option<Modifier>,
}

impl TrialRecord {
    pub fn utterance(&self) -> Utterance {
        Utterance::new(self.predicate, self.modifier)
    }

    fn key(&self) -> (Experiment, &str, Predicate, Modifier, Option<Modifier>) {
        (self.experiment, self.participant_id.as_str(), self.predicate, self.modifier, self.paired_modifier)
    }
}

pub fn load_trials(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_trials(file, &path.display().to_string())
}

/// Parses trials from any reader; `source` names the input in error messages.
pub fn read_trials(reader: impl Read, source: &str) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let with_pairing = if header == HEADER {
        false
    } else if header.len() == 7 && header[..6] == HEADER && header[6] == PAIRED_COLUMN {
        true
    } else {
        return Err(Error::Load {
            path: source.to_owned(),
            problems: vec![format!("line 1: expected header '{}', got '{}'", HEADER.join(","), header.join(","))],
        });
    };

    let mut trials = Vec::new();
    let mut problems = Vec::new();
    let mut seen: HashMap<(Experiment, String, Predicate, Modifier, Option<Modifier>), usize> = HashMap::new();
    for (idx, row) in rdr.records().enumerate() {
        let line = idx + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("line {line}: {e}"));
                continue;
            }
        };
        match parse_row(&row, with_pairing) {
            Ok(trial) => {
                let key = (
                    trial.experiment,
                    trial.participant_id.clone(),
                    trial.predicate,
                    trial.modifier,
                    trial.paired_modifier,
                );
                if let Some(first) = seen.insert(key, line) {
                    problems.push(format!(
                        "line {line}: duplicate ({}, {}, {}, {}) first seen on line {first}",
                        trial.participant_id, trial.experiment, trial.predicate, trial.modifier
                    ));
                } else {
                    trials.push(trial);
                }
            }
            Err(msg) => problems.push(format!("line {line}: {msg}")),
        }
    }
    if !problems.is_empty() {
        return Err(Error::Load { path: source.to_owned(), problems });
    }
    Ok(trials)
}

fn parse_row(row: &csv::StringRecord, with_pairing: bool) -> std::result::Result<TrialRecord, String> {
    let expected = if with_pairing { 7 } else { 6 };
    if row.len() != expected {
        return Err(format!("expected {expected} fields, got {}", row.len()));
    }
    let participant_id = row[0].to_owned();
    if participant_id.is_empty() {
        return Err("empty participant_id".into());
    }
    let country: Country = row[1].parse().map_err(|e: Error| e.to_string())?;
    let experiment: Experiment = row[2].parse().map_err(|e: Error| e.to_string())?;
    let predicate: Predicate = row[3].parse().map_err(|e: Error| e.to_string())?;
    let modifier: Modifier = if row[4].is_empty() {
        return Err("empty modifier (use 'none')".into());
    } else {
        row[4].parse().map_err(|e: Error| e.to_string())?
    };
    let response: f64 = row[5].parse().map_err(|_| format!("response '{}' is not a number", &row[5]))?;
    if !(0.0..=1.0).contains(&response) {
        return Err(format!("response {response} outside [0, 1]"));
    }
    let paired_modifier = if with_pairing && !row[6].is_empty() {
        let m: Modifier = row[6].parse().map_err(|e: Error| e.to_string())?;
        if modifier.is_modified() || !m.is_modified() {
            return Err("paired_modifier only applies to unmodified rows and must name an overt modifier".into());
        }
        Some(m)
    } else {
        None
    };
    Ok(TrialRecord { participant_id, country, experiment, predicate, modifier, response, response_z: None, paired_modifier })
}

/// Writes trials in the canonical schema (the pairing column is emitted only
/// when some row uses it).
pub fn write_trials(trials: &[TrialRecord], writer: impl std::io::Write) -> Result<()> {
    let paired = trials.iter().any(|t| t.paired_modifier.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = HEADER.to_vec();
    if paired {
        header.push(PAIRED_COLUMN);
    }
    w.write_record(&header)?;
    for t in trials {
        let mut rec = vec![
            t.participant_id.clone(),
            t.country.to_string(),
            t.experiment.to_string(),
            t.predicate.to_string(),
            t.modifier.to_string(),
            format!("{}", t.response),
        ];
        if paired {
            rec.push(t.paired_modifier.map(|m| m.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Content digest of the dataset, independent of row order and formatting.
pub fn data_hash(trials: &[TrialRecord]) -> String {
    let mut sorted: Vec<&TrialRecord> = trials.iter().collect();
    sorted.sort_by(|a, b| a.key().cmp(&b.key()));
    let mut hasher = Sha256::new();
    for t in sorted {
        let line = format!(
            "{},{},{},{},{},{:?},{}\n",
            t.participant_id,
            t.country,
            t.experiment,
            t.predicate,
            t.modifier,
            t.response,
            t.paired_modifier.map(|m| m.as_str()).unwrap_or("")
        );
        hasher.update(line.as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// Result of z-scoring: the retained trials and the excluded participants.
#[derive(Debug, Clone)]
pub struct ZScored {
    pub trials: Vec<TrialRecord>,
    /// `(experiment, participant_id)` of constant responders.
    pub excluded: Vec<(Experiment, String)>,
}

/// Z-scores responses within each participant of each experiment using the
/// sample (n - 1) standard deviation. Participants without response variance
/// are dropped with a warning.
pub fn zscore_by_participant(trials: Vec<TrialRecord>) -> ZScored {
    let mut groups: BTreeMap<(Experiment, String), Vec<usize>> = BTreeMap::new();
    for (i, t) in trials.iter().enumerate() {
        groups.entry((t.experiment, t.participant_id.clone())).or_default().push(i);
    }
    let mut z = vec![None; trials.len()];
    let mut excluded = Vec::new();
    for (key, idx) in groups {
        let n = idx.len() as f64;
        let mean = idx.iter().map(|&i| trials[i].response).sum::<f64>() / n;
        let var = if idx.len() > 1 {
            idx.iter().map(|&i| (trials[i].response - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let sd = var.sqrt();
        // spread below float noise of the mean counts as constant
        if !(sd > 1e-12 * mean.abs().max(1.0)) {
            log::warn!("excluding participant {} ({}): no response variance", key.1, key.0);
            excluded.push(key);
            continue;
        }
        for &i in &idx {
            z[i] = Some((trials[i].response - mean) / sd);
        }
    }
    let trials = trials
        .into_iter()
        .zip(z)
        .filter_map(|(mut t, z)| {
            t.response_z = Some(z?);
            Some(t)
        })
        .collect();
    ZScored { trials, excluded }
}

/// Modifier effect for one participant and scenario: z(modified) - z(unmodified).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectScore {
    pub participant_id: String,
    pub country: Country,
    pub experiment: Experiment,
    pub predicate: Predicate,
    pub modifier: Modifier,
    pub effect: f64,
}

/// Difference scores for every modified trial whose baseline is present.
///
/// The baseline is the unmodified row paired with the same modifier when the
/// data carries pairings, otherwise the participant's single unpaired
/// unmodified row for that predicate. Trials must already be z-scored.
pub fn effect_scores(trials: &[TrialRecord]) -> Result<Vec<EffectScore>> {
    let mut baselines: HashMap<(Experiment, &str, Predicate, Option<Modifier>), f64> = HashMap::new();
    for t in trials.iter().filter(|t| !t.modifier.is_modified()) {
        let z = require_z(t)?;
        baselines.insert((t.experiment, t.participant_id.as_str(), t.predicate, t.paired_modifier), z);
    }
    let mut out = Vec::new();
    for t in trials.iter().filter(|t| t.modifier.is_modified()) {
        let z = require_z(t)?;
        let base = baselines
            .get(&(t.experiment, t.participant_id.as_str(), t.predicate, Some(t.modifier)))
            .or_else(|| baselines.get(&(t.experiment, t.participant_id.as_str(), t.predicate, None)));
        match base {
            Some(b) => out.push(EffectScore {
                participant_id: t.participant_id.clone(),
                country: t.country,
                experiment: t.experiment,
                predicate: t.predicate,
                modifier: t.modifier,
                effect: z - b,
            }),
            None => log::warn!(
                "no unmodified baseline for participant {} ({}, {} {}); skipping",
                t.participant_id,
                t.experiment,
                t.modifier,
                t.predicate
            ),
        }
    }
    Ok(out)
}

fn require_z(t: &TrialRecord) -> Result<f64> {
    t.response_z.ok_or_else(|| {
        Error::Data(format!("trial of participant {} has not been z-scored", t.participant_id))
    })
}

/// Mean z-scored rating and count per (country, predicate, modifier) for one
/// experiment.
pub fn cell_means(trials: &[TrialRecord], experiment: Experiment) -> Result<BTreeMap<(Country, Predicate, Modifier), (f64, usize)>> {
    let mut sums: BTreeMap<(Country, Predicate, Modifier), (f64, usize)> = BTreeMap::new();
    for t in trials.iter().filter(|t| t.experiment == experiment) {
        let z = require_z(t)?;
        let e = sums.entry((t.country, t.predicate, t.modifier)).or_insert((0.0, 0));
        e.0 += z;
        e.1 += 1;
    }
    Ok(sums.into_iter().map(|(k, (s, n))| (k, (s / n as f64, n))).collect())
}

/// Averages z-scored politeness ratings into the social-utility table.
pub fn build_politeness_table(trials: &[TrialRecord]) -> Result<PolitenessTable> {
    let means = cell_means(trials, Experiment::Politeness)?;
    let mut table = PolitenessTable::empty();
    for ((c, p, m), (mean, _)) in &means {
        table.set(*c, Utterance::new(*p, *m), *mean);
    }
    let missing = table.missing();
    if !missing.is_empty() {
        let names: Vec<String> = missing.iter().map(|(c, p, m)| format!("({c}, {p}, {m})")).collect();
        return Err(Error::Data(format!("politeness table has {} empty cell(s): {}", names.len(), names.join(", "))));
    }
    Ok(table)
}

/// `value` with its sign flipped for negative-valence predicates.
pub fn flip_for_valence(predicate: Predicate, value: f64) -> f64 {
    predicate.valence().sign() * value
}

/// Sign-flips values by predicate valence; applying it twice is the identity.
pub trait ValenceFlip {
    fn valence_flip(&self) -> Self;
}

impl ValenceFlip for PolitenessTable {
    fn valence_flip(&self) -> Self {
        self.map(|_, u, v| flip_for_valence(u.predicate, v))
    }
}

impl ValenceFlip for Vec<EffectScore> {
    fn valence_flip(&self) -> Self {
        self.iter()
            .map(|e| EffectScore { effect: flip_for_valence(e.predicate, e.effect), ..e.clone() })
            .collect()
    }
}

/// Keeps the trials of the given experiments.
pub fn select(trials: &[TrialRecord], experiments: &[Experiment]) -> Vec<TrialRecord> {
    trials.iter().filter(|t| experiments.contains(&t.experiment)).cloned().collect()
}

/// Summary counts, useful for ingest reports.
#[derive(Debug, Clone, Serialize)]
pub struct DataSummary {
    pub n_trials: usize,
    pub per_experiment: BTreeMap<String, usize>,
    pub participants: BTreeMap<String, usize>,
}

pub fn summarize(trials: &[TrialRecord]) -> DataSummary {
    let mut per_experiment = BTreeMap::new();
    let mut people: BTreeMap<String, BTreeSet<(Country, &str)>> = BTreeMap::new();
    for t in trials {
        *per_experiment.entry(t.experiment.to_string()).or_insert(0) += 1;
        people.entry(t.experiment.to_string()).or_default().insert((t.country, &t.participant_id));
    }
    DataSummary {
        n_trials: trials.len(),
        per_experiment,
        participants: people.into_iter().map(|(k, v)| (k, v.len())).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "participant_id,country,experiment,predicate,modifier,response\n";

    fn parse(body: &str) -> Result<Vec<TrialRecord>> {
        read_trials(format!("{HEAD}{body}").as_bytes(), "test.csv")
    }

    fn trial(pid: &str, country: Country, exp: Experiment, pred: Predicate, m: Modifier, r: f64) -> TrialRecord {
        TrialRecord {
            participant_id: pid.into(),
            country,
            experiment: exp,
            predicate: pred,
            modifier: m,
            response: r,
            response_z: None,
            paired_modifier: None,
        }
    }

    #[test]
    fn loads_well_formed_rows() {
        let trials = parse(
            "p1,UK,dialogue,helpful,very,0.8\np1,UK,dialogue,helpful,none,0.6\np2,US,narrator,boring,kind_of,0.25\n",
        )
        .unwrap();
        assert_eq!(trials.len(), 3);
        assert_eq!(trials[2].modifier, Modifier::KindOf);
        assert_eq!(trials[2].country, Country::US);
    }

    #[test]
    fn range_violation_names_line() {
        let err = parse("p1,UK,dialogue,helpful,very,0.8\np1,UK,dialogue,helpful,none,1.2\n").unwrap_err();
        match err {
            Error::Load { problems, .. } => {
                assert_eq!(problems.len(), 1);
                assert!(problems[0].starts_with("line 3"), "{problems:?}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_unknown_values_rejected() {
        let err = parse("p1,UK,dialogue,helpful,very,0.8\np1,UK,dialogue,helpful,very,0.3\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err = parse("p1,UK,dialogue,helpful,totally,0.8\np1,FR,dialogue,nice,none,0.3\n").unwrap_err();
        match err {
            Error::Load { problems, .. } => assert_eq!(problems.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_header_rejected() {
        let err = read_trials("pid,country\np1,UK\n".as_bytes(), "x").unwrap_err();
        assert!(err.to_string().contains("expected header"));
    }

    #[test]
    fn paired_baselines() {
        let csv = "participant_id,country,experiment,predicate,modifier,response,paired_modifier\n\
                   p1,UK,dialogue,helpful,very,0.9,\n\
                   p1,UK,dialogue,helpful,none,0.5,very\n\
                   p1,UK,dialogue,helpful,slightly,0.2,\n\
                   p1,UK,dialogue,helpful,none,0.6,slightly\n";
        let trials = read_trials(csv.as_bytes(), "x").unwrap();
        assert_eq!(trials.len(), 4);
        let z = zscore_by_participant(trials).trials;
        let eff = effect_scores(&z).unwrap();
        assert_eq!(eff.len(), 2);
        let sd = {
            let r = [0.9, 0.5, 0.2, 0.6];
            let m = r.iter().sum::<f64>() / 4.0;
            (r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 3.0).sqrt()
        };
        assert!((eff[0].effect - 0.4 / sd).abs() < 1e-12);
        assert!((eff[1].effect + 0.4 / sd).abs() < 1e-12);
        // pairing on a modified row is invalid
        let bad = "participant_id,country,experiment,predicate,modifier,response,paired_modifier\n\
                   p1,UK,dialogue,helpful,very,0.9,very\n";
        assert!(read_trials(bad.as_bytes(), "x").is_err());
    }

    #[test]
    fn two_point_zscore() {
        let t = vec![
            trial("a", Country::UK, Experiment::Dialogue, Predicate::Helpful, Modifier::None, 0.2),
            trial("a", Country::UK, Experiment::Dialogue, Predicate::Helpful, Modifier::Very, 0.8),
        ];
        let z = zscore_by_participant(t).trials;
        // (x - mean) / sd with sd = 0.6 / sqrt(2)
        assert!((z[0].response_z.unwrap() + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((z[1].response_z.unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn constant_responder_excluded() {
        let mut t = vec![
            trial("a", Country::UK, Experiment::Dialogue, Predicate::Helpful, Modifier::None, 0.5),
            trial("a", Country::UK, Experiment::Dialogue, Predicate::Helpful, Modifier::Very, 0.5),
        ];
        t.push(trial("b", Country::US, Experiment::Dialogue, Predicate::Helpful, Modifier::None, 0.1));
        t.push(trial("b", Country::US, Experiment::Dialogue, Predicate::Helpful, Modifier::Very, 0.7));
        let out = zscore_by_participant(t);
        assert_eq!(out.excluded, vec![(Experiment::Dialogue, "a".to_string())]);
        assert_eq!(out.trials.len(), 2);
        assert!(out.trials.iter().all(|t| t.participant_id == "b"));
    }

    #[test]
    fn identical_participants_share_profiles() {
        let mut t = Vec::new();
        for pid in ["a", "b"] {
            for (m, r) in [(Modifier::None, 0.3), (Modifier::Very, 0.9), (Modifier::Slightly, 0.1)] {
                t.push(trial(pid, Country::UK, Experiment::Dialogue, Predicate::Boring, m, r));
            }
        }
        let z = zscore_by_participant(t).trials;
        for i in 0..3 {
            assert_eq!(z[i].response_z, z[i + 3].response_z);
        }
    }

    fn with_z(mut t: TrialRecord, z: f64) -> TrialRecord {
        t.response_z = Some(z);
        t
    }

    #[test]
    fn effect_arithmetic() {
        let t = vec![
            with_z(trial("a", Country::UK, Experiment::Dialogue, Predicate::Helpful, Modifier::Very, 0.0), 0.5),
            with_z(trial("a", Country::UK, Experiment::Dialogue, Predicate::Helpful, Modifier::None, 0.0), 0.1),
            with_z(trial("a", Country::UK, Experiment::Dialogue, Predicate::Boring, Modifier::Quite, 0.0), -0.3),
            with_z(trial("a", Country::UK, Experiment::Dialogue, Predicate::Boring, Modifier::None, 0.0), -0.3),
            // no baseline for difficult: skipped
            with_z(trial("a", Country::UK, Experiment::Dialogue, Predicate::Difficult, Modifier::Quite, 0.0), 1.0),
        ];
        let e = effect_scores(&t).unwrap();
        assert_eq!(e.len(), 2);
        assert!((e[0].effect - 0.4).abs() < 1e-12);
        assert_eq!(e[1].effect, 0.0);
    }

    #[test]
    fn politeness_table_requires_every_cell() {
        let t = vec![with_z(
            trial("a", Country::UK, Experiment::Politeness, Predicate::Helpful, Modifier::Very, 0.0),
            0.2,
        )];
        let err = build_politeness_table(&t).unwrap_err();
        assert!(err.to_string().contains("83 empty cell"));
        assert!(err.to_string().contains("(US, helpful, very)"));
    }

    #[test]
    fn politeness_cell_is_mean() {
        let mut t = Vec::new();
        for (pid, z) in [("a", 0.2), ("b", 0.4)] {
            for c in Country::ALL {
                for p in Predicate::ALL {
                    for m in Modifier::ALL {
                        let v = if p == Predicate::Helpful && m == Modifier::Very { z } else { 0.0 };
                        t.push(with_z(trial(pid, c, Experiment::Politeness, p, m, 0.5), v));
                    }
                }
            }
        }
        let table = build_politeness_table(&t).unwrap();
        let u = Utterance::new(Predicate::Helpful, Modifier::Very);
        assert!((table.get(Country::UK, u).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(table.get(Country::UK, u).unwrap(), table.get(Country::US, u).unwrap());
    }

    #[test]
    fn valence_flip_signs() {
        assert_eq!(flip_for_valence(Predicate::Helpful, 0.3), 0.3);
        assert_eq!(flip_for_valence(Predicate::Boring, 0.3), -0.3);
        let table = PolitenessTable::constant(0.3);
        let flipped = table.valence_flip();
        assert_eq!(flipped.get(Country::UK, Utterance::bare(Predicate::Boring)).unwrap(), -0.3);
        assert_eq!(flipped.valence_flip(), table);
    }

    #[test]
    fn hash_ignores_row_order() {
        let a = trial("a", Country::UK, Experiment::Dialogue, Predicate::Helpful, Modifier::Very, 0.1);
        let b = trial("b", Country::US, Experiment::Dialogue, Predicate::Helpful, Modifier::Very, 0.7);
        assert_eq!(data_hash(&[a.clone(), b.clone()]), data_hash(&[b.clone(), a.clone()]));
        let mut c = b.clone();
        c.response = 0.71;
        assert_ne!(data_hash(&[a.clone(), b]), data_hash(&[a, c]));
    }

    #[test]
    fn write_then_read() {
        let trials = vec![
            trial("a", Country::UK, Experiment::Narrator, Predicate::Concerned, Modifier::KindOf, 0.125),
            trial("b", Country::US, Experiment::Politeness, Predicate::Helpful, Modifier::None, 1.0),
        ];
        let mut buf = Vec::new();
        write_trials(&trials, &mut buf).unwrap();
        assert_eq!(read_trials(buf.as_slice(), "x").unwrap(), trials);
    }
}
