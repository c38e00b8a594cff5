use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use xrsa::analysis::{default_truth, simulate_trials, synthetic_politeness};
use xrsa::data::{cell_means, load_trials, write_trials, zscore_by_participant, TrialRecord};
use xrsa::{Experiment, GridConfig, Modifier, PolitenessTable, Predicate, SemanticConstants};

const QUICK: [&str; 4] = ["--starts", "1", "--max-generations", "40"];

fn xrsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xrsa")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = xrsa(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// Dialogue trials simulated from the default generating model, with
/// politeness ratings for the same participants.
fn dataset(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let grid = GridConfig::default().build().unwrap();
    let truth = default_truth(SemanticConstants::default());
    let mut trials = simulate_trials(&truth, &synthetic_politeness(), &grid, n, seed, false).unwrap();
    let participants: Vec<_> = {
        let mut ids: Vec<_> = trials.iter().map(|t| (t.participant_id.clone(), t.country)).collect();
        ids.dedup();
        ids
    };
    for (k, (pid, country)) in participants.into_iter().enumerate() {
        for p in Predicate::ALL {
            for m in Modifier::ALL {
                let lean = p.valence().sign() * (m.index() as f64 - 2.5) * 0.06;
                let jitter = ((k * 31 + p.index() * 7 + m.index()) % 11) as f64 * 0.01;
                trials.push(TrialRecord {
                    participant_id: pid.clone(),
                    country,
                    experiment: Experiment::Politeness,
                    predicate: p,
                    modifier: m,
                    response: (0.5 + lean + jitter).clamp(0.0, 1.0),
                    response_z: None,
                    paired_modifier: None,
                });
            }
        }
    }
    let path = dir.join(format!("trials-{seed}.csv"));
    let mut buf = Vec::new();
    write_trials(&trials, &mut buf).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

fn fit(data: &Path, model: &str, out: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["fit", "--data", s(data), "--model", model, "--out", s(out)];
    args.extend(QUICK);
    args.extend(extra);
    ok(&args);
    read_json(&out.join("fit.json"))
}

#[test]
fn fit_writes_artifact_with_provenance() {
    let dir = TempDir::new().unwrap();
    let data = dataset(dir.path(), 840, 1);
    let out = dir.path().join("m1");
    let f = fit(&data, "M1", &out, &["--seed", "7"]);
    assert_eq!(f["result"]["fit"]["df"], 15);
    let prov = &f["provenance"];
    for key in ["tool_version", "config_hash", "data_hash"] {
        assert!(prov[key].as_str().is_some_and(|v| !v.is_empty()), "missing {key}");
    }
    assert_eq!(prov["seed"], 7);
    assert!(out.join("fit.txt").exists());
}

#[test]
fn rerun_with_same_seed_is_identical() {
    let dir = TempDir::new().unwrap();
    let data = dataset(dir.path(), 840, 2);
    let mut a = fit(&data, "M3", &dir.path().join("a"), &["--seed", "3"]);
    let mut b = fit(&data, "M3", &dir.path().join("b"), &["--seed", "3"]);
    a["provenance"]["created_unix"] = Value::Null;
    b["provenance"]["created_unix"] = Value::Null;
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let data = dataset(dir.path(), 840, 3);
    let out = xrsa(&["fit", "--data", s(&data), "--model", "M99", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown model"));

    let missing = dir.path().join("absent.csv");
    assert_eq!(xrsa(&["fit", "--data", s(&missing), "--model", "M1"]).status.code(), Some(2));
    assert_eq!(xrsa(&["fit", "--model", "M1"]).status.code(), Some(2));
    assert_eq!(xrsa(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn compare_sorts_dedups_and_checks_hash() {
    let dir = TempDir::new().unwrap();
    let data = dataset(dir.path(), 840, 4);
    let other = dataset(dir.path(), 840, 5);
    let m1 = dir.path().join("m1");
    let m5 = dir.path().join("m5");
    let foreign = dir.path().join("foreign");
    fit(&data, "M1", &m1, &[]);
    fit(&data, "M5", &m5, &[]);
    fit(&other, "M1", &foreign, &[]);
    let (f1, f5) = (m1.join("fit.json"), m5.join("fit.json"));

    let cmp = dir.path().join("cmp");
    let out = ok(&["compare", s(&f1), s(&f5), s(&f1), "--out", s(&cmp)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));
    let report = read_json(&cmp.join("comparison.json"));
    let rows = report["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let aics: Vec<f64> = rows.iter().map(|r| r["aic"].as_f64().unwrap()).collect();
    assert!(aics[0] <= aics[1]);
    assert!(cmp.join("comparison.txt").exists());

    let mixed = xrsa(&["compare", s(&f1), s(&foreign.join("fit.json")), "--out", s(&cmp)]);
    assert_eq!(mixed.status.code(), Some(2));
}

#[test]
fn predict_matches_cell_means() {
    let dir = TempDir::new().unwrap();
    let data = dataset(dir.path(), 840, 6);
    let m1 = dir.path().join("m1");
    fit(&data, "M1", &m1, &[]);
    let pred = dir.path().join("pred");
    ok(&["predict", "--fit", s(&m1.join("fit.json")), "--data", s(&data), "--svg", "--out", s(&pred)]);
    assert!(pred.join("posterior.csv").exists());
    assert!(fs::read_to_string(pred.join("predictions.svg")).unwrap().starts_with("<svg"));

    let trials = zscore_by_participant(load_trials(&data).unwrap()).trials;
    let means = cell_means(&trials, Experiment::Dialogue).unwrap();
    let table = fs::read_to_string(pred.join("predictions.csv")).unwrap();
    let mut rows = 0;
    for line in table.lines().skip(1) {
        let rec: Vec<&str> = line.split(',').collect();
        let key = (rec[0].parse().unwrap(), rec[1].parse().unwrap(), rec[2].parse().unwrap());
        let (mean, n) = means[&key];
        assert_eq!(rec[3].parse::<usize>().unwrap(), n);
        assert!((rec[4].parse::<f64>().unwrap() - mean).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 84);
}

#[test]
fn shared_model_and_politeness_give_symmetric_predictions() {
    let dir = TempDir::new().unwrap();
    let data = dataset(dir.path(), 840, 7);
    let table = dir.path().join("flat.json");
    fs::write(&table, serde_json::to_string(&PolitenessTable::constant(0.25)).unwrap()).unwrap();
    let m1 = dir.path().join("m1");
    fit(&data, "M1", &m1, &["--politeness", s(&table)]);
    let pred = dir.path().join("pred");
    ok(&["predict", "--fit", s(&m1.join("fit.json")), "--data", s(&data), "--out", s(&pred)]);
    let rows = read_json(&pred.join("predict.json"))["result"].as_array().unwrap().clone();
    let column = |c: &str| -> Vec<f64> {
        rows.iter().filter(|r| r["country"] == c).map(|r| r["predicted_mean_z"].as_f64().unwrap()).collect()
    };
    assert_eq!(column("UK"), column("US"));
}

#[test]
fn robustness_dispatches_drop_and_constrain() {
    let dir = TempDir::new().unwrap();
    let data = dataset(dir.path(), 840, 8);
    let m5 = dir.path().join("m5");
    fit(&data, "M5", &m5, &[]);
    let f = m5.join("fit.json");
    let rob = dir.path().join("rob");
    ok(&[
        "robustness", "--fit", s(&f), "--data", s(&data), "--drop", "extremely", "--constrain", "phi_s", "--starts", "1",
        "--out", s(&rob),
    ]);
    let reports = read_json(&rob.join("robustness.json"))["result"]["reports"].as_array().unwrap().clone();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r["delta"].as_f64().is_some()));
    assert!(rob.join("robustness.txt").exists());

    assert_eq!(xrsa(&["robustness", "--fit", s(&f), "--data", s(&data)]).status.code(), Some(2));
    let bad = xrsa(&["robustness", "--fit", s(&f), "--data", s(&data), "--constrain", "charisma"]);
    assert_eq!(bad.status.code(), Some(2));
    let other = dataset(dir.path(), 840, 9);
    let mismatch = xrsa(&["robustness", "--fit", s(&f), "--data", s(&other), "--constrain", "cost"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn recover_writes_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rec");
    let mut args = vec!["recover", "--spec", "M3", "--n", "420", "--seed", "3", "--out", s(&out)];
    args.extend(QUICK);
    ok(&args);
    let report = read_json(&out.join("recovery.json"));
    assert_eq!(report["provenance"]["seed"], 3);
    assert!(report["result"]["max_midpoint_error"].as_f64().is_some());
    assert!(out.join("recovery.txt").exists());
}

#[test]
fn ingest_adapts_raw_export() {
    let dir = TempDir::new().unwrap();
    let raw = dir.path().join("raw.csv");
    let mut text = String::from("workerid,nationality,adjective,intensifier,slider\n");
    for (pid, country) in [("p1", "British"), ("p2", "American")] {
        for (i, m) in ["bare", "slightly", "kind of", "quite", "very", "extremely"].iter().enumerate() {
            text.push_str(&format!("{pid},{country},helpful,{m},{}\n", 10 + 15 * i));
        }
    }
    fs::write(&raw, text).unwrap();
    let adapter = dir.path().join("adapter.json");
    fs::write(&adapter, r#"{"experiment": "dialogue", "response_scale": 100}"#).unwrap();
    let out = dir.path().join("ingested");
    ok(&["ingest", "--data", s(&raw), "--adapter", s(&adapter), "--out", s(&out)]);
    let trials = load_trials(out.join("trials.csv")).unwrap();
    assert_eq!(trials.len(), 12);
    assert!(trials.iter().all(|t| t.experiment == Experiment::Dialogue && t.response <= 0.85));
    assert!(out.join("ingest.json").exists());

    fs::write(&adapter, r#"{"response_scale": 0}"#).unwrap();
    assert_eq!(xrsa(&["ingest", "--data", s(&raw), "--adapter", s(&adapter)]).status.code(), Some(2));
}
