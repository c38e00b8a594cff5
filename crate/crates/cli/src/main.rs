//! `xrsa`: ingest trial data, fit and compare culture-sharing RSA models,
//! predict cell means, and run robustness and recovery analyses.
//!
//! Exit codes: 0 success, 1 runtime or optimization failure, 2 usage or
//! configuration error.

mod output;
mod svg;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use xrsa::adapter::{adapt, AdapterConfig};
use xrsa::analysis::{
    constrain_and_score, default_truth, drop_item_refit, narrator_comparison, parameter_recovery, simulate_trials,
    synthetic_politeness, ConstrainMode, DropItem, NarratorComparison, NarratorMode, RecoveryOptions, RecoveryReport,
    RobustnessReport,
};
use xrsa::data::{build_politeness_table, cell_means, data_hash, load_trials, select, summarize, write_trials, zscore_by_participant, DataSummary, TrialRecord};
use xrsa::fitting::{compare_models, fit_model, CmaConfig, ComparisonReport, FitConfig, FitResult};
use xrsa::model::{embed, pack, SemanticConstants};
use xrsa::rsa::{pragmatic_listener, SpeakerContext};
use xrsa::{Country, Error, Experiment, GridConfig, Modifier, ModelSpec, PolitenessTable, Predicate, Result, Utterance};

use output::{out_path, read_envelope, write_file, Envelope};

#[derive(Parser)]
#[command(name = "xrsa", version, about = "Cross-cultural RSA models of intensifier interpretation")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a trial file (or convert a raw export) and write the schema CSV.
    Ingest(IngestArgs),
    /// Fit one model spec (or all nine built-ins) by maximum likelihood.
    Fit(FitCmd),
    /// Build an AIC/BIC comparison table from fit files.
    Compare(CompareArgs),
    /// Predicted versus empirical mean z-response per cell, plus posteriors.
    Predict(PredictArgs),
    /// Drop items, constrain parameters, or compare with narrator data.
    Robustness(RobustnessArgs),
    /// Fit a spec to synthetic data and report parameter recovery.
    Recover(RecoverArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Number of points on the latent-state grid.
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
    /// Half-width of the grid, in z-units.
    #[arg(long, default_value_t = 4.0)]
    grid_range: f64,
    /// Softness of the threshold sigmoids.
    #[arg(long, default_value_t = xrsa::semantics::DEFAULT_TAU)]
    tau: f64,
    /// Floor on the denotation.
    #[arg(long, default_value_t = xrsa::semantics::DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args, Clone)]
struct OptimArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent CMA-ES starts per fit.
    #[arg(long, default_value_t = 5)]
    starts: usize,
    #[arg(long, default_value_t = 3000)]
    max_generations: usize,
    #[arg(long, default_value_t = 0.5)]
    sigma0: f64,
}

impl OptimArgs {
    fn fit_config(&self, model: &ModelArgs) -> FitConfig {
        FitConfig {
            cma: CmaConfig {
                seed: self.seed,
                max_generations: self.max_generations,
                sigma0: self.sigma0,
                ..CmaConfig::default()
            },
            starts: self.starts,
            extra_starts: Vec::new(),
            constants: SemanticConstants { tau: model.tau, epsilon: model.epsilon },
            grid: GridConfig { n_points: model.grid_points, range: model.grid_range },
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    /// Trial CSV in the schema, or a raw export when --adapter is given.
    #[arg(long)]
    data: PathBuf,
    /// JSON adapter description for raw exports.
    #[arg(long)]
    adapter: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct FitCmd {
    #[arg(long)]
    data: PathBuf,
    /// M1..M9, `all`, or a JSON spec file.
    #[arg(long)]
    model: String,
    /// Interpretation conditions to fit, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "dialogue")]
    experiments: Vec<Experiment>,
    /// Politeness source: a JSON table, a trial CSV, or `synthetic`.
    /// Defaults to the politeness trials in --data.
    #[arg(long)]
    politeness: Option<String>,
    /// Earlier fit files whose solutions seed this fit.
    #[arg(long)]
    start: Vec<PathBuf>,
    #[command(flatten)]
    model_args: ModelArgs,
    #[command(flatten)]
    optim: OptimArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more fit.json files.
    #[arg(required = true, num_args = 1..)]
    fits: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    fit: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Condition whose cell means are compared (narrator silences φ_s).
    #[arg(long, default_value = "dialogue")]
    experiment: Experiment,
    /// Also write a model-versus-data scatter plot.
    #[arg(long)]
    svg: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RobustnessArgs {
    #[arg(long)]
    fit: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Predicate or modifier to drop before refitting (repeatable).
    #[arg(long)]
    drop: Vec<String>,
    /// Parameter to force equal across cultures (repeatable).
    #[arg(long)]
    constrain: Vec<String>,
    /// midpoint, pooled, zero, or refit.
    #[arg(long, default_value = "midpoint")]
    mode: ConstrainMode,
    /// Fit the narrator condition and compare with the dialogue fit.
    #[arg(long)]
    narrator: bool,
    /// refit or reuse-thresholds.
    #[arg(long, default_value = "refit")]
    narrator_mode: NarratorMode,
    /// Overrides the fit's seed for refits.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the fit's start count for refits.
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RecoverArgs {
    /// M1..M9 or a JSON spec file.
    #[arg(long, visible_alias = "spec", default_value = "M9")]
    model: String,
    /// Number of synthetic trials.
    #[arg(long, default_value_t = 5000)]
    n: usize,
    /// JSON vector of generating parameters in the spec's layout.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Place responses at the listener's posterior mode instead of sampling.
    #[arg(long)]
    mode_only: bool,
    /// Offer the generating vector to the fitter as an extra start.
    #[arg(long)]
    start_at_truth: bool,
    #[command(flatten)]
    model_args: ModelArgs,
    #[command(flatten)]
    optim: OptimArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Configuration recorded with (and hashed into) every fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct FitRunConfig {
    spec: ModelSpec,
    experiments: Vec<Experiment>,
    politeness: String,
    fit: FitConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FitOutput {
    fit: FitResult,
    politeness: PolitenessTable,
}

type FitFile = Envelope<FitRunConfig, FitOutput>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("RSA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("RSA_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size thread pool: {e}")))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Robustness(a) => cmd_robustness(a),
        Command::Recover(a) => cmd_recover(a),
    }
}

fn existing(path: &Path) -> Result<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::Usage(format!("{} does not exist or is not a file", path.display())))
    }
}

fn resolve_spec(name: &str) -> Result<ModelSpec> {
    let path = Path::new(name);
    if name.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(existing(path)?)?;
        ModelSpec::from_json(&text)
    } else {
        ModelSpec::builtin(name)
    }
}

/// Z-scored trials with the hash of the file contents they came from.
struct Dataset {
    trials: Vec<TrialRecord>,
    hash: String,
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let raw = load_trials(existing(path)?)?;
    let hash = data_hash(&raw);
    let z = zscore_by_participant(raw);
    if !z.excluded.is_empty() {
        log::warn!("{} participant(s) excluded for constant responses", z.excluded.len());
    }
    Ok(Dataset { trials: z.trials, hash })
}

fn resolve_politeness(source: Option<&str>, data: &Dataset) -> Result<(PolitenessTable, String)> {
    match source {
        None => Ok((build_politeness_table(&data.trials)?, "data".to_string())),
        Some("synthetic") => Ok((synthetic_politeness(), "synthetic".to_string())),
        Some(p) if p.ends_with(".json") => {
            let text = std::fs::read_to_string(existing(Path::new(p))?)?;
            let table: PolitenessTable = serde_json::from_str(&text)?;
            if !table.is_complete() {
                return Err(Error::Data(format!("politeness table {p} has {} empty cell(s)", table.missing().len())));
            }
            Ok((table, format!("table:{p}")))
        }
        Some(p) => {
            let other = load_dataset(Path::new(p))?;
            Ok((build_politeness_table(&other.trials)?, format!("trials:{}", other.hash)))
        }
    }
}

fn cmd_ingest(a: IngestArgs) -> Result<()> {
    let path = existing(&a.data)?;
    let (trials, adapter) = match &a.adapter {
        Some(cfg_path) => {
            let cfg = AdapterConfig::from_json(&std::fs::read_to_string(existing(cfg_path)?)?)?;
            let file = std::fs::File::open(path)?;
            (adapt(file, &path.display().to_string(), &cfg)?, Some(cfg))
        }
        None => (load_trials(path)?, None),
    };
    let hash = data_hash(&trials);
    let mut csv = Vec::new();
    write_trials(&trials, &mut csv)?;
    write_file(&out_path(&a.out, "trials.csv"), &String::from_utf8(csv).expect("csv output is UTF-8"))?;

    #[derive(Serialize)]
    struct IngestReport {
        summary: DataSummary,
        excluded_participants: Vec<String>,
        politeness_missing_cells: Vec<String>,
    }
    let z = zscore_by_participant(trials.clone());
    let mut table = PolitenessTable::empty();
    for ((c, p, m), (mean, _)) in cell_means(&z.trials, Experiment::Politeness)? {
        table.set(c, Utterance::new(p, m), mean);
    }
    let report = IngestReport {
        summary: summarize(&trials),
        excluded_participants: z.excluded.iter().map(|(e, p)| format!("{e}:{p}")).collect(),
        politeness_missing_cells: table.missing().iter().map(|(c, p, m)| format!("{c}:{p}:{m}")).collect(),
    };
    println!("{} trials, data hash {}", report.summary.n_trials, hash);
    for (exp, n) in &report.summary.per_experiment {
        println!("  {exp}: {n}");
    }
    if !report.excluded_participants.is_empty() {
        println!("  excluded (no variance): {}", report.excluded_participants.join(", "));
    }
    if !report.politeness_missing_cells.is_empty() {
        println!("  politeness table incomplete: {} empty cell(s)", report.politeness_missing_cells.len());
    }
    Envelope::new("ingest", hash, 0, adapter, report)?.write(&out_path(&a.out, "ingest.json"))
}

fn fit_summary(fit: &FitResult) -> String {
    let mut s = format!(
        "model {} (varied: {})\ndf {}  n {}  log loss {:.3}  AIC {:.2}  BIC {:.2}\n",
        fit.spec.name,
        if fit.spec.varied.is_empty() {
            "none".to_string()
        } else {
            fit.spec.varied.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
        },
        fit.df,
        fit.n_trials,
        fit.nll,
        fit.aic,
        fit.bic
    );
    for (c, v) in &fit.nll_by_country {
        s.push_str(&format!("  {c} log loss {v:.3}\n"));
    }
    for st in &fit.starts {
        s.push_str(&format!(
            "  start {}{}: nll {:.3}, {} generations, {:?}\n",
            st.stream,
            if st.supplied { " (supplied)" } else { "" },
            st.nll,
            st.generations,
            st.termination
        ));
    }
    for c in Country::ALL {
        let m = fit.params.get(c);
        s.push_str(&format!(
            "  {c}: phi_i {:.3}  phi_s {:.3}  cost {:.3}\n",
            m.pragmatics.phi_i, m.pragmatics.phi_s, m.pragmatics.cost
        ));
        for md in Modifier::ALL {
            let iv = m.semantics.interval(md);
            s.push_str(&format!("    {:<10} [{:+.3}, {:+.3}]\n", md.to_string(), iv.lo, iv.hi));
        }
    }
    s
}

fn cmd_fit(a: FitCmd) -> Result<()> {
    let specs = if a.model.eq_ignore_ascii_case("all") {
        xrsa::builtin_specs()
    } else {
        vec![resolve_spec(&a.model)?]
    };
    if let Some(e) = a.experiments.iter().find(|e| !e.is_interpretation()) {
        return Err(Error::Usage(format!("{e} trials cannot be fitted; choose dialogue and/or narrator")));
    }
    let data = load_dataset(&a.data)?;
    let (politeness, pol_source) = resolve_politeness(a.politeness.as_deref(), &data)?;
    let trials = select(&data.trials, &a.experiments);
    let base_cfg = a.optim.fit_config(&a.model_args);
    base_cfg.grid.build()?;

    let mut seeds: Vec<FitResult> = Vec::new();
    for path in &a.start {
        let f: FitFile = read_envelope(existing(path)?)?;
        seeds.push(f.result.fit);
    }
    let many = specs.len() > 1;
    let mut files = Vec::new();
    for spec in &specs {
        let mut cfg = base_cfg.clone();
        for s in &seeds {
            if s.spec.is_nested_in(spec) {
                cfg.extra_starts.push(embed(&s.vector, &s.spec, spec, cfg.constants)?);
            } else {
                log::warn!("start {} is not nested in {}; ignored", s.spec.name, spec.name);
            }
        }
        let fit = fit_model(&trials, &politeness, spec, &cfg)?;
        print!("{}", fit_summary(&fit));
        let dir = if many { a.out.join(&spec.name) } else { a.out.clone() };
        write_file(&out_path(&dir, "fit.txt"), &fit_summary(&fit))?;
        let run = FitRunConfig { spec: spec.clone(), experiments: a.experiments.clone(), politeness: pol_source.clone(), fit: cfg };
        let env = Envelope::new("fit", data.hash.clone(), a.optim.seed, run, FitOutput { fit: fit.clone(), politeness: politeness.clone() })?;
        let path = out_path(&dir, "fit.json");
        env.write(&path)?;
        files.push(path);
        if many {
            seeds.push(fit);
        }
    }
    if many {
        cmd_compare(CompareArgs { fits: files, out: a.out })?;
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let mut seen = BTreeSet::new();
    let mut fits: Vec<(PathBuf, FitFile)> = Vec::new();
    for path in &a.fits {
        let f: FitFile = read_envelope(existing(path)?)?;
        let key = (f.result.fit.spec.name.clone(), format!("{:?}", f.result.fit.vector), f.provenance.config_hash.clone());
        if !seen.insert(key) {
            log::warn!("{} duplicates an earlier fit of {}; skipped", path.display(), f.result.fit.spec.name);
            eprintln!("warning: {} is a duplicate fit and was skipped", path.display());
            continue;
        }
        fits.push((path.clone(), f));
    }
    let hash = fits.first().map(|(_, f)| f.provenance.data_hash.clone()).unwrap_or_default();
    if let Some((p, f)) = fits.iter().find(|(_, f)| f.provenance.data_hash != hash) {
        return Err(Error::Usage(format!(
            "{} was fitted to different data (hash {} vs {})",
            p.display(),
            f.provenance.data_hash,
            hash
        )));
    }
    let scores: Vec<_> = fits.iter().map(|(_, f)| f.result.fit.score()).collect();
    let report: ComparisonReport = compare_models(&scores)?;
    let text = report.to_text();
    print!("{text}");
    write_file(&out_path(&a.out, "comparison.txt"), &text)?;

    #[derive(Serialize)]
    struct CompareConfig {
        fits: Vec<String>,
    }
    let config = CompareConfig { fits: fits.iter().map(|(_, f)| f.provenance.config_hash.clone()).collect() };
    let seed = fits.first().map(|(_, f)| f.provenance.seed).unwrap_or(0);
    Envelope::new("compare", hash, seed, config, report)?.write(&out_path(&a.out, "comparison.json"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PredictionRow {
    country: Country,
    predicate: Predicate,
    modifier: Modifier,
    n: usize,
    empirical_mean_z: Option<f64>,
    predicted_mean_z: f64,
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let fit_file: FitFile = read_envelope(existing(&a.fit)?)?;
    if !a.experiment.is_interpretation() {
        return Err(Error::Usage("predictions are for dialogue or narrator trials".into()));
    }
    let data = load_dataset(&a.data)?;
    if data.hash != fit_file.provenance.data_hash {
        log::warn!("data differs from the data the model was fitted to");
    }
    let cfg = &fit_file.config.fit;
    let grid = cfg.grid.build()?;
    let fit = &fit_file.result.fit;
    let politeness = &fit_file.result.politeness;
    let means = cell_means(&data.trials, a.experiment)?;

    let mut rows = Vec::new();
    let mut posterior = String::from("country,predicate,modifier,state,probability\n");
    for c in Country::ALL {
        let model = fit.params.get(c);
        let prag = if a.experiment == Experiment::Narrator { model.pragmatics.without_social() } else { model.pragmatics };
        let ctx = SpeakerContext { grid: &grid, semantics: &model.semantics, pragmatics: &prag, politeness, country: c };
        for p in Predicate::ALL {
            let alts = Utterance::bare(p).alternatives();
            for u in &alts {
                let l1 = pragmatic_listener(u, &alts, &ctx)?;
                for (s, q) in grid.points().iter().zip(&l1) {
                    posterior.push_str(&format!("{c},{p},{},{s},{q:e}\n", u.modifier));
                }
                let emp = means.get(&(c, p, u.modifier));
                rows.push(PredictionRow {
                    country: c,
                    predicate: p,
                    modifier: u.modifier,
                    n: emp.map(|e| e.1).unwrap_or(0),
                    empirical_mean_z: emp.map(|e| e.0),
                    predicted_mean_z: grid.expectation(&l1),
                });
            }
        }
    }
    let mut table = String::from("country,predicate,modifier,n,empirical_mean_z,predicted_mean_z\n");
    for r in &rows {
        let emp = r.empirical_mean_z.map(|v| v.to_string()).unwrap_or_default();
        table.push_str(&format!("{},{},{},{},{emp},{}\n", r.country, r.predicate, r.modifier, r.n, r.predicted_mean_z));
    }
    write_file(&out_path(&a.out, "predictions.csv"), &table)?;
    write_file(&out_path(&a.out, "posterior.csv"), &posterior)?;
    if a.svg {
        let points: Vec<svg::Point> = rows
            .iter()
            .filter_map(|r| r.empirical_mean_z.map(|e| (e, r.predicted_mean_z, r.country == Country::US)))
            .collect();
        let title = format!("{} on {} trials", fit.spec.name, a.experiment);
        write_file(&out_path(&a.out, "predictions.svg"), &svg::scatter(&points, &title))?;
    }
    let fitted = rows.iter().filter(|r| r.empirical_mean_z.is_some()).count();
    println!("{} cells predicted, {} with data", rows.len(), fitted);

    #[derive(Serialize)]
    struct PredictConfig {
        fit_config_hash: String,
        experiment: Experiment,
    }
    let config = PredictConfig { fit_config_hash: fit_file.provenance.config_hash.clone(), experiment: a.experiment };
    Envelope::new("predict", data.hash, fit_file.provenance.seed, config, rows)?.write(&out_path(&a.out, "predict.json"))
}

#[derive(Debug, Serialize)]
struct RobustnessOutput {
    reports: Vec<RobustnessReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    drop_refits: Vec<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    narrator: Option<NarratorComparison>,
}

fn cmd_robustness(a: RobustnessArgs) -> Result<()> {
    if a.drop.is_empty() && a.constrain.is_empty() && !a.narrator {
        return Err(Error::Usage("nothing to do: pass --drop, --constrain, or --narrator".into()));
    }
    let drops: Vec<DropItem> = a.drop.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    for p in &a.constrain {
        p.parse::<xrsa::ParamName>()?;
    }
    let fit_file: FitFile = read_envelope(existing(&a.fit)?)?;
    let data = load_dataset(&a.data)?;
    if data.hash != fit_file.provenance.data_hash {
        return Err(Error::Usage("data differs from the data the model was fitted to".into()));
    }
    let mut cfg = fit_file.config.fit.clone();
    cfg.extra_starts.clear();
    if let Some(seed) = a.seed {
        cfg.cma.seed = seed;
    }
    if let Some(starts) = a.starts {
        cfg.starts = starts;
    }
    let fit = &fit_file.result.fit;
    let politeness = &fit_file.result.politeness;
    let trials = select(&data.trials, &fit_file.config.experiments);

    let mut out = RobustnessOutput { reports: Vec::new(), drop_refits: Vec::new(), narrator: None };
    for item in drops {
        let d = drop_item_refit(&trials, politeness, item, &fit.spec, &cfg, Some(fit))?;
        out.reports.push(d.report);
        out.reports.push(d.reduced);
        out.drop_refits.push(d.refit);
    }
    for p in &a.constrain {
        out.reports.push(constrain_and_score(fit, &trials, politeness, p, a.mode, &cfg)?);
    }
    if a.narrator {
        let n = narrator_comparison(&data.trials, politeness, fit, a.narrator_mode, &cfg)?;
        out.reports.push(n.report.clone());
        out.narrator = Some(n);
    }
    let text: String = out.reports.iter().map(|r| r.to_text() + "\n").collect();
    print!("{text}");
    write_file(&out_path(&a.out, "robustness.txt"), &text)?;

    #[derive(Serialize)]
    struct RobustnessConfig {
        fit_config_hash: String,
        drop: Vec<String>,
        constrain: Vec<String>,
        mode: ConstrainMode,
        narrator: Option<NarratorMode>,
        fit: FitConfig,
    }
    let config = RobustnessConfig {
        fit_config_hash: fit_file.provenance.config_hash.clone(),
        drop: a.drop,
        constrain: a.constrain,
        mode: a.mode,
        narrator: a.narrator.then_some(a.narrator_mode),
        fit: cfg.clone(),
    };
    Envelope::new("robustness", data.hash, cfg.cma.seed, config, out)?.write(&out_path(&a.out, "robustness.json"))
}

fn cmd_recover(a: RecoverArgs) -> Result<()> {
    let spec = resolve_spec(&a.model)?;
    let cfg = a.optim.fit_config(&a.model_args);
    let grid = cfg.grid.build()?;
    let truth = match &a.truth {
        Some(p) => {
            let v: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(existing(p)?)?)?;
            v
        }
        None => pack(&default_truth(cfg.constants), &spec),
    };
    let options = RecoveryOptions { n_trials: a.n, seed: a.optim.seed, mode_only: a.mode_only, start_at_truth: a.start_at_truth };
    let politeness = synthetic_politeness();
    let report: RecoveryReport = parameter_recovery(&truth, &spec, &politeness, options, &cfg)?;
    let params = xrsa::model::unpack(&truth, &spec, cfg.constants)?;
    let trials = simulate_trials(&params, &politeness, &grid, a.n, a.optim.seed, a.mode_only)?;
    let text = report.to_text();
    print!("{text}");
    write_file(&out_path(&a.out, "recovery.txt"), &text)?;

    #[derive(Serialize)]
    struct RecoverConfig {
        spec: ModelSpec,
        options: RecoveryOptions,
        truth: Vec<f64>,
        fit: FitConfig,
    }
    let summary: BTreeMap<&str, f64> = BTreeMap::from([
        ("max_midpoint_error", report.max_midpoint_error),
        ("truth_nll", report.truth_nll),
        ("fitted_nll", report.fitted_nll),
    ]);
    log::info!("recovery summary {summary:?}");
    let config = RecoverConfig { spec, options, truth, fit: cfg };
    Envelope::new("recover", data_hash(&trials), a.optim.seed, config, report)?.write(&out_path(&a.out, "recovery.json"))
}
