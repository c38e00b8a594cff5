//! End-to-end properties of loading, scoring, and fitting.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use xrsa::analysis::{drop_item_refit, narrator_comparison, narrator_fit, parameter_recovery, DropItem, NarratorMode, RecoveryOptions};
use xrsa::data::{zscore_by_participant, TrialRecord};
use xrsa::fitting::{dataset_nll, fit_model, trial_nll, Objective};
use xrsa::model::{embed, pack, unpack};
use xrsa::rsa::{pragmatic_listener, SpeakerContext};
use xrsa::*;

use common::{as_narrator, grid, quick, synthetic};

fn participant_trials(pid: &str, responses: &[f64]) -> Vec<TrialRecord> {
    responses
        .iter()
        .enumerate()
        .map(|(i, &r)| TrialRecord {
            participant_id: pid.to_string(),
            country: Country::UK,
            experiment: Experiment::Dialogue,
            predicate: Predicate::ALL[i % 7],
            modifier: Modifier::ALL[i / 7 % 6],
            response: r,
            response_z: None,
            paired_modifier: None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zscores_ignore_affine_rescaling(
        responses in prop::collection::vec(0.0f64..1.0, 3..40),
        scale in 0.05f64..20.0,
        shift in -5.0f64..5.0,
    ) {
        let spread = responses.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - responses.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1e-3);
        let a = zscore_by_participant(participant_trials("p", &responses));
        let moved: Vec<f64> = responses.iter().map(|r| scale * r + shift).collect();
        let b = zscore_by_participant(participant_trials("p", &moved));
        prop_assert_eq!(a.trials.len(), b.trials.len());
        for (x, y) in a.trials.iter().zip(&b.trials) {
            prop_assert!((x.response_z.unwrap() - y.response_z.unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn dataset_nll_is_the_sum_of_trial_nlls() {
    let (trials, pol) = synthetic(84, 5);
    let ten: Vec<TrialRecord> = trials.into_iter().step_by(8).take(10).collect();
    assert_eq!(ten.len(), 10);
    let spec = ModelSpec::builtin("M9").unwrap();
    let constants = SemanticConstants::default();
    let g = grid();
    let truth = analysis::default_truth(constants);
    let v = pack(&truth, &spec);
    let params = unpack(&v, &spec, constants).unwrap();
    let by_trial: f64 = ten.iter().map(|t| trial_nll(t, &params, &pol, &g).unwrap()).sum();
    let total = dataset_nll(&ten, &v, &spec, constants, &pol, &g).unwrap();
    assert!((total - by_trial).abs() < 1e-9, "{total} vs {by_trial}");
}

#[test]
fn fitted_optimum_survives_small_perturbations() {
    let (trials, pol) = synthetic(840, 6);
    let spec = ModelSpec::builtin("M1").unwrap();
    let cfg = quick(2, 3000);
    let fit = fit_model(&trials, &pol, &spec, &cfg).unwrap();
    let g = grid();
    let obj = Objective::new(&trials, &spec, cfg.constants, &pol, &g).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let step = 0.05 * fit.final_sigma;
    for _ in 0..100 {
        let v: Vec<f64> = fit.vector.iter().map(|x| x + step * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        let nll = obj.eval(&v).unwrap();
        assert!(nll >= fit.nll - cfg.cma.tol_fun, "perturbation improved {} -> {nll}", fit.nll);
    }
}


#[test]
fn larger_model_seeded_with_nested_solution_dominates() {
    let (trials, pol) = synthetic(1260, 7);
    let cfg = quick(1, 400);
    let small = fit_model(&trials, &pol, &ModelSpec::builtin("M1").unwrap(), &cfg).unwrap();
    for name in ["M5", "M6", "M9"] {
        let big_spec = ModelSpec::builtin(name).unwrap();
        assert!(small.spec.is_nested_in(&big_spec));
        let seeded = cfg.clone().with_extra_start(embed(&small.vector, &small.spec, &big_spec, cfg.constants).unwrap());
        let big = fit_model(&trials, &pol, &big_spec, &seeded).unwrap();
        assert!(big.nll <= small.nll + 1.0, "{name}: {} > {}", big.nll, small.nll);
    }
}

#[test]
fn narrator_listener_is_the_core_listener_without_social_weight() {
    let spec = ModelSpec::builtin("M9").unwrap();
    let frozen = spec.with_frozen_social();
    assert_eq!(frozen.df(), spec.df() - 2);
    assert_eq!(ModelSpec::builtin("M1").unwrap().with_frozen_social().df(), 14);

    let constants = SemanticConstants::default();
    let truth = analysis::default_truth(constants);
    let v = pack(&truth, &spec);
    // compare listeners built from the same decoded semantics
    let truth = unpack(&v, &spec, constants).unwrap();
    let narr = unpack(&embed(&v, &spec, &frozen, constants).unwrap(), &frozen, constants).unwrap();
    let g = grid();
    let pol = analysis::synthetic_politeness();
    for c in Country::ALL {
        let direct = truth.get(c).pragmatics.without_social();
        let ctx_a = SpeakerContext { grid: &g, semantics: &narr.get(c).semantics, pragmatics: &narr.get(c).pragmatics, politeness: &pol, country: c };
        let ctx_b = SpeakerContext { grid: &g, semantics: &truth.get(c).semantics, pragmatics: &direct, politeness: &pol, country: c };
        for p in Predicate::ALL {
            let alts = Utterance::bare(p).alternatives();
            for u in &alts {
                let a = pragmatic_listener(u, &alts, &ctx_a).unwrap();
                let b = pragmatic_listener(u, &alts, &ctx_b).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    // a narrator trial under the dialogue parameters scores with φ_s = 0
    let (trials, _) = synthetic(84, 8);
    for t in as_narrator(&trials).iter().take(20) {
        let s1 = trial_nll(t, &truth, &pol, &g).unwrap();
        let s2 = trial_nll(t, &narr, &pol, &g).unwrap();
        assert_eq!(s1, s2);
    }
}

#[test]
fn narrator_fit_dominates_the_dialogue_fit_on_narrator_trials() {
    let (dialogue, pol) = synthetic(840, 9);
    let (other, _) = synthetic(840, 10);
    let mut all = dialogue.clone();
    all.extend(as_narrator(&other));
    let cfg = quick(1, 300);
    let spec = ModelSpec::builtin("M2").unwrap();
    let d = fit_model(&dialogue, &pol, &spec, &cfg).unwrap();

    let plain = narrator_fit(&all, &pol, &spec, &cfg).unwrap();
    assert_eq!(plain.df, spec.df() - 2);
    assert_eq!(plain.params.uk.pragmatics.phi_s, 0.0);
    assert_eq!(plain.n_trials, 840);

    for mode in [NarratorMode::Refit, NarratorMode::ReuseThresholds] {
        let cmp = narrator_comparison(&all, &pol, &d, mode, &cfg).unwrap();
        assert!(cmp.report.delta >= -1e-9, "{mode:?}: {}", cmp.report.to_text());
        assert_eq!(cmp.fit.params.us.pragmatics.phi_s, 0.0);
        if mode == NarratorMode::ReuseThresholds {
            let fitted = cmp.fit.params.uk.semantics.thresholds();
            assert_eq!(fitted, d.params.uk.semantics.thresholds());
        }
    }
}

#[test]
fn refit_without_an_item_dominates_on_the_retained_trials() {
    let (trials, pol) = synthetic(1260, 11);
    let spec = ModelSpec::builtin("M1").unwrap();
    let cfg = quick(1, 400);
    let base = fit_model(&trials, &pol, &spec, &cfg).unwrap();
    for item in [DropItem::Predicate(Predicate::Difficult), DropItem::Modifier(Modifier::Extremely)] {
        let out = drop_item_refit(&trials, &pol, item, &spec, &cfg, Some(&base)).unwrap();
        assert!(out.reduced.delta <= 1.0, "{}", out.reduced.to_text());
        assert!(out.reduced.n_trials < out.report.n_trials);
        assert_eq!(out.report.baseline_nll, base.nll);
    }
}

#[test]
fn recovery_started_at_the_truth_is_no_worse_than_the_truth() {
    let spec = ModelSpec::builtin("M1").unwrap();
    let cfg = quick(1, 200);
    let truth = pack(&analysis::default_truth(cfg.constants), &spec);
    let opts = RecoveryOptions { n_trials: 840, seed: 3, mode_only: false, start_at_truth: true };
    let r = parameter_recovery(&truth, &spec, &analysis::synthetic_politeness(), opts, &cfg).unwrap();
    assert!(r.fitted_nll <= r.truth_nll + 1e-9, "{} > {}", r.fitted_nll, r.truth_nll);
    assert!(r.fit.starts.iter().any(|s| s.supplied));
}

#[test]
fn noiseless_recovery_preserves_strength_ordering() {
    let spec = ModelSpec::builtin("M1").unwrap();
    let cfg = quick(2, 1500);
    let truth = pack(&analysis::default_truth(cfg.constants), &spec);
    let opts = RecoveryOptions { n_trials: 84 * 30, seed: 0, mode_only: true, start_at_truth: false };
    let r = parameter_recovery(&truth, &spec, &analysis::synthetic_politeness(), opts, &cfg).unwrap();
    assert!(r.response_ordering_preserved.values().all(|&b| b), "{}", r.to_text());
}

/// Fitting M9 to data with no culture difference: the fitted UK/US gaps stay
/// within the spread of the same quantity across independent seeds.
#[test]
#[ignore = "several M9 fits; run with --ignored"]
fn identical_cultures_give_no_systematic_difference() {
    let spec = ModelSpec::builtin("M9").unwrap();
    let cfg = quick(3, 3000);
    let uk = analysis::default_truth(cfg.constants).uk;
    let truth = pack(&model::CultureParams::shared(uk), &spec);
    let mut gaps = Vec::new();
    let mut fits = Vec::new();
    for seed in 0..5 {
        let opts = RecoveryOptions { n_trials: 5000, seed, mode_only: false, start_at_truth: false };
        let r = parameter_recovery(&truth, &spec, &analysis::synthetic_politeness(), opts, &cfg).unwrap();
        let mids = |m: &model::CultureModel| Modifier::MODIFIERS.map(|md| m.semantics.interval(md).midpoint());
        let (a, b) = (mids(&r.fit.params.uk), mids(&r.fit.params.us));
        gaps.push(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        fits.push(a);
    }
    // run-to-run spread of the UK midpoints
    let spread = (0..5)
        .map(|k| {
            let vals: Vec<f64> = fits.iter().map(|f| f[k]).collect();
            vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!(mean_gap <= 2.0 * spread.max(0.05), "gap {mean_gap} vs spread {spread}");
}
