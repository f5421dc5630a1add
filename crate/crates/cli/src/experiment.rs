//! Experiment drivers behind the CLI subcommands.
//!
//! Every driver is deterministic given its config: per-trial seeds are
//! derived from the experiment seed, trials run in a parallel pool, and
//! results are merged by trial index so the output does not depend on
//! scheduling.

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use longtail::adjust::{
    normalize_model, posthoc_adjust, predict, AdjustmentParams, NormalizationSpec,
};
use longtail::dist::{sample_gaussian, GaussianMixture, LabeledDataset, LongTailProfile};
use longtail::loss::MarginSpec;
use longtail::metrics::{evaluate, EvalReport};
use longtail::oracle::{
    bayes_balanced_predict_gaussian, consistency_report, find_inconsistency_witness,
    ConsistencyReport, DiscreteDistribution,
};
use longtail::rng::{derive_seed, rng_from_seed};
use longtail::train::{pearson_correlation, predict_dataset, train, LinearModel};

use crate::config::{
    BinaryCurvesConfig, ConsistencyConfig, SyntheticConfig, TauSweepConfig, WeightNormConfig,
};

/// One evaluated (method, tau, trial) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub method: String,
    pub tau: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub ok: bool,
    pub ber: Option<f64>,
    pub misclassification: Option<f64>,
    pub per_class: Vec<Option<f64>>,
}

impl TrialRow {
    fn failed(method: &str, tau: Option<f64>, trial: usize, seed: u64) -> Self {
        Self {
            method: method.to_string(),
            tau,
            trial,
            seed,
            ok: false,
            ber: None,
            misclassification: None,
            per_class: Vec::new(),
        }
    }

    fn from_report(method: &str, tau: Option<f64>, trial: usize, seed: u64, report: &EvalReport) -> Self {
        Self {
            method: method.to_string(),
            tau,
            trial,
            seed,
            ok: true,
            ber: Some(report.balanced_error),
            misclassification: Some(report.misclassification_error),
            per_class: report.per_class_errors.clone(),
        }
    }
}

/// Mean/std aggregate over the successful trials of one (method, tau) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub tau: Option<f64>,
    pub mean_ber: f64,
    pub std_ber: f64,
    pub n_success: usize,
}

fn summarize(rows: &[TrialRow]) -> Vec<Summary> {
    // Group by (method, tau) preserving first-appearance order.
    let mut keys: Vec<(String, Option<f64>)> = Vec::new();
    for row in rows {
        let key = (row.method.clone(), row.tau);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(method, tau)| {
            let bers: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == method && r.tau == tau && r.ok)
                .filter_map(|r| r.ber)
                .collect();
            let n = bers.len();
            let mean = if n > 0 { bers.iter().sum::<f64>() / n as f64 } else { f64::NAN };
            let std = if n > 1 {
                (bers.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            Summary { method, tau, mean_ber: mean, std_ber: std, n_success: n }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub rows: Vec<TrialRow>,
    pub summaries: Vec<Summary>,
}

pub const BAYES_METHOD: &str = "bayes_oracle";

/// Trains every configured method once per trial and evaluates balanced
/// error on a fresh test sample, alongside the Bayes oracle on the same
/// test set.
pub fn run_synthetic(config: &SyntheticConfig) -> Result<ExperimentResults> {
    let task = config.task.build()?;
    for m in &config.methods {
        // Surface bad method names before spending time on trials.
        m.build(&task.priors()).with_context(|| format!("method `{}`", m.label()))?;
    }

    let per_trial: Vec<Vec<TrialRow>> = (0..config.n_trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<TrialRow>> {
            let train_seed = derive_seed(config.seed, &[trial as u64, 0]);
            let test_seed = derive_seed(config.seed, &[trial as u64, 1]);
            let opt_seed = derive_seed(config.seed, &[trial as u64, 2]);

            let train_set = sample_gaussian(&task, config.n_train, train_seed)?;
            let test_set = sample_gaussian(&task, config.n_test, test_seed)?;
            let truth = test_set.labels();

            let mut rows = Vec::with_capacity(config.methods.len() + 1);
            match train_set.empirical_priors() {
                Ok(priors) => {
                    for method in &config.methods {
                        let spec = method.build(&priors)?;
                        let row = match train(&train_set, &spec, &config.optimizer.with_seed(opt_seed)) {
                            Ok(outcome) => {
                                let preds = predict_dataset(&outcome.model, &test_set)?;
                                let report = evaluate(&preds, truth, 2)?;
                                TrialRow::from_report(method.label(), method.tau, trial, opt_seed, &report)
                            }
                            Err(_) => TrialRow::failed(method.label(), method.tau, trial, opt_seed),
                        };
                        rows.push(row);
                    }
                }
                Err(_) => {
                    for method in &config.methods {
                        rows.push(TrialRow::failed(method.label(), method.tau, trial, opt_seed));
                    }
                }
            }

            let bayes_preds: Vec<usize> = (0..test_set.len())
                .map(|n| {
                    let x = test_set.feature(n);
                    bayes_balanced_predict_gaussian(&task, [x[0], x[1]])
                })
                .collect();
            let report = evaluate(&bayes_preds, truth, 2)?;
            rows.push(TrialRow::from_report(BAYES_METHOD, None, trial, test_seed, &report));
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let rows: Vec<TrialRow> = per_trial.into_iter().flatten().collect();
    let summaries = summarize(&rows);
    Ok(ExperimentResults { rows, summaries })
}

/// Post-hoc correction methods compared by the tau sweep.
pub const POSTHOC: &str = "posthoc";
pub const WEIGHTNORM_NORMS: &str = "weightnorm_norms";
pub const WEIGHTNORM_PRIORS: &str = "weightnorm_priors";

/// Trains one ERM model per trial, then sweeps every post-hoc correction
/// over the tau grid: additive logit adjustment, weight normalization by
/// `||w_y||_2`, and weight normalization by the class priors.
pub fn run_tau_sweep(config: &TauSweepConfig) -> Result<ExperimentResults> {
    let task = config.task.build()?;
    if config.tau_grid.is_empty() {
        anyhow::bail!("tau grid must be nonempty");
    }

    let per_trial: Vec<Vec<TrialRow>> = (0..config.n_trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<TrialRow>> {
            let train_seed = derive_seed(config.seed, &[trial as u64, 0]);
            let test_seed = derive_seed(config.seed, &[trial as u64, 1]);
            let opt_seed = derive_seed(config.seed, &[trial as u64, 2]);

            let train_set = sample_gaussian(&task, config.n_train, train_seed)?;
            let test_set = sample_gaussian(&task, config.n_test, test_seed)?;
            let truth = test_set.labels();
            let mut rows = Vec::new();

            let trained: Option<(LinearModel, _)> = train_set.empirical_priors().ok().and_then(|priors| {
                train(&train_set, &MarginSpec::erm(2), &config.optimizer.with_seed(opt_seed))
                    .ok()
                    .map(|outcome| (outcome.model, priors))
            });

            match trained {
                Some((model, priors)) => {
                    // Raw per-example scores, reused across the whole grid.
                    let scores: Vec<Vec<f64>> = (0..test_set.len())
                        .map(|n| model.forward(test_set.feature(n)))
                        .collect::<longtail::Result<_>>()?;

                    for &tau in &config.tau_grid {
                        let params = AdjustmentParams::new(tau, priors.clone())?;
                        let preds: Vec<usize> =
                            scores.iter().map(|f| predict(&posthoc_adjust(f, &params))).collect();
                        let report = evaluate(&preds, truth, 2)?;
                        rows.push(TrialRow::from_report(POSTHOC, Some(tau), trial, opt_seed, &report));

                        for (name, nu) in [
                            (WEIGHTNORM_NORMS, model.weight_norms()),
                            (WEIGHTNORM_PRIORS, priors.probs().to_vec()),
                        ] {
                            let row = match NormalizationSpec::new(nu, tau) {
                                Ok(spec) => {
                                    let normalized = normalize_model(&model, &spec)?;
                                    let preds = predict_dataset(&normalized, &test_set)?;
                                    let report = evaluate(&preds, truth, 2)?;
                                    TrialRow::from_report(name, Some(tau), trial, opt_seed, &report)
                                }
                                Err(_) => TrialRow::failed(name, Some(tau), trial, opt_seed),
                            };
                            rows.push(row);
                        }
                    }
                }
                None => {
                    for &tau in &config.tau_grid {
                        for name in [POSTHOC, WEIGHTNORM_NORMS, WEIGHTNORM_PRIORS] {
                            rows.push(TrialRow::failed(name, Some(tau), trial, opt_seed));
                        }
                    }
                }
            }

            let bayes_preds: Vec<usize> = (0..test_set.len())
                .map(|n| {
                    let x = test_set.feature(n);
                    bayes_balanced_predict_gaussian(&task, [x[0], x[1]])
                })
                .collect();
            let report = evaluate(&bayes_preds, truth, 2)?;
            rows.push(TrialRow::from_report(BAYES_METHOD, None, trial, test_seed, &report));
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let rows: Vec<TrialRow> = per_trial.into_iter().flatten().collect();
    let summaries = summarize(&rows);
    Ok(ExperimentResults { rows, summaries })
}

/// Per-optimizer weight-norm diagnostics of the long-tail mixture study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightNormRow {
    pub optimizer: String,
    pub pearson: f64,
    pub norms: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Trains the same long-tail mixture with SGD+momentum and with Adam and
/// reports per-class weight norms plus their Pearson correlation with the
/// training counts. Exploratory: no threshold is asserted anywhere.
pub fn run_weightnorm_study(config: &WeightNormConfig) -> Result<Vec<WeightNormRow>> {
    let profile = LongTailProfile::new(
        config.profile,
        config.num_classes,
        config.max_count,
        config.imbalance_ratio,
    )?;
    let counts = profile.counts();
    let mixture = GaussianMixture::on_circle(config.num_classes, config.mean_radius, config.sigma)?;
    let data = mixture.sample_counts(&counts, derive_seed(config.seed, &[0]))?;
    let spec = MarginSpec::erm(config.num_classes);

    let optimizers = [
        (
            "sgd_momentum",
            longtail::train::OptimizerConfig {
                kind: longtail::train::OptimizerKind::SgdMomentum { momentum: config.sgd_momentum },
                learning_rate: config.sgd_learning_rate,
                epochs: config.epochs,
                batch_size: config.batch_size,
                weight_decay: config.weight_decay,
                seed: derive_seed(config.seed, &[1]),
            },
        ),
        (
            "adam",
            longtail::train::OptimizerConfig {
                kind: longtail::train::OptimizerKind::adam(),
                learning_rate: config.adam_learning_rate,
                epochs: config.epochs,
                batch_size: config.batch_size,
                weight_decay: config.weight_decay,
                seed: derive_seed(config.seed, &[1]),
            },
        ),
    ];

    let counts_f: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    optimizers
        .into_par_iter()
        .map(|(name, opt)| {
            let outcome = train(&data, &spec, &opt)?;
            let norms = outcome.model.weight_norms();
            let pearson = pearson_correlation(&norms, &counts_f)?;
            Ok(WeightNormRow { optimizer: name.to_string(), pearson, norms, counts: counts.clone() })
        })
        .collect()
}

/// One point of a link/Bayes-risk curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub loss: String,
    pub gamma: f64,
    pub p: f64,
    pub psi: f64,
    pub f: f64,
    pub psi_inv: f64,
    pub bayes_risk: f64,
}

/// Emits link and Bayes-risk curves for the named binary losses at each
/// configured temperature.
pub fn run_binary_curves(config: &BinaryCurvesConfig) -> Result<Vec<CurveRow>> {
    use longtail::binary::{open_grid, BinaryMarginParams};

    if config.grid_points < 2 {
        anyhow::bail!("grid must have at least 2 points");
    }
    let p_grid = open_grid(0.0, 1.0, config.grid_points);
    let f_step = (config.score_max - config.score_min) / (config.grid_points - 1) as f64;
    let f_grid: Vec<f64> = (0..config.grid_points).map(|k| config.score_min + k as f64 * f_step).collect();

    let mut rows = Vec::new();
    for &gamma in &config.gammas {
        let named: [(&str, BinaryMarginParams); 4] = [
            ("standard", BinaryMarginParams::standard(gamma)),
            ("balanced", BinaryMarginParams::balanced(config.pi, gamma)?),
            ("unequal_margin", BinaryMarginParams::unequal_margin(config.pi, gamma)?),
            ("balanced_margin", BinaryMarginParams::balanced_margin(config.pi, gamma)?),
        ];
        for (name, params) in named {
            let max = if config.normalized { params.bayes_risk_max() } else { 1.0 };
            for (&p, &f) in p_grid.iter().zip(&f_grid) {
                rows.push(CurveRow {
                    loss: name.to_string(),
                    gamma,
                    p,
                    psi: params.link_forward(p)?,
                    f,
                    psi_inv: params.link_inverse(f),
                    bayes_risk: params.conditional_bayes_risk(p, false)? / max,
                });
            }
        }
    }
    Ok(rows)
}

/// Post-hoc correction mode for the batch tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosthocMode {
    /// Additive: `f_y - tau * log(pi_y)`.
    Adjust,
    /// Multiplicative: `f_y / pi_y^tau`.
    WeightNorm,
}

/// Output of the batch post-hoc tool: corrected scores, predictions, and
/// the evaluation report against the labels in the input file.
#[derive(Debug, Clone, PartialEq)]
pub struct PosthocOutput {
    pub scores: Vec<Vec<f64>>,
    pub preds: Vec<usize>,
    pub labels: Vec<usize>,
    pub report: EvalReport,
}

/// Applies a post-hoc correction to a batch of logits read as
/// `f0,...,f{L-1},label`, with priors from a counts file.
pub fn run_posthoc(
    logits: &LabeledDataset,
    counts: &[u64],
    tau: f64,
    mode: PosthocMode,
) -> Result<PosthocOutput> {
    let num_classes = logits.dim();
    if counts.len() != num_classes {
        anyhow::bail!("counts file has {} classes, logits have {num_classes}", counts.len());
    }
    let priors = longtail::dist::ClassPriors::from_counts(counts)?;
    let groups = longtail::metrics::group_classes(counts, longtail::metrics::DEFAULT_GROUP_THRESHOLDS);

    let mut scores = Vec::with_capacity(logits.len());
    let mut preds = Vec::with_capacity(logits.len());
    for n in 0..logits.len() {
        let f = logits.feature(n);
        let corrected = match mode {
            PosthocMode::Adjust => {
                let params = AdjustmentParams::new(tau, priors.clone())?;
                posthoc_adjust(f, &params)
            }
            PosthocMode::WeightNorm => {
                let spec = NormalizationSpec::new(priors.probs().to_vec(), tau)?;
                longtail::adjust::weight_normalize_scores(f, &spec)
            }
        };
        preds.push(predict(&corrected));
        scores.push(corrected);
    }
    let labels = logits.labels().to_vec();
    let report = longtail::metrics::evaluate_grouped(&preds, &labels, num_classes, &groups)?;
    Ok(PosthocOutput { scores, preds, labels, report })
}

/// Outcome of the randomized consistency suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencySuite {
    pub from_delta_distributions: usize,
    pub from_delta_consistent: usize,
    pub from_delta_failures: Vec<ConsistencyReport>,
    pub adaptive_witness: Option<ConsistencyReport>,
    pub equalised_witness: Option<ConsistencyReport>,
}

/// Random distribution with strictly positive conditionals.
pub fn random_distribution(
    rng: &mut longtail::rng::Rng,
    max_instances: usize,
    max_classes: usize,
) -> DiscreteDistribution {
    use rand::Rng as _;
    let m = rng.gen_range(2..=max_instances.max(2));
    let l = rng.gen_range(2..=max_classes.max(2));
    let mut weights: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let mut row: Vec<f64> = (0..l).map(|_| rng.gen_range(0.02..1.0)).collect();
            let rsum: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= rsum);
            row
        })
        .collect();
    DiscreteDistribution::new(weights, rows).expect("normalized rows are valid")
}

/// Runs the randomized `from_delta` consistency suite and the witness
/// searches for the adaptive and equalised margins.
pub fn run_consistency(config: &ConsistencyConfig) -> Result<ConsistencySuite> {
    use rand::Rng as _;
    let mut rng = rng_from_seed(config.seed);
    let cases: Vec<(DiscreteDistribution, Vec<f64>)> = (0..config.num_distributions)
        .map(|_| {
            let dist = random_distribution(&mut rng, config.max_instances, config.max_classes);
            let deltas: Vec<f64> =
                (0..dist.num_classes()).map(|_| rng.gen_range(0.2..3.0)).collect();
            (dist, deltas)
        })
        .collect();

    let reports: Vec<ConsistencyReport> = cases
        .par_iter()
        .map(|(dist, deltas)| {
            let spec = MarginSpec::from_delta(&dist.implied_priors(), deltas)?;
            Ok(consistency_report(dist, &spec)?)
        })
        .collect::<Result<_>>()?;

    let failures: Vec<ConsistencyReport> =
        reports.iter().filter(|r| !r.consistent).cloned().collect();
    let consistent = reports.len() - failures.len();

    let adaptive_witness =
        find_inconsistency_witness(MarginSpec::adaptive, derive_seed(config.seed, &[1]), config.witness_tries)?
            .map(|(_, report)| report);
    let equalised_witness = find_inconsistency_witness(
        |pi| MarginSpec::equalised(pi, 1.0),
        derive_seed(config.seed, &[2]),
        config.witness_tries,
    )?
    .map(|(_, report)| report);

    Ok(ConsistencySuite {
        from_delta_distributions: reports.len(),
        from_delta_consistent: consistent,
        from_delta_failures: failures,
        adaptive_witness,
        equalised_witness,
    })
}
