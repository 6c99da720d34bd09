//! Multi-trial experiment protocol: split, corrupt the training portion,
//! fit, score on the clean test portion, and write everything to disk.
//!
//! Output layout under `output_dir`:
//!
//! ```text
//! config.json
//! summary.json
//! trial_<k>/metrics.json
//! trial_<k>/trace.csv
//! trial_<k>/timing.json
//! ```
//!
//! `metrics.json`, `trace.csv` and `summary.json` depend only on the config;
//! wall-clock timings are kept in `timing.json` so the others stay
//! byte-for-byte reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{labels_of, load_csv, make_planted, split_indices, NoisyDataset, PlantedSpec};
use crate::error::{invalid, FlrError, Result};
use crate::eval::{accuracy, least_squares_projection, Classifier, Standardizer};
use crate::linalg::Mat;
use crate::noise::{inject_feature_noise, inject_label_noise, NoiseSpec};
use crate::solver::{fit_with_ablation, Ablation, FitResult, Hyperparams, Termination};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// CSV dataset (features then label). Exactly one of `dataset` and
    /// `planted` must be set.
    pub dataset: Option<PathBuf>,
    pub has_header: bool,
    /// Synthetic instance; its sparse corruption and label flips apply to
    /// training rows only.
    pub planted: Option<PlantedSpec>,
    /// Per-trial noise; trial `t` uses seed `noise.seed + t` for both the
    /// split and the injection.
    pub noise: NoiseSpec,
    pub hyperparams: Hyperparams,
    pub trials: usize,
    pub train_fraction: f64,
    pub standardize: bool,
    pub ablation: Ablation,
    /// Where to write results; `None` keeps everything in memory.
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: None,
            has_header: false,
            planted: None,
            noise: NoiseSpec::default(),
            hyperparams: Hyperparams::default(),
            trials: 5,
            train_fraction: 0.8,
            standardize: false,
            ablation: Ablation::Full,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.dataset, &self.planted) {
            (Some(p), None) if !p.exists() => {
                return invalid(format!("dataset {} does not exist", p.display()))
            }
            (Some(_), None) | (None, Some(_)) => {}
            _ => return invalid("exactly one of `dataset` and `planted` must be given"),
        }
        if self.trials == 0 {
            return invalid("trials must be >= 1");
        }
        self.noise.validate()?;
        self.hyperparams.validate()
    }
}

/// Base data for all trials: clean rows, plus an optional corrupted copy used
/// for the training rows.
#[derive(Debug, Clone)]
pub struct ExperimentSource {
    pub clean: NoisyDataset,
    pub corrupted: Option<NoisyDataset>,
}

impl ExperimentSource {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        match (&cfg.dataset, &cfg.planted) {
            (Some(path), None) => Ok(ExperimentSource {
                clean: load_csv(path, cfg.has_header)?,
                corrupted: None,
            }),
            (None, Some(spec)) => {
                let planted = make_planted(spec)?;
                Ok(ExperimentSource {
                    clean: planted.clean,
                    corrupted: Some(planted.noisy),
                })
            }
            _ => invalid("exactly one of `dataset` and `planted` must be given"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialData {
    pub seed: u64,
    /// Training rows before any corruption.
    pub train_clean: NoisyDataset,
    /// Training rows as the learner sees them.
    pub train: NoisyDataset,
    pub test: NoisyDataset,
}

pub fn trial_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    cfg.noise.seed.wrapping_add(trial as u64)
}

/// Splits the source and corrupts only the training portion.
pub fn prepare_trial(
    cfg: &ExperimentConfig,
    source: &ExperimentSource,
    trial: usize,
) -> Result<TrialData> {
    let seed = trial_seed(cfg, trial);
    let (train_rows, test_rows) = split_indices(source.clean.n(), cfg.train_fraction, seed)?;
    let train_clean = source.clean.select_rows(&train_rows);
    let test = source.clean.select_rows(&test_rows);
    let base = source
        .corrupted
        .as_ref()
        .unwrap_or(&source.clean)
        .select_rows(&train_rows);
    let spec = cfg.noise.with_seed(seed);
    let x = inject_feature_noise(&base.x, &spec)?;
    let (y, _) = inject_label_noise(&base.y, &spec)?;
    let train = NoisyDataset::new(x, y, base.class_names)?;
    Ok(TrialData {
        seed,
        train_clean,
        train,
        test,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub trial: usize,
    pub seed: u64,
    pub accuracy: Option<f64>,
    /// Least-squares projection fit directly on the corrupted training data.
    pub baseline_accuracy: Option<f64>,
    /// Fraction of training rows whose recovered label (argmax of B) matches
    /// the uncorrupted label.
    pub train_label_recovery: Option<f64>,
    pub termination: Option<Termination>,
    pub iterations: Option<usize>,
    pub final_residuals: Option<[f64; 5]>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub trials: usize,
    pub succeeded: usize,
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub baseline_accuracies: Vec<f64>,
    pub mean_baseline_accuracy: f64,
    pub std_baseline_accuracy: f64,
    pub per_trial: Vec<TrialMetrics>,
}

/// Sample mean and (n−1) standard deviation; 0 spread for a single value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

struct TrialRun {
    metrics: TrialMetrics,
    fit: Option<FitResult>,
    seconds: f64,
}

fn run_trial(cfg: &ExperimentConfig, source: &ExperimentSource, trial: usize) -> TrialRun {
    let start = Instant::now();
    let seed = trial_seed(cfg, trial);
    let mut metrics = TrialMetrics {
        trial,
        seed,
        accuracy: None,
        baseline_accuracy: None,
        train_label_recovery: None,
        termination: None,
        iterations: None,
        final_residuals: None,
        error: None,
    };
    let outcome = (|| -> Result<FitResult> {
        let data = prepare_trial(cfg, source, trial)?;
        let (train_x, test_x) = if cfg.standardize {
            let s = Standardizer::fit(&data.train.x)?;
            (s.apply(&data.train.x)?, s.apply(&data.test.x)?)
        } else {
            (data.train.x.clone(), data.test.x.clone())
        };
        let test_labels = data.test.labels();

        let baseline = Classifier::new(least_squares_projection(&train_x, &data.train.y)?, None)?;
        metrics.baseline_accuracy = Some(accuracy(&baseline, &test_x, &test_labels)?);

        let fit = fit_with_ablation(&train_x, &data.train.y, &cfg.hyperparams, cfg.ablation)?;
        // Test rows are already standardized, so the classifier itself carries none.
        let clf = Classifier::new(fit.z_star().clone(), None)?;
        metrics.accuracy = Some(accuracy(&clf, &test_x, &test_labels)?);
        let recovered = argmax_rows(&fit.state.b);
        let clean = labels_of(&data.train_clean.y);
        let hits = recovered.iter().zip(&clean).filter(|(a, b)| a == b).count();
        metrics.train_label_recovery = Some(hits as f64 / clean.len() as f64);
        metrics.termination = Some(fit.termination);
        metrics.iterations = Some(fit.iterations());
        metrics.final_residuals = fit.trace.last().map(|r| r.residuals.0);
        Ok(fit)
    })();
    let fit = match outcome {
        Ok(fit) => Some(fit),
        Err(e) => {
            metrics.error = Some(e.to_string());
            None
        }
    };
    TrialRun {
        metrics,
        fit,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn argmax_rows(m: &Mat) -> Vec<usize> {
    m.row_iter()
        .map(|row| {
            let mut best = 0;
            for k in 1..row.len() {
                if row[k] > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Runs every trial (concurrently), writes per-trial and summary files when
/// `output_dir` is set, and returns the summary. Fails only if the config is
/// invalid or every trial failed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let source = ExperimentSource::load(cfg)?;
    let runs: Vec<TrialRun> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &source, t))
        .collect();

    let accuracies: Vec<f64> = runs.iter().filter_map(|r| r.metrics.accuracy).collect();
    let baseline_accuracies: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.metrics.baseline_accuracy)
        .collect();
    let (mean_accuracy, std_accuracy) = mean_std(&accuracies);
    let (mean_baseline_accuracy, std_baseline_accuracy) = mean_std(&baseline_accuracies);
    let summary = ExperimentSummary {
        trials: cfg.trials,
        succeeded: accuracies.len(),
        accuracies,
        mean_accuracy,
        std_accuracy,
        baseline_accuracies,
        mean_baseline_accuracy,
        std_baseline_accuracy,
        per_trial: runs.iter().map(|r| r.metrics.clone()).collect(),
    };

    if let Some(dir) = &cfg.output_dir {
        write_outputs(dir, cfg, &runs, &summary)?;
    }
    if summary.succeeded == 0 {
        let reasons: Vec<String> = runs
            .iter()
            .filter_map(|r| {
                r.metrics
                    .error
                    .as_ref()
                    .map(|e| format!("trial {}: {e}", r.metrics.trial))
            })
            .collect();
        return Err(FlrError::Experiment(format!(
            "all trials failed ({})",
            reasons.join("; ")
        )));
    }
    Ok(summary)
}

fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    runs: &[TrialRun],
    summary: &ExperimentSummary,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(cfg)? + "\n",
    )?;
    for run in runs {
        let trial_dir = dir.join(format!("trial_{}", run.metrics.trial));
        fs::create_dir_all(&trial_dir)?;
        fs::write(
            trial_dir.join("metrics.json"),
            serde_json::to_string_pretty(&run.metrics)? + "\n",
        )?;
        fs::write(
            trial_dir.join("timing.json"),
            serde_json::to_string_pretty(&serde_json::json!({ "seconds": run.seconds }))? + "\n",
        )?;
        if let Some(fit) = &run.fit {
            emit_trace(fit, &trial_dir.join("trace.csv"))?;
        }
    }
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(summary)? + "\n",
    )?;
    Ok(())
}

/// Renders the convergence trace as CSV, one row per record.
pub fn trace_csv(fit: &FitResult) -> String {
    let mut out = String::from(
        "iter,r_feature,r_label,r_zj,r_bkj,r_xk,objective,mu,step_k,step_j,step_ef,step_el\n",
    );
    for rec in &fit.trace.records {
        let r = rec.residuals.0;
        let s = rec.scaled_steps;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            rec.iter, r[0], r[1], r[2], r[3], r[4], rec.objective, rec.mu, s[0], s[1], s[2], s[3]
        );
    }
    out
}

pub fn emit_trace(fit: &FitResult, path: &Path) -> Result<()> {
    fs::write(path, trace_csv(fit))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Lambda1,
    Lambda2,
    Lambda3,
}

impl SweepParam {
    fn apply(self, hp: &mut Hyperparams, value: f64) {
        match self {
            SweepParam::Lambda1 => hp.lambda1 = value,
            SweepParam::Lambda2 => hp.lambda2 = value,
            SweepParam::Lambda3 => hp.lambda3 = value,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Lambda1 => "lambda1",
            SweepParam::Lambda2 => "lambda2",
            SweepParam::Lambda3 => "lambda3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub summary: ExperimentSummary,
}

/// One full experiment per value, all other settings fixed. Rows come back
/// in the order of `values`; `sweep.csv` is written to `output_dir` if set.
pub fn sweep(cfg: &ExperimentConfig, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return invalid("sweep needs at least one value");
    }
    let mut rows = Vec::with_capacity(values.len());
    for (i, &value) in values.iter().enumerate() {
        let mut run_cfg = cfg.clone();
        param.apply(&mut run_cfg.hyperparams, value);
        run_cfg.output_dir = cfg
            .output_dir
            .as_ref()
            .map(|d| d.join(format!("{}_{i}", param.name())));
        rows.push(SweepRow {
            value,
            summary: run_experiment(&run_cfg)?,
        });
    }
    if let Some(dir) = &cfg.output_dir {
        let mut csv = format!(
            "{},mean_accuracy,std_accuracy,mean_baseline_accuracy\n",
            param.name()
        );
        for row in &rows {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                row.value,
                row.summary.mean_accuracy,
                row.summary.std_accuracy,
                row.summary.mean_baseline_accuracy
            );
        }
        fs::create_dir_all(dir)?;
        fs::write(dir.join("sweep.csv"), csv)?;
    }
    Ok(rows)
}
