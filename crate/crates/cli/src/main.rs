use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flr::dataset::{load_csv, load_matrix_csv, write_csv, NoisyDataset};
use flr::eval::{rademacher_bound, BoundInputs, Classifier, Standardizer};
use flr::experiment::{emit_trace, run_experiment, sweep, ExperimentConfig, SweepParam};
use flr::noise::{inject_feature_noise, inject_label_noise, FeatureNoise, NoiseSpec};
use flr::solver::{fit_with_ablation, Ablation, FeatureReg, Hyperparams};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "flr",
    version,
    about = "Joint feature and label recovery for noisy classification data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit on a labelled CSV and write the projection classifier.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        hyper: HyperArgs,
        /// Output model file.
        #[arg(long)]
        model: PathBuf,
        /// Optional convergence trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// z-score features before fitting; the model stores the transform.
        #[arg(long)]
        standardize: bool,
        #[arg(long, value_enum, default_value_t = AblationArg::Full)]
        ablation: AblationArg,
    },
    /// Predict labels for a features-only CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        header: bool,
        /// Write one label per line here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Corrupt a labelled CSV with feature and label noise.
    Inject {
        #[command(flatten)]
        data: DataArgs,
        /// NoiseSpec JSON; the flags below override its fields.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run a multi-trial experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` in the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Repeat an experiment over values of one regularization weight.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        param: ParamArg,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Evaluate the generalization bound from explicit inputs or from a fit.
    Bound {
        /// BoundInputs JSON.
        #[arg(long, conflicts_with = "data")]
        inputs: Option<PathBuf>,
        /// Labelled CSV to fit first; norm budgets come from the fit.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        header: bool,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long, requires = "data")]
        lipschitz: Option<f64>,
        #[arg(long, requires = "data")]
        loss_bound: Option<f64>,
        #[arg(long, requires = "data")]
        delta: Option<f64>,
    },
}

#[derive(Args)]
struct DataArgs {
    /// CSV with feature columns followed by a label column.
    #[arg(long)]
    data: PathBuf,
    /// The first CSV row is a header.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct HyperArgs {
    /// Hyperparams JSON; the flags below override its fields.
    #[arg(long)]
    hyperparams: Option<PathBuf>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    lambda3: Option<f64>,
    #[arg(long)]
    iter_max: Option<usize>,
    #[arg(long, value_enum)]
    feature_reg: Option<RegArg>,
}

impl HyperArgs {
    fn resolve(&self) -> Result<Hyperparams> {
        let mut hp = match &self.hyperparams {
            Some(p) => read_json(p)?,
            None => Hyperparams::default(),
        };
        if let Some(v) = self.lambda1 {
            hp.lambda1 = v;
        }
        if let Some(v) = self.lambda2 {
            hp.lambda2 = v;
        }
        if let Some(v) = self.lambda3 {
            hp.lambda3 = v;
        }
        if let Some(v) = self.iter_max {
            hp.iter_max = v;
        }
        if let Some(r) = self.feature_reg {
            hp.feature_reg = match r {
                RegArg::L1 => FeatureReg::L1,
                RegArg::Frobenius => FeatureReg::Frobenius,
            };
        }
        hp.validate()?;
        Ok(hp)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AblationArg {
    Full,
    NoFeatureRecovery,
    NoLabelRecovery,
}

impl From<AblationArg> for Ablation {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::Full => Ablation::Full,
            AblationArg::NoFeatureRecovery => Ablation::NoFeatureRecovery,
            AblationArg::NoLabelRecovery => Ablation::NoLabelRecovery,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    None,
    Gaussian,
    Laplacian,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamArg {
    Lambda1,
    Lambda2,
    Lambda3,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegArg {
    L1,
    Frobenius,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Fit {
            data,
            hyper,
            model,
            trace,
            standardize,
            ablation,
        } => {
            let ds = load_csv(&data.data, data.header)?;
            let hp = hyper.resolve()?;
            let (x, standardizer) = if standardize {
                let s = Standardizer::fit(&ds.x)?;
                (s.apply(&ds.x)?, Some(s))
            } else {
                (ds.x.clone(), None)
            };
            let res = fit_with_ablation(&x, &ds.y, &hp, ablation.into())?;
            Classifier::new(res.z_star().clone(), standardizer)?
                .with_class_names(ds.class_names.clone())?
                .save(&model)?;
            if let Some(path) = trace {
                emit_trace(&res, &path)?;
            }
            let last = res.trace.last().map(|r| r.residuals.0);
            print_json(&json!({
                "termination": res.termination,
                "iterations": res.iterations(),
                "final_residuals": last,
                "model": model,
            }))?;
        }
        Command::Predict {
            model,
            features,
            header,
            output,
        } => {
            let clf = Classifier::load(&model)?;
            let x = load_matrix_csv(&features, header)?;
            let labels = clf.predict_all(&x)?;
            let mut out = String::new();
            for k in labels {
                match &clf.class_names {
                    Some(names) => out.push_str(&names[k]),
                    None => out.push_str(&k.to_string()),
                }
                out.push('\n');
            }
            match output {
                Some(p) => {
                    fs::write(&p, out).with_context(|| format!("writing {}", p.display()))?
                }
                None => print!("{out}"),
            }
        }
        Command::Inject {
            data,
            noise,
            family,
            sigma,
            eta,
            seed,
            output,
        } => {
            let ds = load_csv(&data.data, data.header)?;
            let mut spec: NoiseSpec = match &noise {
                Some(p) => read_json(p)?,
                None => NoiseSpec::default(),
            };
            if let Some(f) = family {
                spec.feature_family = match f {
                    FamilyArg::None => FeatureNoise::None,
                    FamilyArg::Gaussian => FeatureNoise::Gaussian,
                    FamilyArg::Laplacian => FeatureNoise::Laplacian,
                };
            }
            if let Some(v) = sigma {
                spec.sigma_f = v;
            }
            if let Some(v) = eta {
                spec.eta_l = v;
            }
            if let Some(v) = seed {
                spec.seed = v;
            }
            let x = inject_feature_noise(&ds.x, &spec)?;
            let (y, changed) = inject_label_noise(&ds.y, &spec)?;
            write_csv(
                &NoisyDataset::new(x, y, ds.class_names)?,
                &output,
                data.header,
            )?;
            print_json(&json!({ "noise": spec, "changed_rows": changed }))?;
        }
        Command::Run { config, output_dir } => {
            let mut cfg = ExperimentConfig::from_json_file(&config)?;
            if output_dir.is_some() {
                cfg.output_dir = output_dir;
            }
            let summary = run_experiment(&cfg)?;
            print_json(&json!({
                "trials": summary.trials,
                "succeeded": summary.succeeded,
                "mean_accuracy": summary.mean_accuracy,
                "std_accuracy": summary.std_accuracy,
                "mean_baseline_accuracy": summary.mean_baseline_accuracy,
                "std_baseline_accuracy": summary.std_baseline_accuracy,
            }))?;
        }
        Command::Sweep {
            config,
            param,
            values,
            output_dir,
        } => {
            let mut cfg = ExperimentConfig::from_json_file(&config)?;
            if output_dir.is_some() {
                cfg.output_dir = output_dir;
            }
            let param = match param {
                ParamArg::Lambda1 => SweepParam::Lambda1,
                ParamArg::Lambda2 => SweepParam::Lambda2,
                ParamArg::Lambda3 => SweepParam::Lambda3,
            };
            let rows = sweep(&cfg, param, &values)?;
            let table: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "value": r.value,
                        "mean_accuracy": r.summary.mean_accuracy,
                        "std_accuracy": r.summary.std_accuracy,
                    })
                })
                .collect();
            print_json(&json!({ "param": param.name(), "rows": table }))?;
        }
        Command::Bound {
            inputs,
            data,
            header,
            hyper,
            lipschitz,
            loss_bound,
            delta,
        } => {
            let inputs: BoundInputs = match (inputs, data) {
                (Some(p), None) => read_json(&p)?,
                (None, Some(p)) => {
                    let (Some(l), Some(b), Some(d)) = (lipschitz, loss_bound, delta) else {
                        bail!("--data needs --lipschitz, --loss-bound and --delta");
                    };
                    let ds = load_csv(&p, header)?;
                    let res = fit_with_ablation(&ds.x, &ds.y, &hyper.resolve()?, Ablation::Full)?;
                    BoundInputs::from_fit(&res, &ds.x, l, b, d)?
                }
                _ => bail!("give exactly one of --inputs or --data"),
            };
            let report = rademacher_bound(&inputs)?;
            print_json(&json!({ "inputs": inputs, "report": report }))?;
        }
    }
    Ok(())
}
