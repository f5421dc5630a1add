//! Experiment CLI for long-tail classification studies.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use longtail_cli::config::{
    load_config, BinaryCurvesConfig, ConsistencyConfig, MethodConfig, SyntheticConfig,
    TauSweepConfig, WeightNormConfig,
};
use longtail_cli::experiment::{
    run_binary_curves, run_consistency, run_posthoc, run_synthetic, run_tau_sweep,
    run_weightnorm_study, PosthocMode,
};
use longtail_cli::output::{
    write_curves_csv, write_experiment_csv, write_posthoc_csv, write_preamble,
    write_weightnorm_csv,
};

#[derive(Parser)]
#[command(name = "longtail", version, about = "Long-tail classification experiments")]
struct Cli {
    /// Worker threads for trial-level parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train margin-loss variants on the synthetic Gaussian task and
    /// compare balanced errors against the Bayes oracle.
    Synthetic(SyntheticArgs),
    /// Sweep post-hoc corrections (logit adjustment, weight normalization)
    /// over a tau grid on ERM models.
    TauSweep(TauSweepArgs),
    /// Per-class weight norms and their correlation with class counts
    /// under SGD+momentum vs Adam (exploratory).
    WeightnormStudy(WeightNormArgs),
    /// Link functions and conditional Bayes-risk curves for the binary
    /// margin loss family.
    BinaryCurves(BinaryCurvesArgs),
    /// Apply a post-hoc correction to a CSV of logits.
    Posthoc(PosthocArgs),
    /// Randomized Fisher-consistency suites and witness searches.
    Consistency(ConsistencyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file (TOML or JSON); flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file.
    #[arg(long, short)]
    out: PathBuf,
    /// Experiment seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the `# generated = ...` timestamp line.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct SyntheticArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of independent trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Training sample size per trial.
    #[arg(long)]
    n_train: Option<usize>,
    /// Test sample size per trial.
    #[arg(long)]
    n_test: Option<usize>,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
}

#[derive(Args)]
struct TauSweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    /// Comma-separated tau values.
    #[arg(long, value_delimiter = ',')]
    tau_grid: Option<Vec<f64>>,
}

#[derive(Args)]
struct WeightNormArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of classes in the long-tail profile.
    #[arg(long)]
    classes: Option<usize>,
    /// Imbalance ratio of the profile.
    #[arg(long)]
    imbalance: Option<f64>,
}

#[derive(Args)]
struct BinaryCurvesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Positive-class prior.
    #[arg(long)]
    pi: Option<f64>,
    /// Comma-separated temperatures.
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PosthocModeArg {
    Posthoc,
    Weightnorm,
}

#[derive(Args)]
struct PosthocArgs {
    /// CSV of logits with header `f0,...,f{L-1},label`.
    #[arg(long)]
    logits: PathBuf,
    /// Per-class training counts, one integer per line.
    #[arg(long)]
    counts: PathBuf,
    /// Scaling parameter.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Additive logit adjustment or multiplicative weight normalization.
    #[arg(long, value_enum, default_value = "posthoc")]
    mode: PosthocModeArg,
    /// Output CSV of corrected scores and predictions.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ConsistencyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of random distributions in the from-delta suite.
    #[arg(long)]
    distributions: Option<usize>,
}

fn open_out(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load_or_default<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        Some(p) => load_config(p),
        None => Ok(T::default()),
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .context("configuring worker pool")?;
    }

    match cli.command {
        Command::Synthetic(args) => {
            let mut config: SyntheticConfig = load_or_default(&args.common.config)?;
            if let Some(seed) = args.common.seed {
                config.seed = seed;
            }
            if let Some(trials) = args.trials {
                config.n_trials = trials;
            }
            if let Some(n) = args.n_train {
                config.n_train = n;
            }
            if let Some(n) = args.n_test {
                config.n_test = n;
            }
            if let Some(methods) = args.methods {
                config.methods = methods.iter().map(|m| MethodConfig::named(m)).collect();
            }
            if args.common.no_timestamp {
                config.timestamp = false;
            }
            let results = run_synthetic(&config)?;
            let mut out = open_out(&args.common.out)?;
            write_experiment_csv(&mut out, &config, config.timestamp, &results, 2)?;
            out.flush()?;
        }
        Command::TauSweep(args) => {
            let mut config: TauSweepConfig = load_or_default(&args.common.config)?;
            if let Some(seed) = args.common.seed {
                config.seed = seed;
            }
            if let Some(trials) = args.trials {
                config.n_trials = trials;
            }
            if let Some(n) = args.n_train {
                config.n_train = n;
            }
            if let Some(n) = args.n_test {
                config.n_test = n;
            }
            if let Some(grid) = args.tau_grid {
                config.tau_grid = grid;
            }
            if args.common.no_timestamp {
                config.timestamp = false;
            }
            let results = run_tau_sweep(&config)?;
            let mut out = open_out(&args.common.out)?;
            write_experiment_csv(&mut out, &config, config.timestamp, &results, 2)?;
            out.flush()?;
        }
        Command::WeightnormStudy(args) => {
            let mut config: WeightNormConfig = load_or_default(&args.common.config)?;
            if let Some(seed) = args.common.seed {
                config.seed = seed;
            }
            if let Some(classes) = args.classes {
                config.num_classes = classes;
            }
            if let Some(imbalance) = args.imbalance {
                config.imbalance_ratio = imbalance;
            }
            if args.common.no_timestamp {
                config.timestamp = false;
            }
            let rows = run_weightnorm_study(&config)?;
            let mut out = open_out(&args.common.out)?;
            write_weightnorm_csv(&mut out, &config, config.timestamp, &rows)?;
            out.flush()?;
        }
        Command::BinaryCurves(args) => {
            let mut config: BinaryCurvesConfig = load_or_default(&args.common.config)?;
            if let Some(pi) = args.pi {
                config.pi = pi;
            }
            if let Some(gammas) = args.gammas {
                config.gammas = gammas;
            }
            if args.common.no_timestamp {
                config.timestamp = false;
            }
            let rows = run_binary_curves(&config)?;
            let mut out = open_out(&args.common.out)?;
            write_curves_csv(&mut out, &config, config.timestamp, &rows)?;
            out.flush()?;
        }
        Command::Posthoc(args) => {
            let logits_file =
                File::open(&args.logits).with_context(|| format!("opening {}", args.logits.display()))?;
            let counts_file =
                File::open(&args.counts).with_context(|| format!("opening {}", args.counts.display()))?;
            let counts = longtail::dist::read_counts(counts_file)?;
            let logits = longtail::dist::LabeledDataset::read_csv(logits_file, counts.len())?;
            let mode = match args.mode {
                PosthocModeArg::Posthoc => PosthocMode::Adjust,
                PosthocModeArg::Weightnorm => PosthocMode::WeightNorm,
            };
            let output = run_posthoc(&logits, &counts, args.tau, mode)?;
            let mut out = open_out(&args.out)?;
            write_posthoc_csv(&mut out, &output)?;
            out.flush()?;
            println!("{}", serde_json::to_string_pretty(&output.report)?);
        }
        Command::Consistency(args) => {
            let mut config: ConsistencyConfig = load_or_default(&args.common.config)?;
            if let Some(seed) = args.common.seed {
                config.seed = seed;
            }
            if let Some(n) = args.distributions {
                config.num_distributions = n;
            }
            let suite = run_consistency(&config)?;
            let mut out = open_out(&args.common.out)?;
            write_preamble(&mut out, &config, false)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&suite)?)?;
            out.flush()?;
            if suite.from_delta_consistent != suite.from_delta_distributions {
                anyhow::bail!(
                    "{} of {} from-delta distributions were inconsistent",
                    suite.from_delta_distributions - suite.from_delta_consistent,
                    suite.from_delta_distributions
                );
            }
        }
    }
    Ok(())
}
