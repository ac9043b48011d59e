use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cascade_nfn::config::{parse_pool, ExperimentConfig, MetricSpace, Overrides};
use cascade_nfn::experiment::{self, METRICS_FILE};
use cascade_nfn::io::read_series_csv;
use cascade_nfn::snapshot::Snapshot;
use cascade_nfn::Learner;

#[derive(Parser)]
#[command(
    version,
    about = "Evolving cascade neo-fuzzy predictor for the Lorenz attractor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the Lorenz system and write series.csv.
    Generate(Common),
    /// Train online, evaluate frozen, and write all artifacts.
    Run(Common),
    /// Forward-only metrics of a saved model over a series range.
    Evaluate(EvaluateArgs),
    /// Summarize a saved model.
    Inspect {
        snapshot: PathBuf,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerArg {
    Rls,
    Gradient,
}

impl From<LearnerArg> for Learner {
    fn from(l: LearnerArg) -> Self {
        match l {
            LearnerArg::Rls => Learner::Rls,
            LearnerArg::Gradient => Learner::GradientNorm,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    train_len: Option<usize>,
    #[arg(long)]
    test_len: Option<usize>,
    #[arg(long)]
    max_cascades: Option<usize>,
    /// Membership-function counts of the pool, e.g. `3,5,7`.
    #[arg(long)]
    pool: Option<String>,
    #[arg(long, value_enum)]
    learner: Option<LearnerArg>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    ridge: Option<f64>,
    /// Train only the newest cascade.
    #[arg(long)]
    freeze_earlier: bool,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&Overrides {
            output_dir: self.out.clone(),
            train_len: self.train_len,
            test_len: self.test_len,
            max_cascades: self.max_cascades,
            pool: self.pool.as_deref().map(parse_pool).transpose()?,
            learner: self.learner.map(Into::into),
            alpha: self.alpha,
            ridge: self.ridge,
            freeze_earlier: self.freeze_earlier,
        });
        Ok(cfg)
    }
}

#[derive(Args)]
struct EvaluateArgs {
    snapshot: PathBuf,
    series: PathBuf,
    /// First input index.
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// One past the last input index; defaults to the last available pair.
    #[arg(long)]
    end: Option<usize>,
    /// Score in physical units instead of normalized units.
    #[arg(long)]
    physical: bool,
    /// Also write the metrics JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(common) => {
            let cfg = common.resolve()?;
            let path = experiment::cmd_generate(&cfg)?;
            println!(
                "wrote {} ({} samples)",
                path.display(),
                cfg.lorenz.n_samples
            );
        }
        Command::Run(common) => {
            let cfg = common.resolve()?;
            let started = Instant::now();
            let outcome = experiment::cmd_run(&cfg)?;
            let m = &outcome.metrics;
            println!(
                "train  mse {:.4e}  smape {:.4e}  (prequential)",
                m.train_mse, m.train_smape
            );
            println!("test   mse {:.4e}  smape {:.4e}", m.test_mse, m.test_smape);
            println!(
                "persistence test mse {:.4e}; cascades {}; params {}; growth events {}",
                m.persistence_test_mse, m.cascades, m.params, m.growth_events
            );
            println!(
                "artifacts in {} ({:.2}s)",
                cfg.experiment.output_dir.display(),
                started.elapsed().as_secs_f64()
            );
        }
        Command::Evaluate(args) => evaluate(&args)?,
        Command::Inspect { snapshot, json } => {
            let summary = experiment::inspect(&Snapshot::load(&snapshot)?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                print!("{summary}");
            }
        }
    }
    Ok(())
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let snapshot = Snapshot::load(&args.snapshot)?;
    let series = read_series_csv(&args.series)?;
    let end = args.end.unwrap_or(series.len().saturating_sub(1));
    let space = if args.physical {
        MetricSpace::Physical
    } else {
        MetricSpace::Normalized
    };
    let metrics = experiment::cmd_evaluate(&snapshot, &series, args.start, end, space)?;
    let text = experiment::evaluation_json(&metrics);
    print!("{text}");
    if let Some(out) = &args.out {
        let path = if out.is_dir() {
            out.join(METRICS_FILE)
        } else {
            out.clone()
        };
        write(&path, &text)?;
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    cascade_nfn::io::write_atomic(path, text.as_bytes())
        .with_context(|| format!("writing {}", path.display()))
}
