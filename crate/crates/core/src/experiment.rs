//! End-to-end Lorenz experiment: generate, train prequentially, evaluate
//! frozen, and emit artifacts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::cascade::{CascadeNetwork, GrowthEvent};
use crate::config::{ExperimentConfig, MetricSpace};
use crate::error::Error;
use crate::io::{self, Phase};
use crate::lorenz::{generate_lorenz, Dataset, MinMax, Pair, State};
use crate::metrics::{self, running_curves};
use crate::snapshot::Snapshot;

pub const SERIES_FILE: &str = "series.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const CURVES_TRAIN_FILE: &str = "curves_train.csv";
pub const CURVES_TEST_FILE: &str = "curves_test.csv";
pub const GROWTH_FILE: &str = "growth.csv";
pub const MODEL_FILE: &str = "model.json";
pub const CONFIG_FILE: &str = "config.toml";

/// Targets and predictions for a contiguous block of pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseRecord {
    pub indices: Vec<usize>,
    pub targets: Vec<Vec<f64>>,
    pub predictions: Vec<Vec<f64>>,
}

impl PhaseRecord {
    fn push(&mut self, pair: &Pair<'_>, prediction: Vec<f64>) {
        self.indices.push(pair.index);
        self.targets.push(pair.target.to_vec());
        self.predictions.push(prediction);
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Targets and predictions mapped into the requested space.
    pub fn in_space(&self, norm: &MinMax, space: MetricSpace) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        match space {
            MetricSpace::Normalized => (self.targets.clone(), self.predictions.clone()),
            MetricSpace::Physical => (
                self.targets.iter().map(|r| norm.invert(r)).collect(),
                self.predictions.iter().map(|r| norm.invert(r)).collect(),
            ),
        }
    }

    pub fn scores(&self, norm: &MinMax, space: MetricSpace) -> Result<Scores> {
        let (t, p) = self.in_space(norm, space);
        Ok(Scores {
            mse: metrics::mse(&t, &p)?,
            smape: metrics::smape(&t, &p)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub mse: f64,
    pub smape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationReport {
    pub cascade: usize,
    pub c: Vec<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Prequential: every prediction was made before its sample was learned.
    pub train_mse: f64,
    pub test_mse: f64,
    /// SMAPE on the 0..2 scale.
    pub train_smape: f64,
    pub test_smape: f64,
    /// The final network replayed over the training pairs without learning.
    pub frozen_train_mse: f64,
    pub frozen_train_smape: f64,
    pub persistence_test_mse: f64,
    pub persistence_test_smape: f64,
    pub cascades: usize,
    pub params: usize,
    pub growth_events: usize,
    pub train_pairs: usize,
    pub test_pairs: usize,
    pub metric_space: MetricSpace,
    pub combination: Vec<CombinationReport>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub raw: Vec<State>,
    pub dataset: Dataset,
    pub network: CascadeNetwork,
    pub train: PhaseRecord,
    pub frozen_train: PhaseRecord,
    pub test: PhaseRecord,
    pub growth: Vec<GrowthEvent>,
    pub metrics: RunMetrics,
}

fn prepare(cfg: &ExperimentConfig) -> Result<(Vec<State>, Dataset)> {
    cfg.validate()?;
    let raw = generate_lorenz(&cfg.lorenz).context("generating Lorenz series")?;
    let dataset = if cfg.experiment.normalize_train_only {
        Dataset::normalize_prefix(&raw, cfg.experiment.train_len + 1)
    } else {
        Dataset::normalize(&raw)
    }
    .context("normalizing series")?;
    Ok((raw, dataset))
}

/// Forward-only pass; the network is borrowed immutably.
pub fn evaluate_pairs(net: &CascadeNetwork, pairs: &[Pair<'_>]) -> Result<PhaseRecord> {
    let mut record = PhaseRecord::default();
    for pair in pairs {
        let prediction = net
            .predict(pair.input)
            .with_context(|| format!("evaluating sample {}", pair.index))?;
        record.push(pair, prediction);
    }
    Ok(record)
}

pub fn persistence(pairs: &[Pair<'_>]) -> PhaseRecord {
    let mut record = PhaseRecord::default();
    for pair in pairs {
        record.push(pair, pair.input.to_vec());
    }
    record
}

pub fn combination_report(net: &CascadeNetwork) -> Vec<CombinationReport> {
    net.cascades()
        .iter()
        .map(|c| CombinationReport {
            cascade: c.index(),
            c: c.combination().as_slice().to_vec(),
            degenerate: c.combination().is_degenerate(),
        })
        .collect()
}

/// Runs the whole protocol in memory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let (raw, dataset) = prepare(cfg)?;
    let e = &cfg.experiment;
    let split = dataset.make_supervised(e.train_len, e.test_len)?;
    let mut network = CascadeNetwork::new(cfg.cascade_config())
        .context("building network")?
        .with_execution(e.execution);

    let mut train = PhaseRecord::default();
    let mut growth = Vec::new();
    for pair in &split.train {
        let report = network
            .step(pair.input, pair.target)
            .with_context(|| format!("training sample {}", pair.index))?;
        growth.extend(report.growth);
        train.push(pair, report.prediction);
    }

    let frozen_train = evaluate_pairs(&network, &split.train)?;
    let test = evaluate_pairs(&network, &split.test)?;
    let baseline = persistence(&split.test);

    let norm = &dataset.norm;
    let space = e.metric_space;
    let train_scores = train.scores(norm, space)?;
    let frozen_scores = frozen_train.scores(norm, space)?;
    let test_scores = test.scores(norm, space)?;
    let baseline_scores = baseline.scores(norm, space)?;
    let metrics = RunMetrics {
        train_mse: train_scores.mse,
        test_mse: test_scores.mse,
        train_smape: train_scores.smape,
        test_smape: test_scores.smape,
        frozen_train_mse: frozen_scores.mse,
        frozen_train_smape: frozen_scores.smape,
        persistence_test_mse: baseline_scores.mse,
        persistence_test_smape: baseline_scores.smape,
        cascades: network.cascades().len(),
        params: network.parameter_count(),
        growth_events: growth.len(),
        train_pairs: train.len(),
        test_pairs: test.len(),
        metric_space: space,
        combination: combination_report(&network),
    };
    drop(split);
    Ok(RunOutcome {
        raw,
        dataset,
        network,
        train,
        frozen_train,
        test,
        growth,
        metrics,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("metrics serialize");
    text.push('\n');
    text
}

/// Writes the series CSV; returns its path.
pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.lorenz.validate()?;
    let raw = generate_lorenz(&cfg.lorenz).context("generating Lorenz series")?;
    let dir = &cfg.experiment.output_dir;
    ensure_dir(dir)?;
    let path = dir.join(SERIES_FILE);
    io::write_atomic(&path, io::format_series_csv(&raw).as_bytes())?;
    Ok(path)
}

pub fn write_artifacts(cfg: &ExperimentConfig, outcome: &RunOutcome) -> Result<()> {
    let dir = &cfg.experiment.output_dir;
    ensure_dir(dir)?;
    let write = |name: &str, text: String| io::write_atomic(&dir.join(name), text.as_bytes());

    write(CONFIG_FILE, cfg.to_toml())?;
    write(SERIES_FILE, io::format_series_csv(&outcome.raw))?;

    let rows: Vec<_> = [(Phase::Train, &outcome.train), (Phase::Test, &outcome.test)]
        .into_iter()
        .flat_map(|(phase, rec)| {
            rec.indices
                .iter()
                .zip(&rec.targets)
                .zip(&rec.predictions)
                .map(move |((&k, y), yhat)| (k, phase, y.as_slice(), yhat.as_slice()))
        })
        .collect();
    write(PREDICTIONS_FILE, io::format_predictions_csv(&rows))?;

    if cfg.experiment.emit_curves {
        let space = cfg.experiment.metric_space;
        for (name, rec) in [
            (CURVES_TRAIN_FILE, &outcome.train),
            (CURVES_TEST_FILE, &outcome.test),
        ] {
            let (t, p) = rec.in_space(&outcome.dataset.norm, space);
            let (smape, mse) = running_curves(&t, &p, cfg.experiment.curve_window)?;
            write(name, io::format_curves_csv(&smape.values, &mse.values))?;
        }
    }

    write(GROWTH_FILE, io::format_growth_csv(&outcome.growth))?;
    Snapshot::capture(&outcome.network, Some(&outcome.dataset.norm)).save(&dir.join(MODEL_FILE))?;
    write(METRICS_FILE, json(&outcome.metrics))?;
    Ok(())
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let outcome = run_experiment(cfg)?;
    write_artifacts(cfg, &outcome)?;
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationMetrics {
    pub start: usize,
    pub end: usize,
    pub pairs: usize,
    pub mse: f64,
    pub smape: f64,
    pub metric_space: MetricSpace,
}

/// Forward-only metrics over the pairs whose inputs have indices `start..end`.
///
/// `raw` is in physical units; it is normalized with the snapshot's stored
/// parameters.
pub fn cmd_evaluate<R: AsRef<[f64]>>(
    snapshot: &Snapshot,
    raw: &[R],
    start: usize,
    end: usize,
    space: MetricSpace,
) -> Result<EvaluationMetrics> {
    let network = snapshot.restore().context("restoring snapshot")?;
    let cfg = network.config();
    if cfg.input_dim != cfg.output_dim {
        return Err(Error::ShapeMismatch(format!(
            "one-step series evaluation needs n == g, snapshot has n={} g={}",
            cfg.input_dim, cfg.output_dim
        ))
        .into());
    }
    if let Some(bad) = raw
        .iter()
        .map(|r| r.as_ref().len())
        .find(|&d| d != cfg.input_dim)
    {
        return Err(Error::ShapeMismatch(format!(
            "series rows have {bad} values, snapshot expects {}",
            cfg.input_dim
        ))
        .into());
    }
    let norm = match &snapshot.norm {
        Some(norm) if norm.dims() != cfg.input_dim => {
            return Err(Error::ShapeMismatch(format!(
                "snapshot normalization covers {} dimensions, network expects {}",
                norm.dims(),
                cfg.input_dim
            ))
            .into())
        }
        Some(norm) => norm.clone(),
        None => MinMax {
            min: vec![0.0; cfg.input_dim],
            max: vec![1.0; cfg.input_dim],
        },
    };
    let dataset = Dataset::with_norm(raw, norm);
    let pairs = dataset.pairs(start, end)?;
    let record = evaluate_pairs(&network, &pairs)?;
    let scores = record.scores(&dataset.norm, space)?;
    Ok(EvaluationMetrics {
        start,
        end,
        pairs: record.len(),
        mse: scores.mse,
        smape: scores.smape,
        metric_space: space,
    })
}

pub fn evaluation_json(m: &EvaluationMetrics) -> String {
    json(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeSummary {
    pub index: usize,
    pub input_dim: usize,
    pub mf_counts: Vec<usize>,
    pub c: Vec<f64>,
    pub degenerate: bool,
    pub params: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotSummary {
    pub schema: String,
    pub input_dim: usize,
    pub output_dim: usize,
    pub samples_seen: u64,
    pub params: usize,
    pub cascades: Vec<CascadeSummary>,
}

pub fn inspect(snapshot: &Snapshot) -> Result<SnapshotSummary> {
    let net = snapshot.restore().context("restoring snapshot")?;
    let cascades = net
        .cascades()
        .iter()
        .map(|c| CascadeSummary {
            index: c.index(),
            input_dim: c.input_dim(),
            mf_counts: c.pool().iter().map(|n| n.config().mf_count).collect(),
            c: c.combination().as_slice().to_vec(),
            degenerate: c.combination().is_degenerate(),
            params: c.parameter_count(),
        })
        .collect();
    Ok(SnapshotSummary {
        schema: snapshot.schema.clone(),
        input_dim: net.config().input_dim,
        output_dim: net.config().output_dim,
        samples_seen: net.samples_seen(),
        params: net.parameter_count(),
        cascades,
    })
}

impl fmt::Display for SnapshotSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "schema        {}", self.schema)?;
        writeln!(
            f,
            "dimensions    n={} g={}",
            self.input_dim, self.output_dim
        )?;
        writeln!(f, "samples seen  {}", self.samples_seen)?;
        writeln!(f, "parameters    {}", self.params)?;
        writeln!(f, "cascades      {}", self.cascades.len())?;
        for c in &self.cascades {
            let weights: Vec<String> = c.c.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(
                f,
                "  [{:>2}] inputs={:<3} h={:?} params={:<6} c=[{}]{}",
                c.index,
                c.input_dim,
                c.mf_counts,
                c.params,
                weights.join(", "),
                if c.degenerate { " (degenerate)" } else { "" }
            )?;
        }
        Ok(())
    }
}
