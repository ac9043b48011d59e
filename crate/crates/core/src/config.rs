//! Experiment configuration.
//!
//! The file is TOML; every key is optional and may be written either under a
//! section header or as a dotted key:
//!
//! ```toml
//! lorenz.dt = 0.001
//! cascade.pool = [3, 5, 7]
//! cascade.max_cascades = 12
//!
//! [experiment]
//! train_len = 7000
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use crate::cascade::{CascadeConfig, Execution, NeuronTemplate};
use crate::error::Result;
use crate::generalizer::DEFAULT_RIDGE;
use crate::lorenz::LorenzConfig;
use crate::neuron::{Learner, DEFAULT_P0, DEFAULT_R0};

/// Lorenz state dimension; the experiment predicts the full state one step ahead.
pub const LORENZ_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeSection {
    /// Membership-function count of each pool member.
    pub pool: Vec<usize>,
    pub learner: Learner,
    /// Forgetting factor; the learner's default when absent.
    pub alpha: Option<f64>,
    pub p0: f64,
    pub r0: f64,
    pub max_cascades: usize,
    pub growth_window: usize,
    pub growth_threshold: f64,
    pub growth_cooldown: usize,
    /// Train only the newest cascade.
    pub freeze_earlier: bool,
    pub ridge: f64,
    pub stats_forgetting: f64,
    pub recompute_every: usize,
    pub warm_start: bool,
}

impl Default for CascadeSection {
    fn default() -> Self {
        let defaults = CascadeConfig::new(LORENZ_DIM, LORENZ_DIM, Vec::new());
        Self {
            pool: vec![3, 5, 7],
            learner: Learner::Rls,
            alpha: None,
            p0: DEFAULT_P0,
            r0: DEFAULT_R0,
            max_cascades: defaults.max_cascades,
            growth_window: defaults.growth_window,
            growth_threshold: defaults.growth_threshold,
            growth_cooldown: defaults.growth_cooldown,
            freeze_earlier: false,
            ridge: DEFAULT_RIDGE,
            stats_forgetting: defaults.stats_forgetting,
            recompute_every: defaults.recompute_every,
            warm_start: defaults.warm_start,
        }
    }
}

impl CascadeSection {
    pub fn to_cascade_config(&self, input_dim: usize, output_dim: usize) -> CascadeConfig {
        let pool = self
            .pool
            .iter()
            .map(|&h| {
                let mut t = NeuronTemplate::new(h, self.learner);
                t.alpha = self.alpha.unwrap_or_else(|| self.learner.default_alpha());
                t.p0 = self.p0;
                t.r0 = self.r0;
                t
            })
            .collect();
        let mut cfg = CascadeConfig::new(input_dim, output_dim, pool);
        cfg.max_cascades = self.max_cascades;
        cfg.growth_window = self.growth_window;
        cfg.growth_threshold = self.growth_threshold;
        cfg.growth_cooldown = self.growth_cooldown;
        cfg.train_all_cascades = !self.freeze_earlier;
        cfg.ridge = self.ridge;
        cfg.stats_forgetting = self.stats_forgetting;
        cfg.recompute_every = self.recompute_every;
        cfg.warm_start = self.warm_start;
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSpace {
    /// Min-max normalized units.
    #[default]
    Normalized,
    /// Original Lorenz units.
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub train_len: usize,
    pub test_len: usize,
    pub output_dir: PathBuf,
    pub emit_curves: bool,
    /// Sliding window for the curves CSV; 0 means cumulative.
    pub curve_window: usize,
    /// Fit normalization on the training prefix only.
    pub normalize_train_only: bool,
    pub metric_space: MetricSpace,
    pub execution: Execution,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            train_len: 7000,
            test_len: 3000,
            output_dir: PathBuf::from("out"),
            emit_curves: true,
            curve_window: 0,
            normalize_train_only: false,
            metric_space: MetricSpace::Normalized,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lorenz: LorenzConfig,
    pub cascade: CascadeSection,
    pub experiment: ExperimentSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub train_len: Option<usize>,
    pub test_len: Option<usize>,
    pub max_cascades: Option<usize>,
    pub pool: Option<Vec<usize>>,
    pub learner: Option<Learner>,
    pub alpha: Option<f64>,
    pub ridge: Option<f64>,
    pub freeze_earlier: bool,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing configuration")?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("loading {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.output_dir {
            self.experiment.output_dir = dir.clone();
        }
        if let Some(v) = o.train_len {
            self.experiment.train_len = v;
        }
        if let Some(v) = o.test_len {
            self.experiment.test_len = v;
        }
        if let Some(v) = o.max_cascades {
            self.cascade.max_cascades = v;
        }
        if let Some(pool) = &o.pool {
            self.cascade.pool = pool.clone();
        }
        if let Some(learner) = o.learner {
            self.cascade.learner = learner;
        }
        if let Some(alpha) = o.alpha {
            self.cascade.alpha = Some(alpha);
        }
        if let Some(ridge) = o.ridge {
            self.cascade.ridge = ridge;
        }
        if o.freeze_earlier {
            self.cascade.freeze_earlier = true;
        }
    }

    pub fn cascade_config(&self) -> CascadeConfig {
        self.cascade.to_cascade_config(LORENZ_DIM, LORENZ_DIM)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.lorenz.validate()?;
        check(self.cascade_config().validate())?;
        let e = &self.experiment;
        if e.train_len == 0 || e.test_len == 0 {
            bail!("train_len and test_len must both be >= 1");
        }
        let needed = e.train_len + e.test_len + 1;
        if needed > self.lorenz.n_samples {
            bail!(
                "{} train + {} test pairs need {needed} samples, lorenz.n_samples is {}",
                e.train_len,
                e.test_len,
                self.lorenz.n_samples
            );
        }
        Ok(())
    }
}

fn check(r: Result<()>) -> anyhow::Result<()> {
    r.context("invalid cascade configuration")
}

/// Parses a comma list such as `3,5,7`.
pub fn parse_pool(text: &str) -> anyhow::Result<Vec<usize>> {
    let pool = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("bad pool entry {s:?}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    if pool.is_empty() {
        bail!("pool must name at least one neuron");
    }
    Ok(pool)
}
