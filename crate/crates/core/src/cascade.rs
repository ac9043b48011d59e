//! Evolving cascade of neuron pools.
//!
//! Cascade `m` (1-based) feeds every pool neuron the raw input `x` followed by
//! the clamped fused outputs of cascades `1..m`, so its neurons take
//! `n + (m - 1) g` inputs. Each cascade fuses its pool with a
//! [`CombinationVector`] and the network answers with the last cascade's
//! fused output. A new cascade is appended whenever the last one stops
//! improving its windowed error.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::generalizer::{combine, CombinationVector, PoolErrorStats, DEFAULT_RIDGE};
use crate::neuron::{Learner, MultiNeoFuzzyNeuron, NeuronConfig, DEFAULT_P0, DEFAULT_R0};

/// Per-member neuron settings; dimensions are filled in per cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronTemplate {
    pub mf_count: usize,
    pub learner: Learner,
    pub alpha: f64,
    pub p0: f64,
    pub r0: f64,
}

impl NeuronTemplate {
    pub fn new(mf_count: usize, learner: Learner) -> Self {
        Self {
            mf_count,
            learner,
            alpha: learner.default_alpha(),
            p0: DEFAULT_P0,
            r0: DEFAULT_R0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn instantiate(&self, input_dim: usize, output_dim: usize) -> NeuronConfig {
        NeuronConfig {
            input_dim,
            output_dim,
            mf_count: self.mf_count,
            learner: self.learner,
            alpha: self.alpha,
            p0: self.p0,
            r0: self.r0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub pool: Vec<NeuronTemplate>,
    pub max_cascades: usize,
    pub growth_window: usize,
    pub growth_threshold: f64,
    pub growth_cooldown: usize,
    pub train_all_cascades: bool,
    pub ridge: f64,
    pub stats_forgetting: f64,
    /// Recompute combination weights every this many steps.
    pub recompute_every: usize,
    /// Start each grown cascade as a copy of its predecessor's fused output
    /// instead of from zero weights.
    pub warm_start: bool,
}

impl CascadeConfig {
    /// Default growth settings with the given pool.
    pub fn new(input_dim: usize, output_dim: usize, pool: Vec<NeuronTemplate>) -> Self {
        Self {
            input_dim,
            output_dim,
            pool,
            max_cascades: 12,
            growth_window: 200,
            growth_threshold: 0.02,
            growth_cooldown: 400,
            train_all_cascades: true,
            ridge: DEFAULT_RIDGE,
            stats_forgetting: 1.0,
            recompute_every: 1,
            warm_start: true,
        }
    }

    pub fn pool_size(&self) -> usize {
        self.pool.len()
    }

    /// Input dimension of every neuron in cascade `m` (1-based).
    pub fn cascade_input_dim(&self, m: usize) -> usize {
        self.input_dim + (m - 1) * self.output_dim
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidArgument(msg));
        if self.input_dim == 0 || self.output_dim == 0 {
            return invalid("cascade input and output dimensions must be >= 1".into());
        }
        if self.pool.is_empty() {
            return invalid("neuron pool must not be empty".into());
        }
        if self.max_cascades == 0 {
            return invalid("max_cascades must be >= 1".into());
        }
        if self.growth_window == 0 {
            return invalid("growth_window must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.growth_threshold) {
            return invalid(format!(
                "growth_threshold must lie in [0, 1), got {}",
                self.growth_threshold
            ));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return invalid(format!("ridge must be >= 0, got {}", self.ridge));
        }
        if !(self.stats_forgetting > 0.0 && self.stats_forgetting <= 1.0) {
            return invalid(format!(
                "stats_forgetting must lie in (0, 1], got {}",
                self.stats_forgetting
            ));
        }
        if self.recompute_every == 0 {
            return invalid("recompute_every must be >= 1".into());
        }
        for template in &self.pool {
            template
                .instantiate(self.input_dim, self.output_dim)
                .validate()?;
        }
        Ok(())
    }
}

/// Fixed-capacity buffer of recent squared errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorWindow {
    capacity: usize,
    values: VecDeque<f64>,
}

impl ErrorWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            values: VecDeque::with_capacity(capacity),
        }
    }

    pub fn from_values(capacity: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() > capacity {
            return Err(Error::ShapeMismatch(format!(
                "error window holds {} values, capacity is {capacity}",
                values.len()
            )));
        }
        Ok(Self {
            capacity,
            values: values.into(),
        })
    }

    pub fn push(&mut self, value: f64) {
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(value);
    }

    pub fn is_full(&self) -> bool {
        self.values.len() == self.capacity
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    index: usize,
    pool: Vec<MultiNeoFuzzyNeuron>,
    stats: PoolErrorStats,
    combination: CombinationVector,
    window: ErrorWindow,
}

impl Cascade {
    fn new(index: usize, config: &CascadeConfig) -> Result<Self> {
        let input_dim = config.cascade_input_dim(index);
        let pool = config
            .pool
            .iter()
            .map(|t| MultiNeoFuzzyNeuron::new(t.instantiate(input_dim, config.output_dim)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            index,
            stats: PoolErrorStats::new(pool.len(), config.stats_forgetting)?,
            combination: CombinationVector::uniform(pool.len()),
            window: ErrorWindow::new(config.growth_window),
            pool,
        })
    }

    pub fn from_parts(
        index: usize,
        pool: Vec<MultiNeoFuzzyNeuron>,
        stats: PoolErrorStats,
        combination: CombinationVector,
        window: ErrorWindow,
    ) -> Self {
        Self {
            index,
            pool,
            stats,
            combination,
            window,
        }
    }

    /// 1-based position in the cascade stack.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn pool(&self) -> &[MultiNeoFuzzyNeuron] {
        &self.pool
    }

    pub fn stats(&self) -> &PoolErrorStats {
        &self.stats
    }

    pub fn combination(&self) -> &CombinationVector {
        &self.combination
    }

    pub fn window(&self) -> &ErrorWindow {
        &self.window
    }

    pub fn input_dim(&self) -> usize {
        self.pool[0].config().input_dim
    }

    pub fn parameter_count(&self) -> usize {
        self.pool.iter().map(|n| n.parameter_count()).sum()
    }
}

/// Intermediate values of one cascade during a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTrace {
    pub input: Vec<f64>,
    pub regressors: Vec<DVector<f64>>,
    pub pool_predictions: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub cascades: Vec<CascadeTrace>,
}

impl ForwardTrace {
    /// Output of the last cascade.
    pub fn prediction(&self) -> &[f64] {
        &self.cascades.last().expect("network has a cascade").output
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEvent {
    pub sample_index: u64,
    pub new_cascade_count: usize,
    pub window_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// Prediction made before this sample updated the network.
    pub prediction: Vec<f64>,
    /// Squared error `|y - yhat*_m|^2` of each cascade's fused output.
    pub cascade_errors: Vec<f64>,
    pub growth: Option<GrowthEvent>,
}

impl StepReport {
    pub fn grew(&self) -> bool {
        self.growth.is_some()
    }
}

/// How pool neurons are trained within one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Trains pool neurons on the rayon thread pool. Falls back to sequential
    /// execution when the `parallel` feature is disabled.
    #[default]
    Parallel,
}

/// Counters driving the growth rule.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GrowthState {
    pub samples_seen: u64,
    pub samples_since_growth: u64,
    /// Samples since the reference window error was last recorded.
    pub samples_since_checkpoint: u64,
    /// Windowed error recorded at the last growth or checkpoint.
    pub reference_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeNetwork {
    config: CascadeConfig,
    cascades: Vec<Cascade>,
    growth: GrowthState,
    execution: Execution,
}

impl CascadeNetwork {
    /// A single zero-weight cascade with uniform fusion weights.
    pub fn new(config: CascadeConfig) -> Result<Self> {
        config.validate()?;
        let first = Cascade::new(1, &config)?;
        Ok(Self {
            config,
            cascades: vec![first],
            growth: GrowthState::default(),
            execution: Execution::default(),
        })
    }

    /// Reassembles a network from stored state, checking the dimensional ladder.
    pub fn from_parts(
        config: CascadeConfig,
        cascades: Vec<Cascade>,
        growth: GrowthState,
    ) -> Result<Self> {
        config.validate()?;
        if cascades.is_empty() || cascades.len() > config.max_cascades {
            return Err(Error::ShapeMismatch(format!(
                "network must hold 1..={} cascades, got {}",
                config.max_cascades,
                cascades.len()
            )));
        }
        for (pos, cascade) in cascades.iter().enumerate() {
            let m = pos + 1;
            if cascade.index != m {
                return Err(Error::ShapeMismatch(format!(
                    "cascade at position {m} carries index {}",
                    cascade.index
                )));
            }
            check_len("cascade pool", config.pool_size(), cascade.pool.len())?;
            check_len(
                "combination vector",
                config.pool_size(),
                cascade.combination.len(),
            )?;
            check_len("error statistics", config.pool_size(), cascade.stats.q())?;
            for neuron in &cascade.pool {
                let nc = neuron.config();
                if nc.input_dim != config.cascade_input_dim(m) || nc.output_dim != config.output_dim
                {
                    return Err(Error::ShapeMismatch(format!(
                        "cascade {m} neuron is {}->{}, expected {}->{}",
                        nc.input_dim,
                        nc.output_dim,
                        config.cascade_input_dim(m),
                        config.output_dim
                    )));
                }
            }
        }
        Ok(Self {
            config,
            cascades,
            growth,
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn set_execution(&mut self, execution: Execution) {
        self.execution = execution;
    }

    pub fn config(&self) -> &CascadeConfig {
        &self.config
    }

    pub fn cascades(&self) -> &[Cascade] {
        &self.cascades
    }

    pub fn growth_state(&self) -> &GrowthState {
        &self.growth
    }

    pub fn samples_seen(&self) -> u64 {
        self.growth.samples_seen
    }

    /// Total adjustable weights, counted directly over every pool neuron.
    ///
    /// For a homogeneous pool of `q` neurons with `h` functions each this is
    /// `sum_{p=1..M} q g h (n + (p - 1) g)`.
    pub fn parameter_count(&self) -> usize {
        self.cascades.iter().map(Cascade::parameter_count).sum()
    }

    /// Runs every cascade in order on input `x` without changing state.
    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace> {
        check_len("network input", self.config.input_dim, x.len())?;
        check_finite("network input", x)?;
        let mut input = x.to_vec();
        let mut traces = Vec::with_capacity(self.cascades.len());
        for cascade in &self.cascades {
            let mut regressors = Vec::with_capacity(cascade.pool.len());
            let mut pool_predictions = Vec::with_capacity(cascade.pool.len());
            for neuron in &cascade.pool {
                let mu = neuron.regressor(&input)?;
                pool_predictions.push(neuron.predict(&mu)?.as_slice().to_vec());
                regressors.push(mu);
            }
            let output = combine(&pool_predictions, &cascade.combination)?;
            let next: Vec<f64> = output.iter().map(|v| v.clamp(0.0, 1.0)).collect();
            traces.push(CascadeTrace {
                input: input.clone(),
                regressors,
                pool_predictions,
                output,
            });
            input.extend(next);
        }
        Ok(ForwardTrace { cascades: traces })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.prediction().to_vec())
    }

    /// One prequential step: predict, then learn from `(x, y)`.
    pub fn step(&mut self, x: &[f64], y: &[f64]) -> Result<StepReport> {
        check_len("network target", self.config.output_dim, y.len())?;
        check_finite("network target", y)?;
        let trace = self.forward(x)?;

        let first_trained = if self.config.train_all_cascades {
            0
        } else {
            self.cascades.len() - 1
        };
        self.train_pools(&trace, first_trained, y)?;

        let recompute =
            (self.growth.samples_seen + 1).is_multiple_of(self.config.recompute_every as u64);
        for (cascade, ct) in self.cascades[first_trained..]
            .iter_mut()
            .zip(&trace.cascades[first_trained..])
        {
            cascade.stats.update(y, &ct.pool_predictions)?;
            if recompute {
                cascade.combination = cascade.stats.optimal_weights(self.config.ridge);
            }
        }

        let cascade_errors: Vec<f64> = trace
            .cascades
            .iter()
            .map(|ct| squared_error(y, &ct.output))
            .collect();
        for (cascade, &err) in self.cascades.iter_mut().zip(&cascade_errors) {
            cascade.window.push(err);
        }

        self.growth.samples_seen += 1;
        self.growth.samples_since_growth += 1;
        self.growth.samples_since_checkpoint += 1;
        let growth = self.maybe_grow()?;

        Ok(StepReport {
            prediction: trace.prediction().to_vec(),
            cascade_errors,
            growth,
        })
    }

    fn train_pools(&mut self, trace: &ForwardTrace, first: usize, y: &[f64]) -> Result<()> {
        let jobs: Vec<(&mut MultiNeoFuzzyNeuron, &DVector<f64>)> = self.cascades[first..]
            .iter_mut()
            .zip(&trace.cascades[first..])
            .flat_map(|(cascade, ct)| cascade.pool.iter_mut().zip(&ct.regressors))
            .collect();
        match self.execution {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                jobs.into_par_iter()
                    .try_for_each(|(neuron, mu)| neuron.train(mu, y))
            }
            _ => jobs
                .into_iter()
                .try_for_each(|(neuron, mu)| neuron.train(mu, y)),
        }
    }

    /// Appends a cascade when the last one has stalled.
    ///
    /// Every `growth_cooldown` samples (with a full window) the last cascade's
    /// mean window error is compared with the reference recorded at the
    /// previous growth or checkpoint. A relative improvement below
    /// `growth_threshold` adds a cascade; otherwise the current error becomes
    /// the new reference. The first checkpoint only records a reference.
    pub fn maybe_grow(&mut self) -> Result<Option<GrowthEvent>> {
        if self.cascades.len() >= self.config.max_cascades {
            return Ok(None);
        }
        let window = &self.last_cascade().window;
        if self.growth.samples_since_checkpoint < self.config.growth_cooldown as u64
            || !window.is_full()
        {
            return Ok(None);
        }
        let current = window.mean();
        let Some(reference) = self.growth.reference_error else {
            self.checkpoint(current);
            return Ok(None);
        };
        if relative_improvement(reference, current) >= self.config.growth_threshold {
            self.checkpoint(current);
            return Ok(None);
        }
        self.grow()?;
        self.growth.reference_error = Some(current);
        Ok(Some(GrowthEvent {
            sample_index: self.growth.samples_seen,
            new_cascade_count: self.cascades.len(),
            window_error: current,
        }))
    }

    fn checkpoint(&mut self, current: f64) {
        self.growth.reference_error = Some(current);
        self.growth.samples_since_checkpoint = 0;
    }

    /// Appends a cascade unconditionally (up to `max_cascades`).
    ///
    /// The new pool has zero weights, or with `warm_start` weights that
    /// reproduce the clamped fused output of the current last cascade.
    pub fn grow(&mut self) -> Result<bool> {
        if self.cascades.len() >= self.config.max_cascades {
            return Ok(false);
        }
        let mut next = Cascade::new(self.cascades.len() + 1, &self.config)?;
        if self.config.warm_start {
            let first_fed = self.config.cascade_input_dim(self.cascades.len());
            for neuron in &mut next.pool {
                neuron.set_weights(copy_weights(neuron, first_fed))?;
            }
        }
        self.cascades.push(next);
        self.growth.samples_since_growth = 0;
        self.growth.samples_since_checkpoint = 0;
        Ok(true)
    }

    fn last_cascade(&self) -> &Cascade {
        self.cascades.last().expect("network has a cascade")
    }
}

/// Weights making output `d` equal input channel `first_fed + d`.
///
/// Interpolating the identity at the partition centers is exact on `[0, 1]`
/// for a Ruspini partition, so the neuron returns that input clamped.
fn copy_weights(neuron: &MultiNeoFuzzyNeuron, first_fed: usize) -> DMatrix<f64> {
    let cfg = neuron.config();
    let h = cfg.mf_count;
    let mut w = DMatrix::zeros(cfg.output_dim, cfg.regressor_len());
    for d in 0..cfg.output_dim {
        let channel = first_fed + d;
        for (l, &c) in neuron.partitions()[channel].centers().iter().enumerate() {
            w[(d, channel * h + l)] = c;
        }
    }
    w
}

/// `(reference - current) / reference`; zero reference counts as no improvement.
pub fn relative_improvement(reference: f64, current: f64) -> f64 {
    if reference > 0.0 {
        (reference - current) / reference
    } else {
        0.0
    }
}

fn squared_error(y: &[f64], yhat: &[f64]) -> f64 {
    y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(hs: &[usize], learner: Learner) -> Vec<NeuronTemplate> {
        hs.iter()
            .map(|&h| NeuronTemplate::new(h, learner))
            .collect()
    }

    #[test]
    fn new_network_shapes() {
        let cfg = CascadeConfig::new(3, 3, pool(&[3, 5, 7], Learner::Rls));
        let net = CascadeNetwork::new(cfg).unwrap();
        assert_eq!(net.cascades().len(), 1);
        let shapes: Vec<_> = net.cascades()[0]
            .pool()
            .iter()
            .map(|n| n.weights().shape())
            .collect();
        assert_eq!(shapes, vec![(3, 9), (3, 15), (3, 21)]);
        assert_eq!(net.predict(&[0.1, 0.5, 0.9]).unwrap(), vec![0.0; 3]);
        assert_eq!(net.parameter_count(), 9 * 3 + 15 * 3 + 21 * 3);
    }

    #[test]
    fn invalid_configs_rejected() {
        let good = CascadeConfig::new(2, 1, pool(&[3], Learner::Rls));
        assert!(CascadeNetwork::new(good.clone()).is_ok());
        let mut bad = good.clone();
        bad.pool.clear();
        assert!(CascadeNetwork::new(bad).is_err());
        let mut bad = good.clone();
        bad.growth_threshold = 1.0;
        assert!(CascadeNetwork::new(bad).is_err());
        let mut bad = good.clone();
        bad.growth_window = 0;
        assert!(CascadeNetwork::new(bad).is_err());
        let mut bad = good;
        bad.pool[0].mf_count = 1;
        assert!(CascadeNetwork::new(bad).is_err());
    }

    #[test]
    fn second_cascade_sees_augmented_input() {
        let cfg = CascadeConfig::new(2, 3, pool(&[3], Learner::Rls));
        let mut net = CascadeNetwork::new(cfg).unwrap();
        net.grow().unwrap();
        let trace = net.forward(&[0.2, 0.4]).unwrap();
        assert_eq!(trace.cascades[1].input.len(), 2 + 3);
        assert_eq!(net.cascades()[1].input_dim(), 5);
        assert_eq!(&trace.cascades[1].input[..2], &[0.2, 0.4]);
    }

    #[test]
    fn later_cascades_receive_clamped_outputs() {
        let cfg = CascadeConfig::new(1, 1, pool(&[2], Learner::GradientNorm));
        let mut net = CascadeNetwork::new(cfg).unwrap();
        // push the first cascade well above 1
        for _ in 0..5 {
            net.step(&[0.5], &[3.0]).unwrap();
        }
        net.grow().unwrap();
        let trace = net.forward(&[0.5]).unwrap();
        assert!(trace.cascades[0].output[0] > 1.0);
        assert_eq!(trace.cascades[1].input[1], 1.0);
    }

    #[test]
    fn zero_target_first_step() {
        let cfg = CascadeConfig::new(3, 3, pool(&[3, 4], Learner::Rls));
        let mut net = CascadeNetwork::new(cfg).unwrap();
        let report = net.step(&[0.1, 0.2, 0.3], &[0.0; 3]).unwrap();
        assert_eq!(report.prediction, vec![0.0; 3]);
        assert_eq!(report.cascade_errors, vec![0.0]);
        for neuron in net.cascades()[0].pool() {
            assert!(neuron.weights().iter().all(|&w| w == 0.0));
        }
    }

    #[test]
    fn exact_correction_after_first_step() {
        let mut template = NeuronTemplate::new(3, Learner::GradientNorm).with_alpha(0.0);
        template.r0 = 0.0;
        let cfg = CascadeConfig::new(2, 2, vec![template]);
        let mut net = CascadeNetwork::new(cfg).unwrap();
        net.step(&[0.3, 0.8], &[0.6, 0.1]).unwrap();
        for _ in 0..5 {
            let report = net.step(&[0.3, 0.8], &[0.6, 0.1]).unwrap();
            assert!(report.cascade_errors[0] < 1e-24);
        }
    }

    #[test]
    fn single_member_pool_passes_through() {
        let cfg = CascadeConfig::new(2, 2, pool(&[4], Learner::Rls));
        let mut net = CascadeNetwork::new(cfg).unwrap();
        for k in 0..30 {
            let t = k as f64 / 30.0;
            net.step(&[t, 1.0 - t], &[t * t, 0.5]).unwrap();
        }
        let trace = net.forward(&[0.4, 0.6]).unwrap();
        assert_eq!(net.cascades()[0].combination().as_slice(), &[1.0]);
        assert_eq!(
            trace.cascades[0].output,
            trace.cascades[0].pool_predictions[0]
        );
    }

    #[test]
    fn growth_respects_cap() {
        let mut cfg = CascadeConfig::new(1, 1, pool(&[2], Learner::Rls));
        cfg.max_cascades = 2;
        let mut net = CascadeNetwork::new(cfg).unwrap();
        assert!(net.grow().unwrap());
        assert!(!net.grow().unwrap());
        assert_eq!(net.maybe_grow().unwrap(), None);
        assert_eq!(net.cascades().len(), 2);
    }

    fn primed_network(reference: f64, current: f64, threshold: f64) -> CascadeNetwork {
        let mut cfg = CascadeConfig::new(1, 1, pool(&[2], Learner::Rls));
        cfg.growth_window = 4;
        cfg.growth_cooldown = 4;
        cfg.growth_threshold = threshold;
        let mut net = CascadeNetwork::new(cfg).unwrap();
        for _ in 0..4 {
            net.cascades[0].window.push(current);
        }
        net.growth.reference_error = Some(reference);
        net.growth.samples_since_checkpoint = 4;
        net
    }

    #[test]
    fn improving_error_does_not_grow() {
        let mut net = primed_network(1.0, 0.5, 0.05);
        assert_eq!(net.maybe_grow().unwrap(), None);
        assert_eq!(net.growth_state().reference_error, Some(0.5));
        assert_eq!(net.growth_state().samples_since_checkpoint, 0);
    }

    #[test]
    fn stagnant_error_grows() {
        let mut net = primed_network(0.5, 0.5, 0.05);
        let event = net.maybe_grow().unwrap().expect("growth");
        assert_eq!(event.new_cascade_count, 2);
        assert_eq!(net.cascades()[1].input_dim(), 2);
        assert_eq!(net.cascades()[1].combination().as_slice(), &[1.0]);
    }

    #[test]
    fn cooldown_and_full_window_required() {
        let mut net = primed_network(0.5, 0.5, 0.05);
        net.growth.samples_since_checkpoint = 3;
        assert_eq!(net.maybe_grow().unwrap(), None);
        let mut net = primed_network(0.5, 0.5, 0.05);
        net.cascades[0].window = ErrorWindow::new(4);
        assert_eq!(net.maybe_grow().unwrap(), None);
    }

    #[test]
    fn first_checkpoint_only_records() {
        let mut net = primed_network(0.5, 0.5, 0.05);
        net.growth.reference_error = None;
        assert_eq!(net.maybe_grow().unwrap(), None);
        assert_eq!(net.growth_state().reference_error, Some(0.5));
    }

    #[test]
    fn error_window_ring() {
        let mut w = ErrorWindow::new(3);
        for v in [1.0, 2.0, 3.0, 4.0] {
            w.push(v);
        }
        assert!(w.is_full());
        assert_eq!(w.values().collect::<Vec<_>>(), vec![2.0, 3.0, 4.0]);
        assert_eq!(w.mean(), 3.0);
    }

    #[test]
    fn frozen_mode_trains_only_last_cascade() {
        let mut cfg = CascadeConfig::new(1, 1, pool(&[3], Learner::Rls));
        cfg.train_all_cascades = false;
        let mut net = CascadeNetwork::new(cfg).unwrap();
        for k in 0..10 {
            net.step(&[k as f64 / 10.0], &[0.3]).unwrap();
        }
        net.grow().unwrap();
        let frozen = net.cascades()[0].clone();
        for k in 0..10 {
            net.step(&[k as f64 / 10.0], &[0.7]).unwrap();
        }
        assert_eq!(net.cascades()[0].pool(), frozen.pool());
        assert_ne!(
            net.cascades()[1].pool()[0].weights(),
            frozen.pool()[0].weights()
        );
    }

    #[test]
    fn grown_cascade_starts_from_predecessor_output() {
        let cfg = CascadeConfig::new(2, 2, pool(&[3, 6], Learner::Rls));
        let mut net = CascadeNetwork::new(cfg).unwrap();
        for k in 0..40 {
            let t = k as f64 / 40.0;
            net.step(&[t, 1.0 - t], &[1.4 * t, 0.5 * t]).unwrap();
        }
        net.grow().unwrap();
        for x in [[0.0, 1.0], [0.3, 0.7], [0.95, 0.05]] {
            let trace = net.forward(&x).unwrap();
            let expect: Vec<f64> = trace.cascades[0]
                .output
                .iter()
                .map(|v| v.clamp(0.0, 1.0))
                .collect();
            for (a, b) in trace.cascades[1].output.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn cold_start_grows_zero_weights() {
        let mut cfg = CascadeConfig::new(2, 2, pool(&[3], Learner::Rls));
        cfg.warm_start = false;
        let mut net = CascadeNetwork::new(cfg).unwrap();
        net.step(&[0.2, 0.6], &[0.5, 0.5]).unwrap();
        net.grow().unwrap();
        assert!(net.cascades()[1].pool()[0]
            .weights()
            .iter()
            .all(|&w| w == 0.0));
        assert_eq!(net.predict(&[0.2, 0.6]).unwrap(), vec![0.0; 2]);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let cfg = CascadeConfig::new(2, 2, pool(&[3, 5, 4], Learner::Rls));
        let mut seq = CascadeNetwork::new(cfg.clone())
            .unwrap()
            .with_execution(Execution::Sequential);
        let mut par = CascadeNetwork::new(cfg)
            .unwrap()
            .with_execution(Execution::Parallel);
        seq.grow().unwrap();
        par.grow().unwrap();
        for k in 0..100 {
            let t = (k as f64 * 0.37).sin() * 0.5 + 0.5;
            let x = [t, 1.0 - t * t];
            let y = [t * (1.0 - t), 0.2 + 0.5 * t];
            let a = seq.step(&x, &y).unwrap();
            let b = par.step(&x, &y).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(seq.cascades(), par.cascades());
    }
}
