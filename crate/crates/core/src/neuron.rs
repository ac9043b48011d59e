//! Multidimensional neo-fuzzy neuron.
//!
//! Every input channel owns one bank of `h` triangular membership functions.
//! The concatenated grades form the regressor `mu` of length `h * n_in`, and
//! the `g` outputs are `W * mu` for a `g x (h * n_in)` weight matrix shared by
//! one membership bank per input. The output is linear in `W`, so it is
//! trained online either by exponentially weighted recursive least squares or
//! by a normalized gradient rule with a forgetting denominator.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::partition::{MembershipBank, TriangularPartition};

pub const DEFAULT_P0: f64 = 1e4;
pub const DEFAULT_R0: f64 = 1e-2;
pub const DEFAULT_RLS_ALPHA: f64 = 1.0;
pub const DEFAULT_GRADIENT_ALPHA: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    /// Matrix exponentially weighted recursive least squares.
    Rls,
    /// Gradient step normalized by `r(k) = alpha * r(k-1) + |mu|^2`.
    #[serde(alias = "gradient")]
    GradientNorm,
}

impl Learner {
    pub fn default_alpha(self) -> f64 {
        match self {
            Learner::Rls => DEFAULT_RLS_ALPHA,
            Learner::GradientNorm => DEFAULT_GRADIENT_ALPHA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub mf_count: usize,
    pub learner: Learner,
    pub alpha: f64,
    pub p0: f64,
    pub r0: f64,
}

impl NeuronConfig {
    /// Configuration with the learner's default forgetting factor and initial state.
    pub fn new(input_dim: usize, output_dim: usize, mf_count: usize, learner: Learner) -> Self {
        Self {
            input_dim,
            output_dim,
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

    pub fn with_p0(mut self, p0: f64) -> Self {
        self.p0 = p0;
        self
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    /// Length of the regressor, `h * n_in`.
    pub fn regressor_len(&self) -> usize {
        self.mf_count * self.input_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidArgument(
                "neuron input and output dimensions must be >= 1".into(),
            ));
        }
        if self.mf_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "neuron needs at least 2 membership functions per input, got {}",
                self.mf_count
            )));
        }
        let alpha_ok = match self.learner {
            Learner::Rls => self.alpha > 0.0 && self.alpha <= 1.0,
            Learner::GradientNorm => (0.0..=1.0).contains(&self.alpha),
        };
        if !alpha_ok {
            return Err(Error::InvalidArgument(format!(
                "forgetting factor {} out of range for {:?}",
                self.alpha, self.learner
            )));
        }
        if !(self.p0 > 0.0 && self.p0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "p0 must be > 0, got {}",
                self.p0
            )));
        }
        if !(self.r0 >= 0.0 && self.r0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "r0 must be >= 0, got {}",
                self.r0
            )));
        }
        Ok(())
    }
}

/// Adaptive state of the configured learning law.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnerState {
    Rls { p: DMatrix<f64> },
    GradientNorm { r: f64 },
}

#[derive(Debug, Clone)]
pub struct MultiNeoFuzzyNeuron {
    config: NeuronConfig,
    partitions: Vec<TriangularPartition>,
    weights: DMatrix<f64>,
    state: LearnerState,
    // Scratch space reused across updates; not part of the model state.
    scratch: DVector<f64>,
    innovation: DVector<f64>,
}

impl PartialEq for MultiNeoFuzzyNeuron {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.partitions == other.partitions
            && self.weights == other.weights
            && self.state == other.state
    }
}

impl MultiNeoFuzzyNeuron {
    /// Zero weights, uniform partitions, `P(0) = p0 * I` or `r(0) = r0`.
    pub fn new(config: NeuronConfig) -> Result<Self> {
        config.validate()?;
        let partition = TriangularPartition::uniform(config.mf_count)?;
        let partitions = vec![partition; config.input_dim];
        let p = config.regressor_len();
        let weights = DMatrix::zeros(config.output_dim, p);
        let state = match config.learner {
            Learner::Rls => LearnerState::Rls {
                p: DMatrix::from_diagonal_element(p, p, config.p0),
            },
            Learner::GradientNorm => LearnerState::GradientNorm { r: config.r0 },
        };
        Ok(Self::assemble(config, partitions, weights, state))
    }

    /// Rebuilds a neuron from stored parts, checking every shape invariant.
    pub fn from_parts(
        config: NeuronConfig,
        partitions: Vec<TriangularPartition>,
        weights: DMatrix<f64>,
        state: LearnerState,
    ) -> Result<Self> {
        config.validate()?;
        check_len("neuron partitions", config.input_dim, partitions.len())?;
        if let Some(bad) = partitions.iter().find(|p| p.len() != config.mf_count) {
            return Err(Error::ShapeMismatch(format!(
                "partition has {} centers, neuron expects {}",
                bad.len(),
                config.mf_count
            )));
        }
        let p = config.regressor_len();
        if weights.shape() != (config.output_dim, p) {
            return Err(Error::ShapeMismatch(format!(
                "weight matrix is {:?}, expected {:?}",
                weights.shape(),
                (config.output_dim, p)
            )));
        }
        match (&state, config.learner) {
            (LearnerState::Rls { p: pm }, Learner::Rls) if pm.shape() == (p, p) => {}
            (LearnerState::GradientNorm { r }, Learner::GradientNorm) if *r >= 0.0 => {}
            _ => {
                return Err(Error::ShapeMismatch(
                    "learner state does not match learner configuration".into(),
                ))
            }
        }
        Ok(Self::assemble(config, partitions, weights, state))
    }

    fn assemble(
        config: NeuronConfig,
        partitions: Vec<TriangularPartition>,
        weights: DMatrix<f64>,
        state: LearnerState,
    ) -> Self {
        let p = config.regressor_len();
        Self {
            scratch: DVector::zeros(p),
            innovation: DVector::zeros(config.output_dim),
            config,
            partitions,
            weights,
            state,
        }
    }

    pub fn config(&self) -> &NeuronConfig {
        &self.config
    }

    pub fn partitions(&self) -> &[TriangularPartition] {
        &self.partitions
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn set_weights(&mut self, weights: DMatrix<f64>) -> Result<()> {
        if weights.shape() != self.weights.shape() {
            return Err(Error::ShapeMismatch(format!(
                "weight matrix is {:?}, expected {:?}",
                weights.shape(),
                self.weights.shape()
            )));
        }
        self.weights = weights;
        Ok(())
    }

    pub fn learner_state(&self) -> &LearnerState {
        &self.state
    }

    /// Number of adjustable synaptic weights, `g * h * n_in`.
    pub fn parameter_count(&self) -> usize {
        self.weights.len()
    }

    /// Concatenated membership grades, one block of `h` per input channel.
    pub fn regressor(&self, input: &[f64]) -> Result<DVector<f64>> {
        check_len("neuron input", self.config.input_dim, input.len())?;
        check_finite("neuron input", input)?;
        let h = self.config.mf_count;
        let mut mu = DVector::zeros(self.config.regressor_len());
        for ((partition, &x), block) in self
            .partitions
            .iter()
            .zip(input)
            .zip(mu.as_mut_slice().chunks_exact_mut(h))
        {
            partition.evaluate_into(x, block);
        }
        Ok(mu)
    }

    /// `W * mu`.
    pub fn predict(&self, mu: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("regressor", self.config.regressor_len(), mu.len())?;
        Ok(&self.weights * mu)
    }

    /// Updates with whichever law the neuron is configured for.
    pub fn train(&mut self, mu: &DVector<f64>, target: &[f64]) -> Result<()> {
        match self.config.learner {
            Learner::Rls => self.train_rls(mu, target),
            Learner::GradientNorm => self.train_gradient(mu, target),
        }
    }

    fn check_sample(&self, mu: &DVector<f64>, target: &[f64]) -> Result<()> {
        check_len("regressor", self.config.regressor_len(), mu.len())?;
        check_len("target", self.config.output_dim, target.len())?;
        check_finite("regressor", mu.as_slice())?;
        check_finite("target", target)
    }

    fn compute_innovation(&mut self, mu: &DVector<f64>, target: &[f64]) {
        self.innovation.gemv(-1.0, &self.weights, mu, 0.0);
        for (e, &y) in self.innovation.iter_mut().zip(target) {
            *e += y;
        }
    }

    /// One step of matrix exponentially weighted RLS:
    ///
    /// ```text
    /// gain  = P mu / (alpha + mu' P mu)
    /// W    += (y - W mu) gain'
    /// P     = (P - P mu mu' P / (alpha + mu' P mu)) / alpha
    /// ```
    pub fn train_rls(&mut self, mu: &DVector<f64>, target: &[f64]) -> Result<()> {
        self.check_sample(mu, target)?;
        let alpha = self.config.alpha;
        let p = match &mut self.state {
            LearnerState::Rls { p } => p,
            LearnerState::GradientNorm { .. } => {
                return Err(Error::InvalidArgument(
                    "train_rls called on a gradient-trained neuron".into(),
                ))
            }
        };
        self.scratch.gemv(1.0, p, mu, 0.0);
        let denom = alpha + mu.dot(&self.scratch);
        if !(denom.is_finite() && denom > 0.0) {
            return Err(Error::NonFinite("rls gain denominator"));
        }
        self.innovation.gemv(-1.0, &self.weights, mu, 0.0);
        for (e, &y) in self.innovation.iter_mut().zip(target) {
            *e += y;
        }
        self.weights
            .ger(1.0 / denom, &self.innovation, &self.scratch, 1.0);
        p.ger(-1.0 / denom, &self.scratch, &self.scratch, 1.0);
        if alpha != 1.0 {
            *p /= alpha;
        }
        symmetrize(p);
        Ok(())
    }

    /// One step of the normalized gradient law:
    ///
    /// ```text
    /// r  = alpha r + |mu|^2
    /// W += (y - W mu) mu' / r
    /// ```
    ///
    /// The weight step is skipped while `r == 0`.
    pub fn train_gradient(&mut self, mu: &DVector<f64>, target: &[f64]) -> Result<()> {
        self.check_sample(mu, target)?;
        let alpha = self.config.alpha;
        let r = match &mut self.state {
            LearnerState::GradientNorm { r } => r,
            LearnerState::Rls { .. } => {
                return Err(Error::InvalidArgument(
                    "train_gradient called on an RLS-trained neuron".into(),
                ))
            }
        };
        *r = alpha * *r + mu.norm_squared();
        let r = *r;
        if r > 0.0 {
            self.compute_innovation(mu, target);
            self.weights.ger(1.0 / r, &self.innovation, mu, 1.0);
        }
        Ok(())
    }
}

fn symmetrize(p: &mut DMatrix<f64>) {
    let n = p.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (p[(i, j)] + p[(j, i)]);
            p[(i, j)] = avg;
            p[(j, i)] = avg;
        }
    }
}
