//! Online multivariate time-series prediction with an evolving cascade of
//! multidimensional neo-fuzzy neuron pools.
//!
//! * [`partition`]: triangular Ruspini membership functions.
//! * [`neuron`]: the multidimensional neo-fuzzy neuron and its RLS and
//!   normalized-gradient learning laws.
//! * [`generalizer`]: sum-to-one minimum-error fusion of a neuron pool.
//! * [`cascade`]: the growing cascade network and its prequential step.
//! * [`lorenz`]: Lorenz attractor data generation and framing.
//! * [`metrics`]: SMAPE / MSE and running curves.
//! * [`snapshot`], [`config`], [`experiment`]: persistence, configuration and
//!   the end-to-end experiment driver used by the `cascade-nfn` binary.
//!
//! With the default `parallel` feature, pool neurons are trained on the rayon
//! thread pool; see [`cascade::Execution`].

pub mod cascade;
pub mod config;
pub mod error;
pub mod experiment;
pub mod generalizer;
pub mod io;
pub mod lorenz;
pub mod metrics;
pub mod neuron;
pub mod partition;
pub mod snapshot;

pub use cascade::{CascadeConfig, CascadeNetwork, Execution, NeuronTemplate, StepReport};
pub use error::{Error, Result};
pub use generalizer::{combine, CombinationVector, PoolErrorStats};
pub use lorenz::{generate_lorenz, Dataset, LorenzConfig};
pub use neuron::{Learner, MultiNeoFuzzyNeuron, NeuronConfig};
pub use partition::{MembershipBank, TriangularPartition};
