//! Versioned JSON persistence of a trained network.
//!
//! Matrices are stored row-major as `{rows, cols, data}`. Floats are written
//! in shortest round-trip form, so `load(save(net)) == net` bit for bit.

use std::path::Path;

use anyhow::{bail, Context};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cascade::{Cascade, CascadeConfig, CascadeNetwork, ErrorWindow, GrowthState};
use crate::error::{Error, Result};
use crate::generalizer::{CombinationVector, PoolErrorStats};
use crate::lorenz::MinMax;
use crate::neuron::{LearnerState, MultiNeoFuzzyNeuron, NeuronConfig};
use crate::partition::TriangularPartition;

pub const SCHEMA: &str = "cascade-nfn/snapshot/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixRecord {
    fn from_matrix(m: &DMatrix<f64>) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            data.extend(m.row(i).iter());
        }
        Self { rows, cols, data }
    }

    fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.rows.checked_mul(self.cols) != Some(self.data.len()) {
            return Err(Error::ShapeMismatch(format!(
                "matrix record {}x{} carries {} values",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerRecord {
    Rls { p: MatrixRecord },
    GradientNorm { r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuronRecord {
    pub config: NeuronConfig,
    pub centers: Vec<Vec<f64>>,
    pub weights: MatrixRecord,
    pub learner_state: LearnerRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub r: MatrixRecord,
    pub count: u64,
    pub forgetting: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeRecord {
    pub index: usize,
    pub neurons: Vec<NeuronRecord>,
    pub stats: StatsRecord,
    pub combination: CombinationVector,
    pub window: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema: String,
    pub config: CascadeConfig,
    pub growth: GrowthState,
    /// Normalization the network was trained under, if any.
    pub norm: Option<MinMax>,
    pub cascades: Vec<CascadeRecord>,
}

impl Snapshot {
    pub fn capture(net: &CascadeNetwork, norm: Option<&MinMax>) -> Self {
        let cascades = net
            .cascades()
            .iter()
            .map(|c| CascadeRecord {
                index: c.index(),
                neurons: c.pool().iter().map(neuron_record).collect(),
                stats: StatsRecord {
                    r: MatrixRecord::from_matrix(c.stats().matrix()),
                    count: c.stats().count(),
                    forgetting: c.stats().forgetting(),
                },
                combination: c.combination().clone(),
                window: c.window().values().collect(),
            })
            .collect();
        Self {
            schema: SCHEMA.to_string(),
            config: net.config().clone(),
            growth: *net.growth_state(),
            norm: norm.cloned(),
            cascades,
        }
    }

    pub fn restore(&self) -> Result<CascadeNetwork> {
        if self.schema != SCHEMA {
            return Err(Error::ShapeMismatch(format!(
                "unsupported snapshot schema {:?}",
                self.schema
            )));
        }
        let cascades = self
            .cascades
            .iter()
            .map(|rec| {
                let pool = rec
                    .neurons
                    .iter()
                    .map(restore_neuron)
                    .collect::<Result<Vec<_>>>()?;
                let stats = PoolErrorStats::from_parts(
                    rec.stats.r.to_matrix()?,
                    rec.stats.count,
                    rec.stats.forgetting,
                )?;
                let window =
                    ErrorWindow::from_values(self.config.growth_window, rec.window.clone())?;
                Ok(Cascade::from_parts(
                    rec.index,
                    pool,
                    stats,
                    rec.combination.clone(),
                    window,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        CascadeNetwork::from_parts(self.config.clone(), cascades, self.growth)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("snapshot serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let snap: Snapshot = serde_json::from_str(text).context("decoding snapshot JSON")?;
        if snap.schema != SCHEMA {
            bail!(
                "unsupported snapshot schema {:?}, expected {SCHEMA:?}",
                snap.schema
            );
        }
        Ok(snap)
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        crate::io::write_atomic(path, self.to_json().as_bytes())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("loading {}", path.display()))
    }
}

fn neuron_record(n: &MultiNeoFuzzyNeuron) -> NeuronRecord {
    NeuronRecord {
        config: *n.config(),
        centers: n
            .partitions()
            .iter()
            .map(|p| p.centers().to_vec())
            .collect(),
        weights: MatrixRecord::from_matrix(n.weights()),
        learner_state: match n.learner_state() {
            LearnerState::Rls { p } => LearnerRecord::Rls {
                p: MatrixRecord::from_matrix(p),
            },
            LearnerState::GradientNorm { r } => LearnerRecord::GradientNorm { r: *r },
        },
    }
}

fn restore_neuron(rec: &NeuronRecord) -> Result<MultiNeoFuzzyNeuron> {
    let partitions = rec
        .centers
        .iter()
        .map(|c| TriangularPartition::new(c.clone()))
        .collect::<Result<Vec<_>>>()?;
    let state = match &rec.learner_state {
        LearnerRecord::Rls { p } => LearnerState::Rls { p: p.to_matrix()? },
        LearnerRecord::GradientNorm { r } => LearnerState::GradientNorm { r: *r },
    };
    MultiNeoFuzzyNeuron::from_parts(rec.config, partitions, rec.weights.to_matrix()?, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::NeuronTemplate;
    use crate::neuron::Learner;

    fn trained() -> CascadeNetwork {
        let pool = vec![
            NeuronTemplate::new(3, Learner::Rls),
            NeuronTemplate::new(4, Learner::GradientNorm),
        ];
        let mut cfg = CascadeConfig::new(2, 2, pool);
        cfg.growth_window = 5;
        cfg.growth_cooldown = 10;
        cfg.growth_threshold = 0.5;
        let mut net = CascadeNetwork::new(cfg).unwrap();
        for k in 0..60 {
            let t = k as f64 * 0.1;
            let x = [0.5 + 0.4 * t.sin(), 0.5 + 0.4 * (1.3 * t).cos()];
            let y = [
                0.5 + 0.4 * (t + 0.1).sin(),
                0.5 + 0.4 * (1.3 * (t + 0.1)).cos(),
            ];
            net.step(&x, &y).unwrap();
        }
        assert!(net.cascades().len() > 1);
        net
    }

    #[test]
    fn round_trip_is_exact() {
        let net = trained();
        let norm = MinMax {
            min: vec![-0.1, 1.0 / 3.0],
            max: vec![2.0, 7.5],
        };
        let snap = Snapshot::capture(&net, Some(&norm));
        let back = Snapshot::from_json(&snap.to_json()).unwrap();
        assert_eq!(back, snap);
        let restored = back.restore().unwrap();
        assert_eq!(restored, net);
        assert_eq!(back.norm.as_ref(), Some(&norm));
        let x = [0.3, 0.9];
        assert_eq!(restored.predict(&x).unwrap(), net.predict(&x).unwrap());
    }

    #[test]
    fn restored_network_keeps_learning_identically() {
        let mut a = trained();
        let mut b = Snapshot::capture(&a, None).restore().unwrap();
        for k in 0..30 {
            let x = [0.01 * k as f64, 0.5];
            let y = [0.5, 0.02 * k as f64];
            assert_eq!(a.step(&x, &y).unwrap(), b.step(&x, &y).unwrap());
        }
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_foreign_schema_and_bad_shapes() {
        let net = trained();
        let mut snap = Snapshot::capture(&net, None);
        snap.schema = "other/v0".into();
        assert!(Snapshot::from_json(&snap.to_json()).is_err());
        assert!(snap.restore().is_err());

        let mut snap = Snapshot::capture(&net, None);
        snap.cascades[0].neurons[0].weights.data.pop();
        assert!(snap.restore().is_err());

        let mut snap = Snapshot::capture(&net, None);
        snap.cascades[1].index = 3;
        assert!(snap.restore().is_err());
    }
}
