//! Lorenz attractor data: explicit Euler recurrence, min-max normalisation and
//! one-step-ahead supervised framing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type State = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorenzConfig {
    pub sigma: f64,
    pub r: f64,
    pub b: f64,
    pub dt: f64,
    pub initial: State,
    /// Number of returned samples, the first being the initial state (after warmup).
    pub n_samples: usize,
    /// Leading samples generated and discarded.
    pub warmup: usize,
}

impl Default for LorenzConfig {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            r: 28.0,
            b: 8.0 / 3.0,
            dt: 0.001,
            initial: [1.0, 1.0, 1.0],
            // 10000 one-step pairs need 10001 points.
            n_samples: 10_001,
            warmup: 0,
        }
    }
}

impl LorenzConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt >= 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dt must be >= 0, got {}",
                self.dt
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 samples, got {}",
                self.n_samples
            )));
        }
        let params = [self.sigma, self.r, self.b];
        if params.iter().chain(&self.initial).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("lorenz parameters"));
        }
        Ok(())
    }

    /// One explicit Euler step of the Lorenz system.
    pub fn advance(&self, s: &State) -> State {
        let [x, y, z] = *s;
        [
            x + self.sigma * (y - x) * self.dt,
            y + (self.r * x - x * z - y) * self.dt,
            z + (x * y - self.b * z) * self.dt,
        ]
    }
}

/// Raw trajectory of `n_samples` states, starting at the initial state.
pub fn generate_lorenz(cfg: &LorenzConfig) -> Result<Vec<State>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.n_samples);
    let mut state = cfg.initial;
    let total = cfg.warmup + cfg.n_samples;
    for i in 0..total {
        if i > 0 {
            state = cfg.advance(&state);
            if state.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { index: i });
            }
        }
        if i >= cfg.warmup {
            out.push(state);
        }
    }
    Ok(out)
}

/// Per-dimension affine map of `[min, max]` onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMax {
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidArgument("cannot normalize an empty series".into()))?
            .as_ref();
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for row in rows {
            let row = row.as_ref();
            if row.len() != min.len() {
                return Err(Error::DimensionMismatch {
                    context: "series row",
                    expected: min.len(),
                    actual: row.len(),
                });
            }
            for (d, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite("series value"));
                }
                min[d] = min[d].min(v);
                max[d] = max[d].max(v);
            }
        }
        if let Some(dim) = (0..min.len()).find(|&d| max[d] <= min[d]) {
            return Err(Error::ConstantDimension { dim });
        }
        Ok(Self { min, max })
    }

    pub fn dims(&self) -> usize {
        self.min.len()
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| (v - lo) / (hi - lo))
            .collect()
    }

    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&u, (&lo, &hi))| lo + u * (hi - lo))
            .collect()
    }
}

/// A normalised multivariate series with its normalisation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub series: Vec<Vec<f64>>,
    pub norm: MinMax,
}

impl Dataset {
    /// Normalises with parameters fitted on the whole series.
    pub fn normalize<R: AsRef<[f64]>>(raw: &[R]) -> Result<Self> {
        let norm = MinMax::fit(raw)?;
        Ok(Self::with_norm(raw, norm))
    }

    /// Normalises with parameters fitted on the first `fit_len` rows only.
    /// Later rows may fall outside `[0, 1]`.
    pub fn normalize_prefix<R: AsRef<[f64]>>(raw: &[R], fit_len: usize) -> Result<Self> {
        let norm = MinMax::fit(&raw[..fit_len.min(raw.len())])?;
        Ok(Self::with_norm(raw, norm))
    }

    pub fn with_norm<R: AsRef<[f64]>>(raw: &[R], norm: MinMax) -> Self {
        let series = raw.iter().map(|r| norm.apply(r.as_ref())).collect();
        Self { series, norm }
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn denormalize(&self) -> Vec<Vec<f64>> {
        self.series.iter().map(|r| self.norm.invert(r)).collect()
    }

    /// Chronological one-step pairs `(series[k], series[k + 1])`.
    pub fn make_supervised(&self, train_len: usize, test_len: usize) -> Result<Split<'_>> {
        let pairs = self.series.len().saturating_sub(1);
        if train_len + test_len > pairs {
            return Err(Error::InvalidArgument(format!(
                "{train_len} train + {test_len} test pairs need {} points, series has {}",
                train_len + test_len + 1,
                self.series.len()
            )));
        }
        let pair = |k: usize| Pair {
            index: k,
            input: &self.series[k],
            target: &self.series[k + 1],
        };
        Ok(Split {
            train: (0..train_len).map(pair).collect(),
            test: (train_len..train_len + test_len).map(pair).collect(),
        })
    }

    /// Pairs with input indices in `start..end`.
    pub fn pairs(&self, start: usize, end: usize) -> Result<Vec<Pair<'_>>> {
        if start >= end {
            return Err(Error::InvalidArgument(format!(
                "empty range {start}..{end}"
            )));
        }
        if end + 1 > self.series.len() {
            return Err(Error::InvalidArgument(format!(
                "range {start}..{end} needs {} points, series has {}",
                end + 1,
                self.series.len()
            )));
        }
        Ok((start..end)
            .map(|k| Pair {
                index: k,
                input: &self.series[k],
                target: &self.series[k + 1],
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair<'a> {
    /// Index of the input point in the series.
    pub index: usize,
    pub input: &'a [f64],
    pub target: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<'a> {
    pub train: Vec<Pair<'a>>,
    pub test: Vec<Pair<'a>>,
}
