//! Generalizing neuron: fuses the outputs of a neuron pool with a sum-to-one
//! weight vector that minimises the accumulated squared error.
//!
//! With error sequences `e_j(t) = y(t) - yhat_j(t)`, the criterion
//! `sum_t |y(t) - sum_j c_j yhat_j(t)|^2` under `sum_j c_j = 1` equals `c' R c`
//! where `R_jl = sum_t e_j(t)' e_l(t)`. Its constrained minimiser is
//! `c = R^-1 E / (E' R^-1 E)` with `E` the all-ones vector.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};

pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Accumulated error cross-products of a pool of `q` predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolErrorStats {
    r: DMatrix<f64>,
    count: u64,
    forgetting: f64,
}

impl PoolErrorStats {
    pub fn new(q: usize, forgetting: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("pool size must be >= 1".into()));
        }
        if !(forgetting > 0.0 && forgetting <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "stats forgetting must lie in (0, 1], got {forgetting}"
            )));
        }
        Ok(Self {
            r: DMatrix::zeros(q, q),
            count: 0,
            forgetting,
        })
    }

    pub fn from_parts(r: DMatrix<f64>, count: u64, forgetting: f64) -> Result<Self> {
        let mut stats = Self::new(r.nrows(), forgetting)?;
        if !r.is_square() {
            return Err(Error::ShapeMismatch(
                "error statistics must be square".into(),
            ));
        }
        check_finite("error statistics", r.as_slice())?;
        stats.r = r;
        stats.count = count;
        Ok(stats)
    }

    pub fn q(&self) -> usize {
        self.r.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn forgetting(&self) -> f64 {
        self.forgetting
    }

    /// `R <- forgetting * R + G`, `G_jl = (y - pred_j)' (y - pred_l)`.
    pub fn update<P: AsRef<[f64]>>(&mut self, target: &[f64], preds: &[P]) -> Result<()> {
        let q = self.q();
        check_len("pool predictions", q, preds.len())?;
        check_finite("stats target", target)?;
        let g = target.len();
        let mut errors = DMatrix::zeros(g, q);
        for (j, pred) in preds.iter().enumerate() {
            let pred = pred.as_ref();
            check_len("pool prediction", g, pred.len())?;
            check_finite("pool prediction", pred)?;
            for d in 0..g {
                errors[(d, j)] = target[d] - pred[d];
            }
        }
        if self.forgetting != 1.0 {
            self.r *= self.forgetting;
        }
        // Gram matrix of the error columns, filled symmetrically.
        for i in 0..q {
            for j in 0..=i {
                let g = errors.column(i).dot(&errors.column(j));
                self.r[(i, j)] += g;
                if i != j {
                    self.r[(j, i)] += g;
                }
            }
        }
        self.count += 1;
        Ok(())
    }

    /// Criterion value `c' R c` for a given combination.
    pub fn criterion(&self, c: &CombinationVector) -> f64 {
        let c = DVector::from_column_slice(c.as_slice());
        c.dot(&(&self.r * &c))
    }

    /// Constrained minimiser of `c' R c` subject to `sum c = 1`.
    ///
    /// Solves `(R + ridge * tr(R) / q * I) u = E` and normalises `c = u / E'u`.
    /// Falls back to uniform weights, flagged degenerate, when no data has been
    /// seen or the regularised system cannot be solved.
    pub fn optimal_weights(&self, ridge: f64) -> CombinationVector {
        let q = self.q();
        if q == 1 {
            return CombinationVector {
                c: vec![1.0],
                degenerate: false,
            };
        }
        if self.count == 0 {
            return CombinationVector::uniform(q);
        }
        let shift = ridge.max(0.0) * self.r.trace() / q as f64;
        let mut a = self.r.clone();
        for i in 0..q {
            a[(i, i)] += shift;
        }
        let ones = DVector::from_element(q, 1.0);
        let solved = match a.clone().cholesky() {
            Some(chol) => Some(chol.solve(&ones)),
            None => a.lu().solve(&ones),
        };
        let Some(u) = solved else {
            return CombinationVector::degenerate(q);
        };
        let total = u.sum();
        if !total.is_finite() || total == 0.0 || u.iter().any(|v| !v.is_finite()) {
            return CombinationVector::degenerate(q);
        }
        let c: Vec<f64> = u.iter().map(|v| v / total).collect();
        if c.iter().any(|v| !v.is_finite()) {
            return CombinationVector::degenerate(q);
        }
        CombinationVector {
            c,
            degenerate: false,
        }
    }
}

/// Pool fusion weights; always sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationVector {
    c: Vec<f64>,
    #[serde(default)]
    degenerate: bool,
}

impl CombinationVector {
    pub fn uniform(q: usize) -> Self {
        Self {
            c: vec![1.0 / q as f64; q],
            degenerate: false,
        }
    }

    fn degenerate(q: usize) -> Self {
        Self {
            degenerate: true,
            ..Self::uniform(q)
        }
    }

    /// Wraps explicit weights, rejecting vectors that do not sum to one.
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidArgument("empty combination vector".into()));
        }
        check_finite("combination vector", &c)?;
        let sum: f64 = c.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "combination weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            c,
            degenerate: false,
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// True when the weights are a uniform fallback for an unsolvable system.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

/// `sum_j c_j * preds_j`, component-wise.
pub fn combine<P: AsRef<[f64]>>(preds: &[P], c: &CombinationVector) -> Result<Vec<f64>> {
    check_len("combination inputs", c.len(), preds.len())?;
    let g = preds.first().map_or(0, |p| p.as_ref().len());
    let mut out = vec![0.0; g];
    for (pred, &cj) in preds.iter().zip(c.as_slice()) {
        let pred = pred.as_ref();
        check_len("pool prediction", g, pred.len())?;
        for (o, &p) in out.iter_mut().zip(pred) {
            *o += cj * p;
        }
    }
    Ok(out)
}
