//! SMAPE and MSE over streams of multivariate predictions.

use crate::error::{Error, Result};

const SMAPE_ZERO: f64 = 1e-12;

fn check_streams<T: AsRef<[f64]>, P: AsRef<[f64]>>(targets: &[T], preds: &[P]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument("metric over an empty stream".into()));
    }
    if targets.len() != preds.len() {
        return Err(Error::DimensionMismatch {
            context: "metric streams",
            expected: targets.len(),
            actual: preds.len(),
        });
    }
    for (t, p) in targets.iter().zip(preds) {
        if t.as_ref().len() != p.as_ref().len() {
            return Err(Error::DimensionMismatch {
                context: "metric pair",
                expected: t.as_ref().len(),
                actual: p.as_ref().len(),
            });
        }
    }
    Ok(())
}

fn squared_sum(y: &[f64], yhat: &[f64]) -> f64 {
    y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn smape_sum(y: &[f64], yhat: &[f64]) -> f64 {
    y.iter()
        .zip(yhat)
        .map(|(&a, &b)| {
            if a.abs() < SMAPE_ZERO && b.abs() < SMAPE_ZERO {
                0.0
            } else {
                2.0 * (a - b).abs() / (a.abs() + b.abs())
            }
        })
        .sum()
}

/// Mean over samples and output components of the squared error.
pub fn mse<T: AsRef<[f64]>, P: AsRef<[f64]>>(targets: &[T], preds: &[P]) -> Result<f64> {
    check_streams(targets, preds)?;
    let (sum, count) = totals(targets, preds, squared_sum);
    Ok(sum / count as f64)
}

/// Mean of `2|y - yhat| / (|y| + |yhat|)` on the 0..2 scale; a component where
/// both values vanish contributes 0.
pub fn smape<T: AsRef<[f64]>, P: AsRef<[f64]>>(targets: &[T], preds: &[P]) -> Result<f64> {
    check_streams(targets, preds)?;
    let (sum, count) = totals(targets, preds, smape_sum);
    Ok(sum / count as f64)
}

fn totals<T: AsRef<[f64]>, P: AsRef<[f64]>>(
    targets: &[T],
    preds: &[P],
    term: fn(&[f64], &[f64]) -> f64,
) -> (f64, usize) {
    targets
        .iter()
        .zip(preds)
        .fold((0.0, 0), |(sum, count), (t, p)| {
            (sum + term(t.as_ref(), p.as_ref()), count + t.as_ref().len())
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub values: Vec<f64>,
    pub cumulative: bool,
}

/// Per-iteration SMAPE and MSE curves.
///
/// `window == 0` gives cumulative curves (value `k` covers pairs `0..=k`);
/// otherwise each value covers the last `window` pairs up to `k`.
pub fn running_curves<T: AsRef<[f64]>, P: AsRef<[f64]>>(
    targets: &[T],
    preds: &[P],
    window: usize,
) -> Result<(MetricSeries, MetricSeries)> {
    if targets.is_empty() && preds.is_empty() {
        let empty = MetricSeries {
            values: vec![],
            cumulative: window == 0,
        };
        return Ok((empty.clone(), empty));
    }
    check_streams(targets, preds)?;
    let n = targets.len();
    let mut prefix_smape = vec![0.0; n + 1];
    let mut prefix_mse = vec![0.0; n + 1];
    let mut prefix_count = vec![0usize; n + 1];
    for (k, (t, p)) in targets.iter().zip(preds).enumerate() {
        let (t, p) = (t.as_ref(), p.as_ref());
        prefix_smape[k + 1] = prefix_smape[k] + smape_sum(t, p);
        prefix_mse[k + 1] = prefix_mse[k] + squared_sum(t, p);
        prefix_count[k + 1] = prefix_count[k] + t.len();
    }
    let mut smape_values = Vec::with_capacity(n);
    let mut mse_values = Vec::with_capacity(n);
    for k in 0..n {
        let lo = if window == 0 {
            0
        } else {
            (k + 1).saturating_sub(window)
        };
        let count = (prefix_count[k + 1] - prefix_count[lo]).max(1) as f64;
        if lo == 0 {
            smape_values.push(prefix_smape[k + 1] / count);
            mse_values.push(prefix_mse[k + 1] / count);
        } else {
            smape_values.push((prefix_smape[k + 1] - prefix_smape[lo]) / count);
            mse_values.push((prefix_mse[k + 1] - prefix_mse[lo]) / count);
        }
    }
    let cumulative = window == 0;
    Ok((
        MetricSeries {
            values: smape_values,
            cumulative,
        },
        MetricSeries {
            values: mse_values,
            cumulative,
        },
    ))
}
