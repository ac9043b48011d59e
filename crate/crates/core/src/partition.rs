//! Triangular membership functions forming a Ruspini (unity) partition of `[0, 1]`.
//!
//! A partition with `h` centers `0 = c_0 < c_1 < ... < c_{h-1} = 1` defines `h`
//! triangles. Any input activates at most two neighbouring triangles and their
//! grades always sum to one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bank of membership functions for one scalar input channel.
///
/// Only triangular partitions are provided; other families plug in here.
pub trait MembershipBank {
    /// Number of membership functions in the bank.
    fn len(&self) -> usize;

    /// Writes the membership grades of `x` into `out` (length [`len`](Self::len)).
    fn evaluate_into(&self, x: f64, out: &mut [f64]);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TriangularPartition {
    centers: Vec<f64>,
}

impl TriangularPartition {
    /// Builds a partition from explicit centers.
    ///
    /// Centers must be strictly increasing, start at 0 and end at 1.
    pub fn new(centers: Vec<f64>) -> Result<Self> {
        if centers.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a partition needs at least 2 centers, got {}",
                centers.len()
            )));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("partition centers"));
        }
        if centers[0] != 0.0 || centers[centers.len() - 1] != 1.0 {
            return Err(Error::InvalidArgument(
                "partition centers must start at 0 and end at 1".into(),
            ));
        }
        if centers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "partition centers must be strictly increasing".into(),
            ));
        }
        Ok(Self { centers })
    }

    /// Evenly spaced centers `l / (h - 1)`.
    pub fn uniform(h: usize) -> Result<Self> {
        if h < 2 {
            return Err(Error::InvalidArgument(format!(
                "uniform partition needs h >= 2, got {h}"
            )));
        }
        let last = (h - 1) as f64;
        let mut centers: Vec<f64> = (0..h).map(|l| l as f64 / last).collect();
        centers[h - 1] = 1.0;
        Ok(Self { centers })
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Membership grades of `x`; inputs outside `[0, 1]` are clamped first.
    pub fn evaluate(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.centers.len()];
        self.evaluate_into(x, &mut out);
        out
    }

    /// Index `l` of the active interval `(c_{l-1}, c_l]`, or 0 when `x == 0`.
    fn upper_index(&self, x: f64) -> usize {
        self.centers.partition_point(|&c| c < x)
    }
}

impl MembershipBank for TriangularPartition {
    fn len(&self) -> usize {
        self.centers.len()
    }

    fn evaluate_into(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.centers.len());
        out.fill(0.0);
        let x = x.clamp(0.0, 1.0);
        let l = self.upper_index(x);
        if l == 0 {
            out[0] = 1.0;
            return;
        }
        let lo = self.centers[l - 1];
        let hi = self.centers[l];
        let t = (x - lo) / (hi - lo);
        out[l] = t;
        out[l - 1] = 1.0 - t;
    }
}

impl TryFrom<Vec<f64>> for TriangularPartition {
    type Error = Error;

    fn try_from(centers: Vec<f64>) -> Result<Self> {
        Self::new(centers)
    }
}

impl From<TriangularPartition> for Vec<f64> {
    fn from(p: TriangularPartition) -> Self {
        p.centers
    }
}
