use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scores::quantile::{quantile_sorted, quantiles};

pub const INNER_K: f64 = 1.5;
pub const OUTER_K: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TukeyFences {
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub inner: (f64, f64),
    pub outer: (f64, f64),
}

impl TukeyFences {
    pub fn from_quartiles(q1: f64, q3: f64) -> Self {
        let iqr = q3 - q1;
        TukeyFences {
            q1,
            q3,
            iqr,
            inner: (q1 - INNER_K * iqr, q3 + INNER_K * iqr),
            outer: (q1 - OUTER_K * iqr, q3 + OUTER_K * iqr),
        }
    }

    pub fn from_sorted(sorted: &[f64]) -> Result<Self> {
        Ok(Self::from_quartiles(
            quantile_sorted(sorted, 0.25)?,
            quantile_sorted(sorted, 0.75)?,
        ))
    }

    /// Inside the closed inner-fence interval.
    pub fn keeps(&self, v: f64) -> bool {
        self.inner.0 <= v && v <= self.inner.1
    }
}

/// Drops values outside the closed inner fences.
pub fn tukey_filter(values: &[f64]) -> Result<(Vec<f64>, TukeyFences)> {
    let q = quantiles(values, &[0.25, 0.75])?;
    let fences = TukeyFences::from_quartiles(q[0], q[1]);
    let kept = values.iter().copied().filter(|v| fences.keeps(*v)).collect();
    Ok((kept, fences))
}
