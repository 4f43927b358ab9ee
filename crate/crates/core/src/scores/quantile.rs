use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Linear-interpolation quantiles at position `q * (n - 1)` of the sorted
/// values.
pub fn quantiles(values: &[f64], qs: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("quantiles of an empty column".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidValue {
            column: "<input>".into(),
            message: "NaN present".into(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    qs.iter().map(|&q| quantile_sorted(&sorted, q)).collect()
}

/// Quantile of already sorted, NaN-free values.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput("quantiles of an empty column".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("quantile level {q} outside [0, 1]")));
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        return Ok(sorted[lo.min(sorted.len() - 1)]);
    }
    Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
}

/// Column sample for quantile estimation: every value while at most `cap`
/// have been seen, a uniform reservoir sample of `cap` values afterwards.
#[derive(Debug, Clone)]
pub struct QuantileSketch {
    buf: Vec<f64>,
    seen: u64,
    cap: usize,
    rng: ChaCha8Rng,
    min: f64,
    max: f64,
}

/// Sorted sample extracted from a [`QuantileSketch`].
#[derive(Debug, Clone)]
pub struct SortedSample {
    pub values: Vec<f64>,
    /// Number of values pushed into the sketch.
    pub seen: u64,
    /// True when `values` holds every pushed value.
    pub exact: bool,
    pub min: f64,
    pub max: f64,
}

impl QuantileSketch {
    pub fn new(cap: usize, rng: ChaCha8Rng) -> Self {
        QuantileSketch {
            buf: Vec::new(),
            seen: 0,
            cap: cap.max(1),
            rng,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    pub fn push(&mut self, v: f64) {
        self.seen += 1;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        if self.buf.len() < self.cap {
            self.buf.push(v);
        } else {
            let j = self.rng.gen_range(0..self.seen);
            if (j as usize) < self.cap {
                self.buf[j as usize] = v;
            }
        }
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn finish(self) -> SortedSample {
        let mut values = self.buf;
        values.sort_unstable_by(f64::total_cmp);
        SortedSample {
            exact: self.seen as usize == values.len(),
            values,
            seen: self.seen,
            min: self.min,
            max: self.max,
        }
    }
}
