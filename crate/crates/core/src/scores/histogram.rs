use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 10_000;

/// Fixed-width histogram over `[lo, hi]`; the last bin is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("histogram needs at least one bin".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!("histogram range [{lo}, {hi}] is empty or not finite")));
        }
        Ok(Histogram {
            lo,
            hi,
            counts: vec![0; bins],
            total: 0,
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `bins + 1` strictly increasing edges.
    pub fn edges(&self) -> Vec<f64> {
        let b = self.bins();
        let width = self.hi - self.lo;
        (0..=b)
            .map(|i| if i == b { self.hi } else { self.lo + width * i as f64 / b as f64 })
            .collect()
    }

    pub fn bin_of(&self, v: f64) -> Option<usize> {
        if !(self.lo <= v && v <= self.hi) {
            return None;
        }
        let b = self.bins();
        let idx = ((v - self.lo) / (self.hi - self.lo) * b as f64).floor() as usize;
        Some(idx.min(b - 1))
    }

    /// Counts `v`; values outside the range are ignored and reported.
    pub fn add(&mut self, v: f64) -> bool {
        match self.bin_of(v) {
            Some(i) => {
                self.counts[i] += 1;
                self.total += 1;
                true
            }
            None => false,
        }
    }

    pub fn same_edges(&self, other: &Histogram) -> bool {
        self.lo.to_bits() == other.lo.to_bits()
            && self.hi.to_bits() == other.hi.to_bits()
            && self.bins() == other.bins()
    }

    /// Adds another histogram's counts; integer counts make merging order-free.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if !self.same_edges(other) {
            return Err(Error::IncompatibleHistogram("cannot merge histograms with different edges".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }

    pub fn normalize(&self) -> Result<Vec<f64>> {
        if self.total == 0 {
            return Err(Error::EmptyInput("cannot normalize an empty histogram".into()));
        }
        let t = self.total as f64;
        Ok(self.counts.iter().map(|&c| c as f64 / t).collect())
    }
}
