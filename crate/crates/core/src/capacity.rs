//! Over-parameterization thresholds of a dataset: the interpolation threshold
//! `ipt = s_tr * n * D_y` and the smooth function threshold `sft = ipt * D_x`.

use serde::{Deserialize, Serialize};

use crate::data_model::{DatasetSchema, Dimension, SplitShares};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDims {
    pub name: String,
    pub n: u64,
    pub shares: SplitShares,
    pub d_x: Dimension,
    pub d_y: Dimension,
}

impl DatasetDims {
    pub fn new(name: impl Into<String>, n: u64, shares: SplitShares, d_x: Dimension, d_y: Dimension) -> Result<Self> {
        let dims = DatasetDims {
            name: name.into(),
            n,
            shares,
            d_x,
            d_y,
        };
        dims.validate()?;
        Ok(dims)
    }

    /// Dimensions declared by a schema, with `n` supplied by the caller.
    pub fn from_schema(schema: &DatasetSchema, n: u64) -> Result<Self> {
        let dim = |min: usize, max: usize| {
            if min == max {
                Dimension::Fixed(max)
            } else {
                Dimension::Range { min, max }
            }
        };
        Self::new(
            schema.name.clone(),
            n,
            schema.shares,
            dim(schema.feature_dim_min(), schema.feature_dim_max()),
            dim(schema.label_dim_min(), schema.label_dim_max()),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        let s = self.shares;
        if [s.train, s.val, s.test].iter().any(|v| !(0.0..=1.0).contains(v)) || (s.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("split shares sum to {}", s.sum())));
        }
        for (what, d) in [("D_x", self.d_x), ("D_y", self.d_y)] {
            if d.min() == 0 || d.min() > d.max() {
                return Err(Error::Domain(format!("{what} = {d} is not a positive dimension")));
            }
        }
        Ok(())
    }
}

/// Effective dimensions replacing the max-dimension rule, e.g. to match a
/// published table that used a different reduction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DimOverride {
    pub d_x: Option<f64>,
    pub d_y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub dims: DatasetDims,
    pub ipt: u64,
    pub sft: u64,
    pub ipt_display: String,
    pub sft_display: String,
}

impl CapacityReport {
    /// One row in the layout `dataset | n | shares | D_x | D_y | ipt | sft`.
    pub fn table_row(&self) -> String {
        let s = self.dims.shares;
        let pct = |v: f64| format!("{:02}", (v * 100.0).round() as u64);
        format!(
            "{} | {} | {}/{}/{} % | {} | {} | {} | {}",
            self.dims.name,
            group_thousands(self.dims.n),
            pct(s.train),
            pct(s.val),
            pct(s.test),
            dim_display(self.dims.d_x),
            dim_display(self.dims.d_y),
            self.ipt_display,
            self.sft_display
        )
    }
}

pub const TABLE_HEADER: &str = "dataset | n | s_tr/s_va/s_te | D_x | D_y | ipt | sft";

fn dim_display(d: Dimension) -> String {
    match d {
        Dimension::Fixed(v) => group_thousands(v as u64),
        Dimension::Range { min, max } => format!("{}-{}", group_thousands(min as u64), group_thousands(max as u64)),
    }
}

fn group_thousands(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// `round(s_tr * n * D_y)` with the largest label dimension.
pub fn interpolation_threshold(dims: &DatasetDims) -> u64 {
    ipt_with(dims, dims.d_y.max() as f64)
}

/// `ipt * D_x` with the largest feature dimension.
pub fn smooth_function_threshold(dims: &DatasetDims) -> u64 {
    interpolation_threshold(dims) * dims.d_x.max() as u64
}

fn ipt_with(dims: &DatasetDims, d_y: f64) -> u64 {
    (dims.shares.train * dims.n as f64 * d_y).round() as u64
}

pub fn capacity(dims: &DatasetDims) -> Result<CapacityReport> {
    capacity_with(dims, DimOverride::default())
}

pub fn capacity_with(dims: &DatasetDims, over: DimOverride) -> Result<CapacityReport> {
    dims.validate()?;
    for v in [over.d_x, over.d_y].into_iter().flatten() {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("dimension override {v} must be positive")));
        }
    }
    let ipt = ipt_with(dims, over.d_y.unwrap_or(dims.d_y.max() as f64));
    let sft = match over.d_x {
        None => ipt * dims.d_x.max() as u64,
        Some(d_x) => (ipt as f64 * d_x).round() as u64,
    };
    Ok(CapacityReport {
        dims: dims.clone(),
        ipt,
        sft,
        ipt_display: format_magnitude(ipt),
        sft_display: format_magnitude(sft),
    })
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let p = 10f64.powi(decimals);
    (v * p).round() / p
}

fn trim(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Compact rendering with M/B/T suffixes.
///
/// Below 1,000 the plain integer is printed. Below one million the value is
/// given in M with two decimals, or one significant digit if that rounds to
/// zero. Otherwise the unit is chosen so the mantissa lies in [1, 1000); it
/// gets two significant digits below 10, else three, reduced to two when
/// that moves the value by less than 0.25%.
pub fn format_magnitude(count: u64) -> String {
    if count < 1000 {
        return count.to_string();
    }
    let x = count as f64;
    if count < 1_000_000 {
        let v = x / 1e6;
        let two = round_to(v, 2);
        if two > 0.0 {
            return format!("{}M", trim(two, 2));
        }
        let decimals = -(v.log10().floor() as i32);
        return format!("{}M", trim(round_to(v, decimals), decimals as usize));
    }
    const UNITS: [(f64, &str); 3] = [(1e6, "M"), (1e9, "B"), (1e12, "T")];
    let mut u = 0;
    while u + 1 < UNITS.len() && x >= UNITS[u + 1].0 {
        u += 1;
    }
    loop {
        let v = x / UNITS[u].0;
        let (rounded, decimals) = if v < 10.0 {
            (round_to(v, 1), 1)
        } else {
            let d3 = 2 - v.log10().floor() as i32;
            let d2 = d3 - 1;
            let (r3, r2) = (round_to(v, d3), round_to(v, d2));
            if (r2 - v).abs() < 0.0025 * v {
                (r2, d2.max(0))
            } else {
                (r3, d3.max(0))
            }
        };
        if rounded >= 1000.0 && u + 1 < UNITS.len() {
            u += 1;
            continue;
        }
        return format!("{}{}", trim(rounded, decimals as usize), UNITS[u].1);
    }
}

/// Dataset dimensions of the fixed-length rows of the reference overview table.
pub fn reference_presets() -> Vec<DatasetDims> {
    let row = |name: &str, n: u64, tr: f64, va: f64, te: f64, d_x: usize, d_y: usize| DatasetDims {
        name: name.into(),
        n,
        shares: SplitShares::new(tr, va, te),
        d_x: Dimension::Fixed(d_x),
        d_y: Dimension::Fixed(d_y),
    };
    vec![
        row("buildings-92", 3_206_016, 0.56, 0.09, 0.35, 521, 96),
        row("buildings-451", 15_716_448, 0.56, 0.09, 0.35, 521, 96),
        row("days-245", 3_517_359, 0.35, 0.13, 0.52, 4610, 288),
        row("days-177", 2_583_966, 0.34, 0.13, 0.53, 4610, 288),
        row("cities-10", 1_037_785_339, 0.23, 0.17, 0.60, 11, 4),
        row("cities-20", 3_266_646_911, 0.35, 0.14, 0.51, 11, 4),
        row("cities-43", 7_351_030_412, 0.34, 0.14, 0.52, 11, 4),
        row("pristine-sky", 11_452_416, 0.51, 0.12, 0.37, 970, 298),
        row("clear-sky", 11_485_184, 0.51, 0.11, 0.38, 2487, 298),
    ]
}

pub fn preset(name: &str) -> Option<DatasetDims> {
    reference_presets().into_iter().find(|d| d.name == name)
}
