use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::matrix::Matrix;
use crate::benchmark::tree::{argmax, Targets, Tree, TreeParams};
use crate::error::{Error, Result};
use crate::util::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Multi-output regression, scored with R2.
    #[default]
    Regression,
    /// Single-label classification, scored with accuracy.
    Classification,
}

impl TaskKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "regression" => Some(TaskKind::Regression),
            "classification" => Some(TaskKind::Classification),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RFConfig {
    pub trees: usize,
    pub max_depth: usize,
    /// Share of training rows used, drawn without replacement.
    pub sample_ratio: f64,
    pub task: TaskKind,
    pub seed: u64,
    pub bootstrap: bool,
    /// Features tried per node; D/3 for regression and sqrt(D) for
    /// classification when unset.
    pub max_features: Option<usize>,
}

impl Default for RFConfig {
    fn default() -> Self {
        RFConfig {
            trees: 128,
            max_depth: 20,
            sample_ratio: 1.0,
            task: TaskKind::Regression,
            seed: 0,
            bootstrap: true,
            max_features: None,
        }
    }
}

impl RFConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 {
            return Err(Error::Config("tree count must be at least 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::Config("max depth must be at least 1".into()));
        }
        if !(self.sample_ratio > 0.0 && self.sample_ratio <= 1.0) {
            return Err(Error::Config(format!("sample ratio {} is outside (0, 1]", self.sample_ratio)));
        }
        if self.max_features == Some(0) {
            return Err(Error::Config("max features must be at least 1".into()));
        }
        Ok(())
    }

    pub fn features_per_node(&self, d: usize) -> usize {
        let default = match self.task {
            TaskKind::Regression => d / 3,
            TaskKind::Classification => (d as f64).sqrt().floor() as usize,
        };
        self.max_features.unwrap_or(default).clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub task: TaskKind,
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub n_outputs: usize,
    /// Class values by class id (classification only).
    pub classes: Vec<f64>,
    /// Training rows after subsampling.
    pub train_rows: usize,
}

/// Rows kept for a sample ratio: a seeded subset of `round(ratio * n)` rows
/// in original order.
pub fn subsample(n: usize, ratio: f64, seed: u64) -> Vec<usize> {
    let m = ((ratio * n as f64).round() as usize).min(n);
    if m == n {
        return (0..n).collect();
    }
    let mut idx = sample(&mut rng(seed, 0x5a_0001), n, m).into_vec();
    idx.sort_unstable();
    idx
}

impl RandomForest {
    pub fn fit(x: &Matrix, y: &Matrix, config: &RFConfig) -> Result<RandomForest> {
        config.validate()?;
        if x.rows != y.rows {
            return Err(Error::Shape {
                sub_feature: "labels".into(),
                message: format!("{} feature rows, {} label rows", x.rows, y.rows),
            });
        }
        if x.cols == 0 || y.cols == 0 {
            return Err(Error::EmptyInput("no feature or label columns".into()));
        }
        if let Some(bad) = x.data.iter().chain(&y.data).find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue {
                column: "training data".into(),
                message: format!("non-finite value {bad}"),
            });
        }
        let rows = subsample(x.rows, config.sample_ratio, config.seed);
        if rows.len() < 2 {
            return Err(Error::EmptyInput(format!(
                "{} training rows after subsampling, at least 2 required",
                rows.len()
            )));
        }
        let x = x.select_rows(&rows);
        let y = y.select_rows(&rows);

        let (classes, ids) = match config.task {
            TaskKind::Regression => (Vec::new(), Vec::new()),
            TaskKind::Classification => {
                if y.cols != 1 {
                    return Err(Error::UnsupportedTask(format!(
                        "classification needs a single label column, found {}",
                        y.cols
                    )));
                }
                let mut classes = y.data.clone();
                classes.sort_by(f64::total_cmp);
                classes.dedup_by(|a, b| a.to_bits() == b.to_bits());
                let ids = y
                    .data
                    .iter()
                    .map(|v| classes.binary_search_by(|c| c.total_cmp(v)).expect("known class"))
                    .collect();
                (classes, ids)
            }
        };
        let targets = match config.task {
            TaskKind::Regression => Targets::Regression(&y),
            TaskKind::Classification => Targets::Classes {
                ids: &ids,
                count: classes.len(),
            },
        };
        let params = TreeParams {
            max_depth: config.max_depth,
            max_features: config.features_per_node(x.cols),
        };
        let n = x.rows;
        let trees = (0..config.trees)
            .into_par_iter()
            .map(|t| {
                let mut r = rng(config.seed, 0x7e_0000 + t as u64);
                let idx: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| r.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let seed: u64 = r.gen();
                Tree::fit(&x, targets, idx, params, seed)
            })
            .collect();
        Ok(RandomForest {
            task: config.task,
            trees,
            n_features: x.cols,
            n_outputs: y.cols,
            classes,
            train_rows: n,
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> Vec<f64> {
        match self.task {
            TaskKind::Regression => {
                let mut acc = vec![0.0; self.n_outputs];
                for t in &self.trees {
                    acc.iter_mut().zip(t.leaf(row)).for_each(|(a, v)| *a += v);
                }
                acc.iter_mut().for_each(|a| *a /= self.trees.len() as f64);
                acc
            }
            TaskKind::Classification => {
                let mut votes = vec![0.0; self.classes.len()];
                for t in &self.trees {
                    votes[argmax(t.leaf(row))] += 1.0;
                }
                vec![self.classes[argmax(&votes)]]
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols != self.n_features {
            return Err(Error::Shape {
                sub_feature: "features".into(),
                message: format!("{} feature columns, model expects {}", x.cols, self.n_features),
            });
        }
        let rows: Vec<Vec<f64>> = (0..x.rows).into_par_iter().map(|i| self.predict_row(x.row(i))).collect();
        let mut data = Vec::with_capacity(x.rows * self.n_outputs);
        rows.into_iter().for_each(|r| data.extend(r));
        Matrix::new(x.rows, self.n_outputs, data)
    }
}
