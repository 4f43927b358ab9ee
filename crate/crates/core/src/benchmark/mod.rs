//! Random-forest baselines: featurization, fitting on the train table,
//! evaluation on the test table and wall-clock metering of the fit.

mod featurize;
mod forest;
mod matrix;
mod metrics;
mod tree;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use featurize::{bag_of_words, check_labels, molecule_aggregate, FeaturePlan, Featurized, Featurizer, Vocabulary};
pub use forest::{subsample, RFConfig, RandomForest, TaskKind};
pub use matrix::Matrix;
pub use metrics::{accuracy, r2};
pub use tree::{Node, Tree};

use crate::data_model::TableName;
use crate::error::{Error, Result};
use crate::storage::DatasetHandle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub dataset: String,
    pub featurizer: String,
    /// `r2` or `accuracy`.
    pub metric_name: String,
    pub metric: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub fit_seconds: f64,
    /// Fit time per 1,000 training rows.
    pub seconds_per_1000: f64,
    pub config: RFConfig,
}

pub const TABLE_HEADER: &str = "dataset | sample ratio | max depth | metric | time (s) | time per 1,000 (s)";

impl BenchmarkResult {
    pub fn table_row(&self) -> String {
        format!(
            "{} | {}% | {} | {} {:.4} | {:.3} | {:.4}",
            self.dataset,
            self.config.sample_ratio * 100.0,
            self.config.max_depth,
            self.metric_name,
            self.metric,
            self.fit_seconds,
            self.seconds_per_1000
        )
    }
}

pub fn evaluate(task: TaskKind, y: &Matrix, yhat: &Matrix) -> Result<(String, f64)> {
    match task {
        TaskKind::Regression => Ok(("r2".into(), r2(&y.data, &yhat.data)?)),
        TaskKind::Classification => Ok(("accuracy".into(), accuracy(&y.data, &yhat.data)?)),
    }
}

/// Fits and evaluates in memory; the fit is metered.
pub fn benchmark_matrices(
    dataset: &str,
    train: &Featurized,
    test: &Featurized,
    config: &RFConfig,
) -> Result<BenchmarkResult> {
    let start = Instant::now();
    let model = RandomForest::fit(&train.x, &train.y, config)?;
    let fit_seconds = start.elapsed().as_secs_f64();
    let yhat = model.predict(&test.x)?;
    let (metric_name, metric) = evaluate(config.task, &test.y, &yhat)?;
    Ok(BenchmarkResult {
        dataset: dataset.to_string(),
        featurizer: train.featurizer.clone(),
        metric_name,
        metric,
        train_rows: model.train_rows,
        test_rows: test.x.rows,
        fit_seconds,
        seconds_per_1000: fit_seconds / (model.train_rows as f64 / 1000.0),
        config: config.clone(),
    })
}

/// Featurizes the train and test tables, fits on train and scores on test.
pub fn run_benchmark(handle: &DatasetHandle, featurizer: Featurizer, config: &RFConfig) -> Result<BenchmarkResult> {
    config.validate()?;
    check_labels(handle)?;
    for t in [TableName::Train, TableName::Test] {
        if !handle.has_table(t) {
            return Err(Error::Config(format!("dataset `{}` has no {t} table", handle.schema().name)));
        }
    }
    let plan = FeaturePlan::fit(handle, featurizer)?;
    let train = plan.apply(handle, TableName::Train)?;
    let test = plan.apply(handle, TableName::Test)?;
    benchmark_matrices(&handle.schema().name, &train, &test, config)
}
