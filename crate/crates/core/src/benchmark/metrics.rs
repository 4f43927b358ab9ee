use crate::error::{Error, Result};

fn check_shapes(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::Shape {
            sub_feature: "labels".into(),
            message: format!("{} true values, {} predictions", y.len(), yhat.len()),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput("no labels to evaluate".into()));
    }
    Ok(())
}

/// Coefficient of determination over all entries of a (flattened) label
/// matrix, against the global label mean.
pub fn r2(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_shapes(y, yhat)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedVariance);
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Share of exact matches.
pub fn accuracy(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_shapes(y, yhat)?;
    let hits = y.iter().zip(yhat).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y.len() as f64)
}
