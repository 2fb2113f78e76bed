//! Least-squares fit of `ln|cov|` against `L`.

use serde::Serialize;
use thiserror::Error;

use crate::decay::DecayRow;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("only {0} rows have nonzero covariance, need 3")]
    Degenerate(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentialFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Row indices left out because their covariance was zero.
    pub excluded: Vec<usize>,
}

pub fn fit_exponential(rows: &[DecayRow]) -> Result<ExponentialFit, FitError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let a = r.cov.abs();
        if a > 0.0 && a.is_finite() {
            xs.push(r.l as f64);
            ys.push(a.ln());
        } else {
            excluded.push(i);
        }
    }
    let n = xs.len();
    if n < 3 {
        return Err(FitError::Degenerate(n));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(FitError::Degenerate(1));
    }
    let rate = sxy / sxx;
    let intercept = my - rate * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ExponentialFit { rate, intercept, r_squared, excluded })
}
