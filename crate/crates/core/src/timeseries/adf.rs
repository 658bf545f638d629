//! Augmented Dickey–Fuller unit-root test.

use serde::{Deserialize, Serialize};

use super::mackinnon::{critical_values, mackinnon_p_value};
use super::DailySeries;
use crate::error::{Error, Result};
use crate::linalg::{ols, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfRegression {
    #[default]
    Constant,
    ConstantTrend,
}

pub const SIGNIFICANCE_LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfReport {
    pub test_statistic: f64,
    pub p_value: f64,
    /// Critical values at 1%, 5% and 10%.
    pub critical_values: [f64; 3],
    pub n_lags_used: usize,
    pub n_obs: usize,
    pub regression: AdfRegression,
    /// Strictest level in {1%, 5%, 10%} at which the unit root is rejected.
    pub stationary_at: Option<f64>,
}

impl AdfReport {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.stationary_at.is_some_and(|l| l <= level)
    }
}

struct AdfFit {
    stat: f64,
    aic: f64,
    nobs: usize,
}

/// Regression of Δy_t on [1, (t), y_{t−1}, Δy_{t−1..t−lags}] over rows t ≥ first.
fn fit(y: &[f64], lags: usize, first: usize, regression: AdfRegression) -> Result<AdfFit> {
    let n = y.len();
    let rows = n - first;
    let trend = regression == AdfRegression::ConstantTrend;
    let p = 2 + usize::from(trend) + lags;
    let mut x = Matrix::zeros(rows, p);
    let mut dy = Matrix::zeros(rows, 1);
    for (r, t) in (first..n).enumerate() {
        dy[(r, 0)] = y[t] - y[t - 1];
        let mut c = 0;
        x[(r, c)] = 1.0;
        c += 1;
        if trend {
            x[(r, c)] = t as f64;
            c += 1;
        }
        let level_col = c;
        x[(r, level_col)] = y[t - 1];
        c += 1;
        for i in 1..=lags {
            x[(r, c)] = y[t - i] - y[t - i - 1];
            c += 1;
        }
    }
    let level_col = 1 + usize::from(trend);
    let f = ols(&x, &dy)?;
    let rss = f.rss[0];
    if rss <= 0.0 {
        return Err(Error::Degenerate("ADF regression fits exactly".into()));
    }
    let sigma2 = rss / (rows - p) as f64;
    let se = (sigma2 * f.xtx_inverse[(level_col, level_col)]).sqrt();
    Ok(AdfFit {
        stat: f.coefficients[(level_col, 0)] / se,
        aic: rows as f64 * (rss / rows as f64).ln() + 2.0 * p as f64,
        nobs: rows,
    })
}

/// ADF test with constant-only regression and AIC lag selection up to `max_lag`.
pub fn adf_test(series: &DailySeries, max_lag: usize) -> Result<AdfReport> {
    adf_test_with(&series.values, max_lag, AdfRegression::Constant)
}

/// Lag order is chosen by AIC with every candidate fitted on the common sample;
/// the chosen order is then refitted on all usable rows.
pub fn adf_test_with(y: &[f64], max_lag: usize, regression: AdfRegression) -> Result<AdfReport> {
    if y.len() < max_lag + 10 {
        return Err(Error::Precondition(format!(
            "ADF needs at least max_lag + 10 = {} observations, got {}",
            max_lag + 10,
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("series contains non-finite values".into()));
    }
    let common_first = max_lag + 1;
    let mut best = (f64::INFINITY, 0usize);
    for lags in 0..=max_lag {
        let f = fit(y, lags, common_first, regression)?;
        if f.aic < best.0 {
            best = (f.aic, lags);
        }
    }
    let lags = best.1;
    let f = fit(y, lags, lags + 1, regression)?;
    let crit = critical_values(f.nobs, regression);
    let stationary_at = SIGNIFICANCE_LEVELS
        .iter()
        .zip(crit)
        .find(|(_, cv)| f.stat < *cv)
        .map(|(level, _)| *level);
    Ok(AdfReport {
        test_statistic: f.stat,
        p_value: mackinnon_p_value(f.stat, regression),
        critical_values: crit,
        n_lags_used: lags,
        n_obs: f.nobs,
        regression,
        stationary_at,
    })
}
