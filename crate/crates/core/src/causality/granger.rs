//! Granger causality by nested least-squares F tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::var::{check_sample, lagged_design};
use crate::error::{Error, Result};
use crate::linalg::{ols, Matrix};
use crate::timeseries::SeriesMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerReport {
    pub cause: String,
    pub effect: String,
    pub lag_order: usize,
    pub f_statistic: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub p_value: f64,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
}

impl GrangerReport {
    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

fn column_index(series: &SeriesMatrix, label: &str) -> Result<usize> {
    series
        .index_of(label)
        .ok_or_else(|| Error::Precondition(format!("no series labeled `{label}` (have {:?})", series.labels)))
}

/// Tests whether lags of `cause` improve the VAR(k) equation for `effect`,
/// both fitted on rows k..T.
pub fn granger_test(series: &SeriesMatrix, lag_order: usize, cause: &str, effect: &str) -> Result<GrangerReport> {
    let ci = column_index(series, cause)?;
    let ei = column_index(series, effect)?;
    if ci == ei {
        return Err(Error::Precondition("cause and effect must differ".into()));
    }
    let data = &series.data;
    let m = data.cols();
    let k = lag_order;
    let t_eff = check_sample(data.rows(), m, k, k)?;
    let mut y = Matrix::zeros(t_eff, 1);
    for r in 0..t_eff {
        y[(r, 0)] = data[(k + r, ei)];
    }
    let full = ols(&lagged_design(data, k, k, None), &y)?;
    let restricted = ols(&lagged_design(data, k, k, Some(ci)), &y)?;
    let rss_u = full.rss[0];
    let rss_r = restricted.rss[0];
    if !(rss_u > 0.0) {
        return Err(Error::Degenerate(format!(
            "`{effect}` is fitted exactly; F statistic undefined"
        )));
    }
    let df_den = t_eff - m * k - 1;
    let f = ((rss_r - rss_u).max(0.0) / k as f64) / (rss_u / df_den as f64);
    let dist =
        FisherSnedecor::new(k as f64, df_den as f64).map_err(|e| Error::Degenerate(format!("F distribution: {e}")))?;
    Ok(GrangerReport {
        cause: cause.to_string(),
        effect: effect.to_string(),
        lag_order: k,
        f_statistic: f,
        df_num: k,
        df_den,
        p_value: dist.sf(f),
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
    })
}

/// Both directions for every ordered pair of series.
pub fn granger_all_pairs(series: &SeriesMatrix, lag_order: usize) -> Result<Vec<GrangerReport>> {
    let mut out = Vec::new();
    for cause in &series.labels {
        for effect in &series.labels {
            if cause != effect {
                out.push(granger_test(series, lag_order, cause, effect)?);
            }
        }
    }
    Ok(out)
}

pub fn granger_to_csv(reports: &[GrangerReport]) -> String {
    let mut s = String::from("cause,effect,lag_order,f_statistic,df_num,df_den,p_value\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.cause, r.effect, r.lag_order, r.f_statistic, r.df_num, r.df_den, r.p_value
        ));
    }
    s
}
