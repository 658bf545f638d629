//! Daily count series, smoothing and stationarity testing.

mod adf;
mod mackinnon;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DateWindow, PostRecord};
use crate::linalg::Matrix;

pub use self::adf::{adf_test, adf_test_with, AdfRegression, AdfReport};
pub use self::mackinnon::{critical_values, mackinnon_p_value, TABLE_VERSION as MACKINNON_TABLE_VERSION};

/// Gap-free daily values starting at `start_date`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub label: String,
    pub start_date: NaiveDate,
    pub values: Vec<f64>,
}

impl DailySeries {
    pub fn new(label: impl Into<String>, start_date: NaiveDate, values: Vec<f64>) -> Self {
        DailySeries {
            label: label.into(),
            start_date,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn date_at(&self, i: usize) -> NaiveDate {
        self.start_date + Duration::days(i as i64)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DailySeries {
        DailySeries {
            label: self.label.clone(),
            start_date: self.start_date,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }
}

/// Counts posts per calendar day (UTC) over the window; empty days are zero.
pub fn daily_counts<'a, I>(label: &str, posts: I, window: &DateWindow, include_retweets: bool) -> DailySeries
where
    I: IntoIterator<Item = &'a PostRecord>,
{
    let mut values = vec![0.0; window.len_days()];
    for p in posts {
        if !include_retweets && p.is_retweet {
            continue;
        }
        let d = p.date();
        if window.contains(d) {
            values[(d - window.start).num_days() as usize] += 1.0;
        }
    }
    DailySeries::new(label, window.start, values)
}

/// Trailing moving average; the first `window - 1` days average the available prefix.
pub fn rolling_mean(series: &DailySeries, window: usize) -> Result<DailySeries> {
    if window == 0 {
        return Err(Error::Precondition("rolling window must be at least 1".into()));
    }
    let v = &series.values;
    // Window sums are recomputed per day rather than updated incrementally, so a
    // constant series maps exactly onto itself.
    let out = (0..v.len())
        .map(|i| {
            let n = (i + 1).min(window);
            v[i + 1 - n..=i].iter().sum::<f64>() / n as f64
        })
        .collect();
    Ok(DailySeries::new(series.label.clone(), series.start_date, out))
}

/// `order`-th difference; the result starts `order` days later.
pub fn difference(series: &DailySeries, order: usize) -> Result<DailySeries> {
    if order == 0 {
        return Err(Error::Precondition("difference order must be at least 1".into()));
    }
    if series.len() <= order {
        return Err(Error::Precondition(format!(
            "series of length {} too short for order-{order} differencing",
            series.len()
        )));
    }
    let mut values = series.values.clone();
    for _ in 0..order {
        values = values.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(DailySeries::new(
        series.label.clone(),
        series.start_date + Duration::days(order as i64),
        values,
    ))
}

/// Inverse of first differencing: cumulative sum anchored at `first`.
pub fn undifference(diffs: &DailySeries, first: f64) -> DailySeries {
    let mut values = Vec::with_capacity(diffs.len() + 1);
    values.push(first);
    let mut acc = first;
    for d in &diffs.values {
        acc += d;
        values.push(acc);
    }
    DailySeries::new(diffs.label.clone(), diffs.start_date - Duration::days(1), values)
}

/// Date-aligned multivariate series, one column per label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMatrix {
    pub labels: Vec<String>,
    pub start_date: NaiveDate,
    pub data: Matrix,
}

impl SeriesMatrix {
    pub fn from_series(series: &[DailySeries]) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| Error::Precondition("no series given".into()))?;
        for s in series {
            if s.start_date != first.start_date || s.len() != first.len() {
                return Err(Error::Precondition(format!(
                    "series `{}` ({} from {}) not aligned with `{}` ({} from {})",
                    s.label,
                    s.len(),
                    s.start_date,
                    first.label,
                    first.len(),
                    first.start_date
                )));
            }
        }
        let t = first.len();
        let m = series.len();
        let mut data = Matrix::zeros(t, m);
        for (j, s) in series.iter().enumerate() {
            for (i, v) in s.values.iter().enumerate() {
                data[(i, j)] = *v;
            }
        }
        Ok(SeriesMatrix {
            labels: series.iter().map(|s| s.label.clone()).collect(),
            start_date: first.start_date,
            data,
        })
    }

    /// Matrix without calendar dates; rows are dated from 2000-01-01.
    pub fn from_matrix(data: Matrix, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), data.cols());
        SeriesMatrix {
            labels,
            start_date: NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(),
            data,
        }
    }

    pub fn len(&self) -> usize {
        self.data.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.rows() == 0
    }

    pub fn n_vars(&self) -> usize {
        self.data.cols()
    }

    pub fn column(&self, j: usize) -> DailySeries {
        DailySeries::new(self.labels[j].clone(), self.start_date, self.data.column(j))
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Columns reordered (and possibly subset) by index.
    pub fn select(&self, order: &[usize]) -> SeriesMatrix {
        let mut data = Matrix::zeros(self.len(), order.len());
        for i in 0..self.len() {
            for (j, &src) in order.iter().enumerate() {
                data[(i, j)] = self.data[(i, src)];
            }
        }
        SeriesMatrix {
            labels: order.iter().map(|&j| self.labels[j].clone()).collect(),
            start_date: self.start_date,
            data,
        }
    }
}

/// Long-format `date,label,count` CSV.
pub fn series_to_csv(series: &[DailySeries]) -> String {
    let mut out = String::from("date,label,count\n");
    for s in series {
        for (i, v) in s.values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", s.date_at(i), s.label, v));
        }
    }
    out
}

pub fn series_from_csv(text: &str) -> Result<Vec<DailySeries>> {
    let mut out: Vec<DailySeries> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let ctx = || format!("series csv line {}", i + 1);
        let mut f = line.splitn(3, ',');
        let (Some(d), Some(label), Some(count)) = (f.next(), f.next(), f.next()) else {
            return Err(Error::format(ctx(), "expected date,label,count"));
        };
        let date: NaiveDate = d.parse().map_err(|e| Error::format(ctx(), e))?;
        let value: f64 = count.parse().map_err(|e| Error::format(ctx(), e))?;
        match out.iter_mut().find(|s| s.label == label) {
            Some(s) => {
                if date != s.date_at(s.len()) {
                    return Err(Error::format(ctx(), format!("gap or disorder at {date}")));
                }
                s.values.push(value);
            }
            None => out.push(DailySeries::new(label, date, vec![value])),
        }
    }
    Ok(out)
}
