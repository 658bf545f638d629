//! Vector autoregression fitted by per-equation least squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ols, Matrix};
use crate::synth::companion_spectral_radius;
use crate::timeseries::SeriesMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarModel {
    pub labels: Vec<String>,
    pub lag_order: usize,
    pub intercepts: Vec<f64>,
    /// `A_1..A_k`; `A_i[(r, c)]` is the effect of variable c at lag i on variable r.
    pub coeff_matrices: Vec<Matrix>,
    /// T_eff × m residuals.
    pub residuals: Matrix,
    /// Residual covariance `EᵀE / T_eff`.
    pub sigma: Matrix,
    pub aic: f64,
    pub t_effective: usize,
    /// The k observations preceding the estimation sample, oldest first.
    pub presample: Matrix,
}

impl VarModel {
    pub fn n_vars(&self) -> usize {
        self.intercepts.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        companion_spectral_radius(&self.coeff_matrices)
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Design matrix `[1, y_{t−1}, .., y_{t−k}]` for rows `first..T`, optionally
/// dropping the lags of one variable.
pub(crate) fn lagged_design(data: &Matrix, k: usize, first: usize, drop_var: Option<usize>) -> Matrix {
    let t = data.rows();
    let m = data.cols();
    let kept: Vec<usize> = (0..m).filter(|&v| Some(v) != drop_var).collect();
    let mut x = Matrix::zeros(t - first, 1 + kept.len() * k);
    for (r, row) in (first..t).enumerate() {
        x[(r, 0)] = 1.0;
        let mut c = 1;
        for lag in 1..=k {
            for &v in &kept {
                x[(r, c)] = data[(row - lag, v)];
                c += 1;
            }
        }
    }
    x
}

pub(crate) fn check_sample(t: usize, m: usize, k: usize, first: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::Precondition("VAR lag order must be ≥ 1".into()));
    }
    if first < k || first > t {
        return Err(Error::Precondition(format!(
            "estimation sample starts at row {first}, needs {k} ≤ start ≤ {t}"
        )));
    }
    let t_eff = t - first;
    if t_eff <= m * k + 1 {
        return Err(Error::Precondition(format!(
            "VAR({k}) with {m} variables needs more than {} usable rows, got {t_eff}",
            m * k + 1
        )));
    }
    Ok(t_eff)
}

fn fit_from(data: &Matrix, labels: &[String], k: usize, first: usize) -> Result<VarModel> {
    let m = data.cols();
    let t_eff = check_sample(data.rows(), m, k, first)?;
    if data.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("series contains non-finite values".into()));
    }
    let x = lagged_design(data, k, first, None);
    let mut y = Matrix::zeros(t_eff, m);
    for r in 0..t_eff {
        y.row_mut(r).copy_from_slice(data.row(first + r));
    }
    let fit = ols(&x, &y)?;
    let intercepts = (0..m).map(|eq| fit.coefficients[(0, eq)]).collect();
    let coeff_matrices = (0..k)
        .map(|lag| {
            let mut a = Matrix::zeros(m, m);
            for eq in 0..m {
                for v in 0..m {
                    a[(eq, v)] = fit.coefficients[(1 + lag * m + v, eq)];
                }
            }
            a
        })
        .collect();
    let sigma = fit.residuals.gram().scale(1.0 / t_eff as f64);
    let log_det = sigma.spd_log_det().map_err(|_| {
        Error::Degenerate("residual covariance is singular; a series may be an exact linear function of others".into())
    })?;
    let n_params = (m * m * k + m) as f64;
    let mut presample = Matrix::zeros(k, m);
    for r in 0..k {
        presample.row_mut(r).copy_from_slice(data.row(first - k + r));
    }
    Ok(VarModel {
        labels: labels.to_vec(),
        lag_order: k,
        intercepts,
        coeff_matrices,
        residuals: fit.residuals,
        sigma,
        aic: log_det + 2.0 * n_params / t_eff as f64,
        t_effective: t_eff,
        presample,
    })
}

/// Fits a VAR(k) with intercept on rows k..T.
pub fn fit_var(series: &SeriesMatrix, lag_order: usize) -> Result<VarModel> {
    fit_from(&series.data, &series.labels, lag_order, lag_order)
}

pub(crate) fn fit_var_matrix(data: &Matrix, labels: &[String], lag_order: usize) -> Result<VarModel> {
    fit_from(data, labels, lag_order, lag_order)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub selected: usize,
    /// `(k, aic)` for every candidate, all on the same sample.
    pub aic: Vec<(usize, f64)>,
    pub t_effective: usize,
}

/// Picks k in 1..=max_lag minimising AIC, every candidate fitted on rows
/// max_lag..T so the criteria are comparable. Ties go to the smaller k.
pub fn select_lag(series: &SeriesMatrix, max_lag: usize) -> Result<LagSelection> {
    if max_lag == 0 {
        return Err(Error::Precondition("max_lag must be ≥ 1".into()));
    }
    let mut aic = Vec::with_capacity(max_lag);
    let mut t_effective = 0;
    for k in 1..=max_lag {
        let model = fit_from(&series.data, &series.labels, k, max_lag)?;
        t_effective = model.t_effective;
        aic.push((k, model.aic));
    }
    let selected = aic
        .iter()
        .fold(
            (0usize, f64::INFINITY),
            |best, &(k, a)| if a < best.1 { (k, a) } else { best },
        )
        .0;
    Ok(LagSelection {
        selected,
        aic,
        t_effective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{simulate_var, VarSpec};

    fn two_var(t: usize, seed: u64) -> SeriesMatrix {
        simulate_var(&VarSpec {
            coeff_matrices: vec![Matrix::from_rows(&[vec![0.5, 0.2], vec![0.0, 0.3]])],
            intercepts: vec![1.0, -0.5],
            sigma: Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.5]]),
            t,
            seed,
            require_stationary: true,
        })
        .unwrap()
    }

    #[test]
    fn recovers_coefficients_on_long_sample() {
        let s = two_var(20_000, 4);
        let m = fit_var(&s, 1).unwrap();
        let truth = Matrix::from_rows(&[vec![0.5, 0.2], vec![0.0, 0.3]]);
        assert!(m.coeff_matrices[0].max_abs_diff(&truth) < 0.03);
        assert!((m.intercepts[0] - 1.0).abs() < 0.1);
        assert!((m.sigma[(0, 1)] - 0.3).abs() < 0.05);
        assert_eq!(m.t_effective, 19_999);
        assert!(m.is_stable());
    }

    #[test]
    fn too_few_rows_is_precondition_error() {
        let s = two_var(8, 1);
        assert!(matches!(fit_var(&s, 3), Err(Error::Precondition(_))));
        assert!(matches!(fit_var(&s, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn collinear_series_rejected() {
        let s = two_var(100, 2);
        let mut data = Matrix::zeros(100, 2);
        for i in 0..100 {
            data[(i, 0)] = s.data[(i, 0)];
            data[(i, 1)] = 2.0 * s.data[(i, 0)] + 1.0;
        }
        let collinear = SeriesMatrix::from_matrix(data, vec!["a".into(), "b".into()]);
        assert!(fit_var(&collinear, 1).is_err());
    }

    #[test]
    fn lag_selection_uses_common_sample() {
        let s = two_var(300, 5);
        let sel = select_lag(&s, 6).unwrap();
        assert_eq!(sel.aic.len(), 6);
        assert_eq!(sel.t_effective, 294);
        assert_eq!(sel.selected, 1);
    }
}
