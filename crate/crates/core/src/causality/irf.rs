//! Impulse responses with bootstrap bands, and forecast-error variance
//! decomposition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::var::{fit_var_matrix, VarModel};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, Matrix};
use crate::rng::indexed_substream;
use crate::synth::simulate_path;

/// MA(∞) coefficients `Ψ_0 = I`, `Ψ_h = Σ_{i=1..min(h,k)} Ψ_{h−i} A_i`, for h = 0..=horizon.
pub fn ma_coefficients(model: &VarModel, horizon: usize) -> Vec<Matrix> {
    let m = model.n_vars();
    let mut psi = vec![Matrix::identity(m)];
    for h in 1..=horizon {
        let mut acc = Matrix::zeros(m, m);
        for (i, a) in model.coeff_matrices.iter().enumerate().take(h) {
            acc = acc.add(&psi[h - 1 - i].matmul(a));
        }
        psi.push(acc);
    }
    psi
}

/// `Θ_h = Ψ_h P` with `P` the lower Cholesky factor of Σ; series order sets the
/// identification, earlier series are not moved contemporaneously by later ones.
pub fn orthogonalized_responses(model: &VarModel, horizon: usize) -> Result<Vec<Matrix>> {
    let p = cholesky(&model.sigma)?;
    Ok(ma_coefficients(model, horizon)
        .iter()
        .map(|psi| psi.matmul(&p))
        .collect())
}

fn responses(model: &VarModel, horizon: usize, orthogonalized: bool) -> Result<Vec<Matrix>> {
    if orthogonalized {
        orthogonalized_responses(model, horizon)
    } else {
        Ok(ma_coefficients(model, horizon))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrfOptions {
    pub horizon: usize,
    pub n_boot: usize,
    pub seed: u64,
    pub orthogonalized: bool,
    /// Two-sided band coverage.
    pub coverage: f64,
}

impl Default for IrfOptions {
    fn default() -> Self {
        IrfOptions {
            horizon: 14,
            n_boot: 1000,
            seed: 0,
            orthogonalized: true,
            coverage: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfResult {
    pub labels: Vec<String>,
    pub horizon: usize,
    pub orthogonalized: bool,
    /// `responses[h][(response, impulse)]` for h = 0..=horizon.
    pub responses: Vec<Matrix>,
    pub lower: Option<Vec<Matrix>>,
    pub upper: Option<Vec<Matrix>>,
    pub n_boot: usize,
    /// Bootstrap replicates whose refit failed and were left out of the bands.
    pub failed_draws: usize,
}

impl IrfResult {
    pub fn response(&self, step: usize, response: usize, impulse: usize) -> f64 {
        self.responses[step][(response, impulse)]
    }

    pub fn to_csv(&self) -> String {
        response_csv(
            &self.labels,
            &self.responses,
            self.lower.as_deref(),
            self.upper.as_deref(),
            0,
        )
    }
}

fn response_csv(
    labels: &[String],
    values: &[Matrix],
    lower: Option<&[Matrix]>,
    upper: Option<&[Matrix]>,
    step0: usize,
) -> String {
    let mut s = String::from("step,response,impulse,value,lower,upper\n");
    let fmt =
        |b: Option<&[Matrix]>, h: usize, r: usize, i: usize| b.map(|b| b[h][(r, i)].to_string()).unwrap_or_default();
    for (h, mat) in values.iter().enumerate() {
        for r in 0..labels.len() {
            for i in 0..labels.len() {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    h + step0,
                    labels[r],
                    labels[i],
                    mat[(r, i)],
                    fmt(lower, h, r, i),
                    fmt(upper, h, r, i)
                ));
            }
        }
    }
    s
}

/// Linear-interpolated quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// One parametric bootstrap replicate: simulate from the fitted model with
/// Gaussian innovations, refit at the same lag order, recompute responses.
fn bootstrap_draw(model: &VarModel, chol: &Matrix, opts: &IrfOptions, index: usize) -> Option<Vec<Matrix>> {
    let mut rng = indexed_substream(opts.seed, "irf-bootstrap", index as u64);
    let k = model.lag_order;
    let m = model.n_vars();
    let sim = simulate_path(
        &model.coeff_matrices,
        &model.intercepts,
        chol,
        &model.presample,
        model.t_effective,
        &mut rng,
    );
    let mut data = Matrix::zeros(k + model.t_effective, m);
    for r in 0..k {
        data.row_mut(r).copy_from_slice(model.presample.row(r));
    }
    for r in 0..model.t_effective {
        data.row_mut(k + r).copy_from_slice(sim.row(r));
    }
    let refit = fit_var_matrix(&data, &model.labels, k).ok()?;
    responses(&refit, opts.horizon, opts.orthogonalized).ok()
}

/// Impulse responses over `0..=horizon` with percentile bootstrap bands.
/// Bands are widened where needed so they always contain the point estimate.
pub fn irf_with(model: &VarModel, opts: &IrfOptions) -> Result<IrfResult> {
    if !(opts.coverage > 0.0 && opts.coverage < 1.0) {
        return Err(Error::Precondition(format!(
            "band coverage {} not in (0, 1)",
            opts.coverage
        )));
    }
    let point = responses(model, opts.horizon, opts.orthogonalized)?;
    let mut result = IrfResult {
        labels: model.labels.clone(),
        horizon: opts.horizon,
        orthogonalized: opts.orthogonalized,
        responses: point.clone(),
        lower: None,
        upper: None,
        n_boot: opts.n_boot,
        failed_draws: 0,
    };
    if opts.n_boot == 0 {
        return Ok(result);
    }
    let chol = cholesky(&model.sigma)?;
    let draws: Vec<Option<Vec<Matrix>>> = (0..opts.n_boot)
        .into_par_iter()
        .map(|b| bootstrap_draw(model, &chol, opts, b))
        .collect();
    let ok: Vec<&Vec<Matrix>> = draws.iter().flatten().collect();
    result.failed_draws = opts.n_boot - ok.len();
    if ok.len() < 2 {
        return Err(Error::Degenerate(format!(
            "only {} of {} bootstrap refits succeeded",
            ok.len(),
            opts.n_boot
        )));
    }
    let m = model.n_vars();
    let tail = (1.0 - opts.coverage) / 2.0;
    let mut lower = vec![Matrix::zeros(m, m); opts.horizon + 1];
    let mut upper = lower.clone();
    let mut cell = Vec::with_capacity(ok.len());
    for h in 0..=opts.horizon {
        for r in 0..m {
            for i in 0..m {
                cell.clear();
                cell.extend(ok.iter().map(|d| d[h][(r, i)]));
                cell.sort_by(f64::total_cmp);
                let est = point[h][(r, i)];
                lower[h][(r, i)] = quantile_sorted(&cell, tail).min(est);
                upper[h][(r, i)] = quantile_sorted(&cell, 1.0 - tail).max(est);
            }
        }
    }
    result.lower = Some(lower);
    result.upper = Some(upper);
    Ok(result)
}

/// Orthogonalized responses with 95% bands.
pub fn irf(model: &VarModel, horizon: usize, n_boot: usize, seed: u64) -> Result<IrfResult> {
    irf_with(
        model,
        &IrfOptions {
            horizon,
            n_boot,
            seed,
            ..IrfOptions::default()
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FevdResult {
    pub labels: Vec<String>,
    /// `shares[h − 1][(target, source)]` for forecast horizons h = 1..=H; rows sum to 1.
    pub shares: Vec<Matrix>,
}

impl FevdResult {
    pub fn horizon(&self) -> usize {
        self.shares.len()
    }

    pub fn share(&self, h: usize, target: usize, source: usize) -> f64 {
        self.shares[h - 1][(target, source)]
    }

    pub fn to_csv(&self) -> String {
        response_csv(&self.labels, &self.shares, None, None, 1)
    }
}

/// Share of the h-step forecast-error variance of each target attributable
/// to each orthogonalized shock.
pub fn fevd(model: &VarModel, horizon: usize) -> Result<FevdResult> {
    if horizon == 0 {
        return Err(Error::Precondition("FEVD horizon must be ≥ 1".into()));
    }
    let theta = orthogonalized_responses(model, horizon - 1)?;
    let m = model.n_vars();
    let mut cum = Matrix::zeros(m, m);
    let mut shares = Vec::with_capacity(horizon);
    for t in &theta {
        for j in 0..m {
            for l in 0..m {
                cum[(j, l)] += t[(j, l)] * t[(j, l)];
            }
        }
        let mut s = cum.clone();
        for j in 0..m {
            let total: f64 = cum.row(j).iter().sum();
            if !(total > 0.0) {
                return Err(Error::Degenerate(format!(
                    "zero forecast-error variance for `{}`",
                    model.labels[j]
                )));
            }
            for v in s.row_mut(j) {
                *v /= total;
            }
        }
        shares.push(s);
    }
    Ok(FevdResult {
        labels: model.labels.clone(),
        shares,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causality::fit_var;
    use crate::synth::{simulate_var, VarSpec};
    use crate::timeseries::SeriesMatrix;
    use proptest::prelude::*;

    fn model_from(a: Vec<Vec<f64>>, sigma: Matrix) -> VarModel {
        let m = a.len();
        VarModel {
            labels: (0..m).map(|i| format!("v{i}")).collect(),
            lag_order: 1,
            intercepts: vec![0.0; m],
            coeff_matrices: vec![Matrix::from_rows(&a)],
            residuals: Matrix::zeros(0, m),
            sigma,
            aic: 0.0,
            t_effective: 0,
            presample: Matrix::zeros(1, m),
        }
    }

    #[test]
    fn var1_responses_are_matrix_powers() {
        let model = model_from(vec![vec![0.5, 0.1], vec![0.2, 0.3]], Matrix::identity(2));
        let psi = ma_coefficients(&model, 3);
        let a = &model.coeff_matrices[0];
        let a3 = a.matmul(a).matmul(a);
        assert!(psi[3].max_abs_diff(&a3) < 1e-15);
        assert_eq!(psi[0], Matrix::identity(2));
    }

    #[test]
    fn impact_response_is_cholesky_factor() {
        let sigma = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let model = model_from(vec![vec![0.5, 0.0], vec![0.0, 0.5]], sigma.clone());
        let theta = orthogonalized_responses(&model, 2).unwrap();
        assert!(theta[0].max_abs_diff(&cholesky(&sigma).unwrap()) < 1e-15);
        assert_eq!(theta[0][(0, 1)], 0.0);
    }

    #[test]
    fn fevd_rows_sum_to_one_and_first_step_is_cholesky() {
        let sigma = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let model = model_from(vec![vec![0.5, 0.2], vec![0.1, 0.4]], sigma);
        let f = fevd(&model, 10).unwrap();
        assert_eq!(f.horizon(), 10);
        for h in 1..=10 {
            for j in 0..2 {
                let s: f64 = (0..2).map(|l| f.share(h, j, l)).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        // h = 1: variable 0 is driven by its own shock only.
        assert!((f.share(1, 0, 0) - 1.0).abs() < 1e-15);
        // Variable 1: 1² / (1² + √2²) = 1/3 from shock 0.
        assert!((f.share(1, 1, 0) - 1.0 / 3.0).abs() < 1e-12);
        assert!(fevd(&model, 0).is_err());
    }

    #[test]
    fn bootstrap_is_deterministic_and_bands_contain_estimate() {
        let data = simulate_var(&VarSpec {
            coeff_matrices: vec![Matrix::from_rows(&[vec![0.4, 0.2], vec![0.1, 0.3]])],
            intercepts: vec![1.0, 1.0],
            sigma: Matrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 1.0]]),
            t: 120,
            seed: 8,
            require_stationary: true,
        })
        .unwrap();
        let model = fit_var(&data, 1).unwrap();
        let a = irf(&model, 6, 60, 3).unwrap();
        let b = irf(&model, 6, 60, 3).unwrap();
        assert_eq!(a, b);
        let (lo, hi) = (a.lower.as_ref().unwrap(), a.upper.as_ref().unwrap());
        for h in 0..=6 {
            for r in 0..2 {
                for i in 0..2 {
                    assert!(lo[h][(r, i)] <= a.responses[h][(r, i)]);
                    assert!(a.responses[h][(r, i)] <= hi[h][(r, i)]);
                }
            }
        }
        let csv = a.to_csv();
        assert_eq!(csv.lines().count(), 1 + 7 * 4);
        assert!(csv.starts_with("step,response,impulse,value,lower,upper\n0,y0,y0,"));
    }

    #[test]
    fn no_bootstrap_means_no_bands() {
        let model = model_from(vec![vec![0.5, 0.0], vec![0.0, 0.5]], Matrix::identity(2));
        let r = irf(&model, 3, 0, 0).unwrap();
        assert!(r.lower.is_none());
        assert_eq!(r.responses.len(), 4);
    }

    fn permute(m: &Matrix, perm: &[usize]) -> Matrix {
        let n = perm.len();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = m[(perm[i], perm[j])];
            }
        }
        out
    }

    proptest! {
        #[test]
        fn ma_coefficients_commute_with_relabeling(
            vals in proptest::collection::vec(-0.4f64..0.4, 18),
            perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
        ) {
            let a1 = Matrix::from_vec(3, 3, vals[..9].to_vec());
            let a2 = Matrix::from_vec(3, 3, vals[9..].to_vec());
            let mut model = model_from(vec![vec![0.0; 3]; 3], Matrix::identity(3));
            model.lag_order = 2;
            model.coeff_matrices = vec![a1.clone(), a2.clone()];
            let mut swapped = model.clone();
            swapped.coeff_matrices = vec![permute(&a1, &perm), permute(&a2, &perm)];
            let psi = ma_coefficients(&model, 8);
            let psi_p = ma_coefficients(&swapped, 8);
            for h in 0..=8 {
                prop_assert!(psi_p[h].max_abs_diff(&permute(&psi[h], &perm)) < 1e-12);
            }
        }

        #[test]
        fn fevd_shares_are_proportions(
            vals in proptest::collection::vec(-0.6f64..0.6, 4),
            l in proptest::collection::vec(0.1f64..3.0, 3),
        ) {
            let a = vec![vec![vals[0], vals[1]], vec![vals[2], vals[3]]];
            let low = Matrix::from_rows(&[vec![l[0], 0.0], vec![l[1] - 1.5, l[2]]]);
            let model = model_from(a, low.matmul(&low.transpose()));
            let f = fevd(&model, 12).unwrap();
            for s in &f.shares {
                for j in 0..2 {
                    prop_assert!(s.row(j).iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
                    prop_assert!((s.row(j).iter().sum::<f64>() - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn permutation_reorders_fitted_model() {
        // Refitting with swapped columns permutes the estimated Ψ exactly.
        let data = simulate_var(&VarSpec {
            coeff_matrices: vec![Matrix::from_rows(&[vec![0.4, 0.2], vec![0.1, 0.3]])],
            intercepts: vec![0.0, 0.0],
            sigma: Matrix::identity(2),
            t: 200,
            seed: 2,
            require_stationary: true,
        })
        .unwrap();
        let swapped: SeriesMatrix = data.select(&[1, 0]);
        let psi = ma_coefficients(&fit_var(&data, 2).unwrap(), 5);
        let psi_s = ma_coefficients(&fit_var(&swapped, 2).unwrap(), 5);
        for h in 0..=5 {
            assert!(psi_s[h].max_abs_diff(&permute(&psi[h], &[1, 0])) < 1e-9);
        }
    }
}
