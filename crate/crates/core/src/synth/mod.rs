//! Synthetic ground truth: VAR processes with known coefficients and post
//! streams with known engagement distributions.

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use rand::Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DateWindow, PostRecord, StreamLabel};
use crate::linalg::{cholesky_psd, solve, spectral_radius, Matrix};
use crate::rng::{substream, StreamRng};
use crate::timeseries::SeriesMatrix;

mod fixture;

pub use self::fixture::{write_mini_fixture, KEYWORDS as FIXTURE_KEYWORDS};

/// Burn-in length is `BURN_IN_PER_LAG * k` steps.
pub const BURN_IN_PER_LAG: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarSpec {
    /// `A_1..A_k`, each m × m; `A_i[r][c]` is the effect of variable c at lag i on variable r.
    pub coeff_matrices: Vec<Matrix>,
    pub intercepts: Vec<f64>,
    /// Innovation covariance.
    pub sigma: Matrix,
    /// Output length after burn-in.
    pub t: usize,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub require_stationary: bool,
}

fn default_true() -> bool {
    true
}

impl VarSpec {
    pub fn n_vars(&self) -> usize {
        self.intercepts.len()
    }

    pub fn lag_order(&self) -> usize {
        self.coeff_matrices.len()
    }

    fn validate(&self) -> Result<Matrix> {
        let m = self.n_vars();
        if m == 0 || self.coeff_matrices.is_empty() {
            return Err(Error::Precondition("VAR spec needs m ≥ 1 and k ≥ 1".into()));
        }
        for (i, a) in self.coeff_matrices.iter().enumerate() {
            if a.rows() != m || a.cols() != m {
                return Err(Error::Precondition(format!(
                    "A_{} is {}x{}, expected {m}x{m}",
                    i + 1,
                    a.rows(),
                    a.cols()
                )));
            }
        }
        if self.sigma.rows() != m || self.sigma.cols() != m {
            return Err(Error::Precondition("sigma has the wrong shape".into()));
        }
        let chol = cholesky_psd(&self.sigma)?;
        if self.require_stationary {
            let radius = companion_spectral_radius(&self.coeff_matrices);
            if radius >= 1.0 {
                return Err(Error::NonStationary { radius });
            }
        }
        Ok(chol)
    }
}

/// Companion matrix of a VAR(k): block row `[A_1 .. A_k]` over an identity shift.
pub fn companion_matrix(coeffs: &[Matrix]) -> Matrix {
    let k = coeffs.len();
    let m = coeffs[0].rows();
    let mut c = Matrix::zeros(m * k, m * k);
    for (lag, a) in coeffs.iter().enumerate() {
        for r in 0..m {
            for col in 0..m {
                c[(r, lag * m + col)] = a[(r, col)];
            }
        }
    }
    for i in m..m * k {
        c[(i, i - m)] = 1.0;
    }
    c
}

pub fn companion_spectral_radius(coeffs: &[Matrix]) -> f64 {
    spectral_radius(&companion_matrix(coeffs))
}

/// Unconditional mean `(I − ΣA_i)⁻¹ c`, when it exists.
fn process_mean(coeffs: &[Matrix], intercepts: &[f64]) -> Option<Vec<f64>> {
    let m = intercepts.len();
    let mut lhs = Matrix::identity(m);
    for a in coeffs {
        lhs = lhs.add(&a.scale(-1.0));
    }
    solve(&lhs, intercepts).ok()
}

/// Steps a VAR forward from `initial` (k × m, oldest row first) for `steps` rows,
/// returning only the new rows. Innovations are `chol · z` with standard normal `z`.
pub fn simulate_path(
    coeffs: &[Matrix],
    intercepts: &[f64],
    chol: &Matrix,
    initial: &Matrix,
    steps: usize,
    rng: &mut StreamRng,
) -> Matrix {
    let k = coeffs.len();
    let m = intercepts.len();
    let mut hist: Vec<Vec<f64>> = initial.to_rows();
    debug_assert_eq!(hist.len(), k);
    let mut out = Matrix::zeros(steps, m);
    let mut z = vec![0.0; m];
    for t in 0..steps {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let shock = chol.matvec(&z);
        let mut y = intercepts.to_vec();
        for (lag, a) in coeffs.iter().enumerate() {
            let prev = &hist[hist.len() - 1 - lag];
            for r in 0..m {
                y[r] += (0..m).map(|c| a[(r, c)] * prev[c]).sum::<f64>();
            }
        }
        for r in 0..m {
            y[r] += shock[r];
        }
        out.row_mut(t).copy_from_slice(&y);
        hist.push(y);
        if hist.len() > k {
            hist.remove(0);
        }
    }
    out
}

/// Simulates `spec.t` observations with Gaussian innovations, discarding a
/// burn-in of `10·k` steps. Starts from the process mean when it exists.
pub fn simulate_var(spec: &VarSpec) -> Result<SeriesMatrix> {
    let chol = spec.validate()?;
    let k = spec.lag_order();
    let m = spec.n_vars();
    let start = process_mean(&spec.coeff_matrices, &spec.intercepts).unwrap_or(vec![0.0; m]);
    let mut initial = Matrix::zeros(k, m);
    for r in 0..k {
        initial.row_mut(r).copy_from_slice(&start);
    }
    let mut rng = substream(spec.seed, "simulate_var");
    let burn = BURN_IN_PER_LAG * k;
    let path = simulate_path(
        &spec.coeff_matrices,
        &spec.intercepts,
        &chol,
        &initial,
        burn + spec.t,
        &mut rng,
    );
    let mut data = Matrix::zeros(spec.t, m);
    for i in 0..spec.t {
        data.row_mut(i).copy_from_slice(path.row(burn + i));
    }
    Ok(SeriesMatrix::from_matrix(
        data,
        (0..m).map(|j| format!("y{j}")).collect(),
    ))
}

/// Count distribution for one engagement metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CountDistribution {
    /// Gamma–Poisson mixture with the given mean and dispersion (shape) `r`.
    NegativeBinomial { mean: f64, dispersion: f64 },
    /// Rounded log-normal with log-scale location and scale.
    LogNormal { mu: f64, sigma: f64 },
}

impl CountDistribution {
    fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            CountDistribution::NegativeBinomial { mean, dispersion } => {
                mean >= 0.0 && mean.is_finite() && dispersion > 0.0 && dispersion.is_finite()
            }
            CountDistribution::LogNormal { mu, sigma } => mu.is_finite() && sigma >= 0.0 && sigma.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "invalid distribution for {name}: {self:?}"
            )))
        }
    }

    fn sample(&self, rng: &mut StreamRng) -> u64 {
        match *self {
            CountDistribution::NegativeBinomial { mean, dispersion } => {
                if mean == 0.0 {
                    return 0;
                }
                let lambda: f64 = Gamma::new(dispersion, mean / dispersion)
                    .expect("validated gamma parameters")
                    .sample(rng);
                if lambda <= 0.0 {
                    return 0;
                }
                Poisson::new(lambda).expect("positive rate").sample(rng) as u64
            }
            CountDistribution::LogNormal { mu, sigma } => {
                let v: f64 = LogNormal::new(mu, sigma).expect("validated lognormal").sample(rng);
                v.round().min(u64::MAX as f64) as u64
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementSpec {
    pub followers: CountDistribution,
    pub tweets: CountDistribution,
    pub retweets: CountDistribution,
    pub replies: CountDistribution,
    pub likes: CountDistribution,
    pub quotes: CountDistribution,
    pub retweet_share: f64,
    pub window: DateWindow,
    pub stream: StreamLabel,
}

impl EngagementSpec {
    /// Heavy-tailed defaults with the given mean retweet count.
    pub fn with_mean_retweets(stream: StreamLabel, mean_retweets: f64, window: DateWindow) -> Self {
        EngagementSpec {
            followers: CountDistribution::LogNormal { mu: 6.0, sigma: 2.0 },
            tweets: CountDistribution::LogNormal { mu: 9.0, sigma: 1.5 },
            retweets: CountDistribution::NegativeBinomial {
                mean: mean_retweets,
                dispersion: 0.3,
            },
            replies: CountDistribution::NegativeBinomial {
                mean: 0.5,
                dispersion: 0.2,
            },
            likes: CountDistribution::NegativeBinomial {
                mean: mean_retweets * 0.4,
                dispersion: 0.3,
            },
            quotes: CountDistribution::NegativeBinomial {
                mean: 0.2,
                dispersion: 0.2,
            },
            retweet_share: 0.5,
            window,
            stream,
        }
    }
}

/// Draws `n` posts with independently distributed engagement counters and
/// creation times uniform over the window.
pub fn simulate_posts(spec: &EngagementSpec, n: usize, seed: u64) -> Result<Vec<PostRecord>> {
    if n == 0 {
        return Err(Error::Precondition("simulate_posts needs n ≥ 1".into()));
    }
    for (name, d) in [
        ("followers", &spec.followers),
        ("tweets", &spec.tweets),
        ("retweets", &spec.retweets),
        ("replies", &spec.replies),
        ("likes", &spec.likes),
        ("quotes", &spec.quotes),
    ] {
        d.validate(name)?;
    }
    if !(0.0..=1.0).contains(&spec.retweet_share) {
        return Err(Error::Precondition("retweet_share must lie in [0, 1]".into()));
    }
    let mut rng = substream(seed, &format!("simulate_posts/{}", spec.stream));
    let seconds = spec.window.len_days() as i64 * 86_400;
    let origin = Utc.from_utc_datetime(&spec.window.start.and_hms_opt(0, 0, 0).unwrap());
    let posts = (0..n)
        .map(|i| PostRecord {
            id: format!("{}-{i}", spec.stream),
            created_at: origin + Duration::seconds(rng.gen_range(0..seconds)),
            text: String::new(),
            author_followers: spec.followers.sample(&mut rng),
            author_tweet_count: spec.tweets.sample(&mut rng),
            retweet_count: spec.retweets.sample(&mut rng),
            reply_count: spec.replies.sample(&mut rng),
            like_count: spec.likes.sample(&mut rng),
            quote_count: spec.quotes.sample(&mut rng),
            author_location_raw: None,
            shared_urls: vec![],
            hashtags: vec![],
            is_retweet: rng.gen_bool(spec.retweet_share),
            stream_label: Some(spec.stream),
        })
        .collect();
    Ok(posts)
}

/// Daily disinformation/debunk series shaped like a three-month study window:
/// a bidirectionally coupled VAR(2) around fixed baselines, driven by a
/// disinformation surge in early March. Debunks follow disinformation with a
/// lag; a debunk shock lifts disinformation the next day and pushes it below
/// baseline the day after.
pub fn reference_series(seed: u64) -> Result<SeriesMatrix> {
    driven_var2(REFERENCE_A1, REFERENCE_A2, seed)
}

fn driven_var2(a1: [[f64; 2]; 2], a2: [[f64; 2]; 2], seed: u64) -> Result<SeriesMatrix> {
    let start = NaiveDate::from_ymd_opt(2022, 2, 1).unwrap();
    let days = 89;
    let burn = 30;
    let coeffs = [
        Matrix::from_rows(&[a1[0].to_vec(), a1[1].to_vec()]),
        Matrix::from_rows(&[a2[0].to_vec(), a2[1].to_vec()]),
    ];
    let chol = cholesky_psd(&Matrix::from_rows(&[vec![196.0, 30.0], vec![30.0, 225.0]]))?;
    let base = [120.0, 45.0];
    let mut rng = substream(seed, "reference_series");
    let mut dev: Vec<[f64; 2]> = vec![[0.0; 2]; 2];
    let mut data = Matrix::zeros(days, 2);
    for t in 0..burn + days {
        let day = t as f64 - burn as f64;
        // Surge centred on 10 March (day 37) with a shoulder in late February.
        let surge = 45.0 * (-((day - 37.0) / 4.0).powi(2)).exp() + 20.0 * (-((day - 26.0) / 2.5).powi(2)).exp();
        let z: [f64; 2] = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let shock = chol.matvec(&z);
        let mut next = [surge + shock[0], shock[1]];
        for (lag, a) in coeffs.iter().enumerate() {
            let prev = dev[dev.len() - 1 - lag];
            for r in 0..2 {
                next[r] += a[(r, 0)] * prev[0] + a[(r, 1)] * prev[1];
            }
        }
        dev.push(next);
        if t >= burn {
            for j in 0..2 {
                data[(t - burn, j)] = (base[j] + next[j]).max(0.0).round();
            }
        }
    }
    Ok(SeriesMatrix {
        labels: vec!["disinformation".into(), "debunk".into()],
        start_date: start,
        data,
    })
}

const REFERENCE_A1: [[f64; 2]; 2] = [[0.5, 0.3], [0.45, 0.3]];
const REFERENCE_A2: [[f64; 2]; 2] = [[0.0, -0.6], [0.05, 0.0]];
