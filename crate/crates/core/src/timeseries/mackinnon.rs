//! Dickey–Fuller response-surface constants for a single series (N = 1).
//!
//! p-values: MacKinnon (1994), "Approximate asymptotic distribution functions
//! for unit-root and cointegration tests", Table 3/4 coefficients for N = 1.
//! Critical values: MacKinnon (2010), "Critical values for cointegration tests",
//! Queen's Economics Department Working Paper 1227, Table 2, N = 1.
//! Values match the tables shipped with statsmodels `tsa.adfvalues`.

use statrs::distribution::{ContinuousCDF, Normal};

use super::adf::AdfRegression;

/// Table revision; bump when any constant below changes.
pub const TABLE_VERSION: &str = "mackinnon-1994-2010-n1";

struct PValueSurface {
    max_stat: f64,
    min_stat: f64,
    star_stat: f64,
    /// Ascending-power coefficients for stat ≤ star_stat.
    small_p: [f64; 3],
    /// Ascending-power coefficients for stat > star_stat.
    large_p: [f64; 4],
}

const SURFACE_C: PValueSurface = PValueSurface {
    max_stat: 2.74,
    min_stat: -18.83,
    star_stat: -1.61,
    small_p: [2.1659, 1.4412, 0.038269],
    large_p: [1.7339, 0.93202, -0.12745, -0.010368],
};

const SURFACE_CT: PValueSurface = PValueSurface {
    max_stat: 0.7,
    min_stat: -16.18,
    star_stat: -2.89,
    small_p: [3.2512, 1.6047, 0.049588],
    large_p: [2.5261, 0.61654, -0.37956, -0.060285],
};

/// Rows: 1%, 5%, 10%. Columns: c0 + c1/T + c2/T² + c3/T³.
const CRIT_C: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];

const CRIT_CT: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

fn polynomial(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Approximate p-value of an ADF t-statistic.
pub fn mackinnon_p_value(stat: f64, regression: AdfRegression) -> f64 {
    let s = match regression {
        AdfRegression::Constant => &SURFACE_C,
        AdfRegression::ConstantTrend => &SURFACE_CT,
    };
    if stat > s.max_stat {
        return 1.0;
    }
    if stat < s.min_stat {
        return 0.0;
    }
    let z = if stat <= s.star_stat {
        polynomial(&s.small_p, stat)
    } else {
        polynomial(&s.large_p, stat)
    };
    Normal::new(0.0, 1.0).expect("standard normal").cdf(z)
}

/// Finite-sample critical values at 1%, 5% and 10% for `nobs` observations.
pub fn critical_values(nobs: usize, regression: AdfRegression) -> [f64; 3] {
    let table = match regression {
        AdfRegression::Constant => &CRIT_C,
        AdfRegression::ConstantTrend => &CRIT_CT,
    };
    let inv = 1.0 / nobs as f64;
    table.map(|row| row[0] + row[1] * inv + row[2] * inv * inv + row[3] * inv * inv * inv)
}
