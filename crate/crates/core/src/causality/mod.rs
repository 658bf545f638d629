//! Multivariate dynamics between daily series: VAR estimation, lag
//! selection, Granger tests, impulse responses and variance decomposition.

mod granger;
mod irf;
mod var;

pub use granger::{granger_all_pairs, granger_test, granger_to_csv, GrangerReport};
pub use irf::{fevd, irf, irf_with, ma_coefficients, orthogonalized_responses, FevdResult, IrfOptions, IrfResult};
pub use var::{fit_var, select_lag, LagSelection, VarModel};

pub use crate::linalg::cholesky;
