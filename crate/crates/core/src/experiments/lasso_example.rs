//! Three-covariate lasso design whose degrees of freedom are not monotone
//! in the regularization level, in either the penalized or the constrained
//! form.

use std::sync::Arc;

use rayon::prelude::*;

use super::{pass_with_errors, Kind, Row, RowContext, ScenarioResult};
use crate::error::{Error, Result};
use crate::estimators::McConfig;
use crate::fitter::LassoFitter;
use crate::model::{DesignMatrix, Method, NoiseModel};
use crate::{Matrix, Vector};

pub const LASSO_N: usize = 1001;
pub const LASSO_BETA: [f64; 3] = [1.0, 1.0, -0.1];
const KINDS: [Kind; 4] = [Kind::Df, Kind::Omega, Kind::Train, Kind::Pred];
const ESTIMATORS: [Method; 2] = [Method::CovarianceMc, Method::SteinMc];

/// Columns of unit norm: `x₁` constant on the first `n − 1` rows, `x₂`
/// alternating in sign, `x₃` on the odd rows plus `0.5` on the last.
/// Rows are numbered from 1, so row 1 is odd.
pub fn lasso_design(n: usize) -> Result<DesignMatrix<f64>> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::invalid("lasso design needs an odd n >= 3"));
    }
    let m = (n - 1) as f64;
    let a = (1.0 / m).sqrt();
    let b = (3.0 / (2.0 * m)).sqrt();
    let x = Matrix::from_fn(n, 3, |i, j| {
        let last = i == n - 1;
        let odd = i % 2 == 0;
        match (j, last) {
            (0, false) => a,
            (1, false) => {
                if odd {
                    a
                } else {
                    -a
                }
            }
            (2, false) => {
                if odd {
                    b
                } else {
                    0.0
                }
            }
            (2, true) => 0.5,
            _ => 0.0,
        }
    });
    DesignMatrix::new(x)
}

/// `y = x₁ + x₂ − 0.1 x₃ + ε` with `ε ~ N(0, 0.02)`; `noise_as_sd` reads
/// `0.02` as the standard deviation instead of the variance.
pub fn lasso_noise(design: &DesignMatrix<f64>, noise_as_sd: bool) -> Result<NoiseModel<f64>> {
    let mean = design.apply(&Vector::from_column_slice(&LASSO_BETA));
    let variance = if noise_as_sd { 0.02 * 0.02 } else { 0.02 };
    NoiseModel::gaussian_iso(mean, variance)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoGrids {
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
}

impl Default for LassoGrids {
    /// 21 log-spaced `λ` in `[0.01, 2]` plus `{0.1, 0.5}`, and 21 evenly
    /// spaced `s` in `[0, 1.1 ‖β‖₁]`.
    fn default() -> Self {
        let (lo, hi) = (0.01f64.ln(), 2f64.ln());
        let mut lambda: Vec<f64> = (0..21)
            .map(|k| (lo + (hi - lo) * k as f64 / 20.0).exp())
            .chain([0.1, 0.5])
            .collect();
        lambda.sort_by(f64::total_cmp);
        lambda.dedup();
        let top = 1.1 * LASSO_BETA.iter().map(|b| b.abs()).sum::<f64>();
        let s = (0..21).map(|k| top * k as f64 / 20.0).collect();
        Self { lambda, s }
    }
}

/// Per grid point and form, df and `ω` from the covariance estimate and
/// from the mean Stein estimate (`|A|`, or `|A| − 1` when the L1
/// constraint binds), plus train and test error.
pub fn run_lasso_counterexample(
    mc: &McConfig,
    grids: &LassoGrids,
    noise_as_sd: bool,
) -> Result<ScenarioResult> {
    if grids.lambda.is_empty() || grids.s.is_empty() {
        return Err(Error::invalid("lasso grids must be nonempty"));
    }
    if grids.lambda.iter().chain(&grids.s).any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("lasso grid values must be nonnegative"));
    }
    let design = Arc::new(lasso_design(LASSO_N)?);
    let noise = lasso_noise(&design, noise_as_sd)?;
    let sigma2 = noise.common_variance().expect("isotropic");
    let points: Vec<(&str, f64)> = grids
        .lambda
        .iter()
        .map(|l| ("lambda", *l))
        .chain(grids.s.iter().map(|s| ("s", *s)))
        .collect();
    let rows: Vec<Vec<Row>> = points
        .par_iter()
        .map(|(param_name, value)| {
            let fitter = if *param_name == "lambda" {
                LassoFitter::penalized(design.clone(), *value)
            } else {
                LassoFitter::constrained(design.clone(), *value)
            };
            let summary = pass_with_errors(&fitter, &noise, mc, Some(sigma2))?;
            let ctx = RowContext {
                scenario: "example-4-lasso",
                param_name,
                param_value: *value,
                seed: mc.seed,
            };
            let mut rows = Vec::new();
            for m in ESTIMATORS {
                rows.extend(ctx.summary_rows(&summary, m, &KINDS, LASSO_N, Some(sigma2))?);
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(ScenarioResult::new(rows.concat()))
}
