//! Optimism of projection onto a growing ellipse in the plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pass_with_errors, Kind, Row, RowContext, ScenarioResult};
use crate::error::{Error, Result};
use crate::estimators::McConfig;
use crate::fitter::ProjectionFitter;
use crate::model::{Method, NoiseModel};
use crate::projections::ConvexSetSpec;
use crate::Vector;

/// Ratio of the minor to the major radius.
pub const ASPECT: f64 = 0.1;
pub const PROFILE_MEAN: [f64; 2] = [3.0, 10.0];
pub const PROFILE_SCALE: [f64; 2] = [0.1, 3.0];
const KINDS: [Kind; 3] = [Kind::Omega, Kind::Train, Kind::Pred];

/// How the noise scale pair `(0.1, 3)` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileNoise {
    /// Standard deviations: variances `(0.01, 9)`.
    #[default]
    StandardDeviation,
    /// Variances `(0.1, 3)`.
    Variance,
}

pub fn ridge_profile_noise(reading: ProfileNoise) -> Result<NoiseModel<f64>> {
    let variances = match reading {
        ProfileNoise::StandardDeviation => PROFILE_SCALE.iter().map(|s| s * s).collect(),
        ProfileNoise::Variance => PROFILE_SCALE.to_vec(),
    };
    NoiseModel::gaussian_diag(Vector::from_column_slice(&PROFILE_MEAN), variances)
}

/// Default grid `{1, 1.5, …, 10}`.
pub fn default_rl_grid() -> Vec<f64> {
    (0..19).map(|k| 1.0 + 0.5 * k as f64).collect()
}

/// Covariance-MC optimism of projecting onto the ellipse with radii
/// `(r, 0.1 r)` for each `r` in `rl_grid`. Every grid point reuses the
/// same seed, so the `r = 1` row is the smaller set's own estimate.
pub fn run_ridge_profile(
    mc: &McConfig,
    rl_grid: &[f64],
    reading: ProfileNoise,
) -> Result<ScenarioResult> {
    if rl_grid.is_empty() || rl_grid.iter().any(|r| !(1.0..=10.0).contains(r)) {
        return Err(Error::invalid(
            "r_L grid must be nonempty and within [1, 10]",
        ));
    }
    let noise = ridge_profile_noise(reading)?;
    let rows: Vec<Vec<Row>> = rl_grid
        .par_iter()
        .map(|r| {
            let set = ConvexSetSpec::ellipsoid(vec![*r, ASPECT * r])?;
            let summary = pass_with_errors(&ProjectionFitter::new(set), &noise, mc, None)?;
            let ctx = RowContext {
                scenario: "ridge-ellipsoid-profile",
                param_name: "r_l",
                param_value: *r,
                seed: mc.seed,
            };
            ctx.summary_rows(&summary, Method::CovarianceMc, &KINDS, 2, None)
        })
        .collect::<Result<_>>()?;
    Ok(ScenarioResult::new(rows.concat()))
}
