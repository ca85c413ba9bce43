//! Two-dimensional projection examples where the smaller set has more
//! optimism.
//!
//! Rows use `param_name = "set"` with value `0` for the smaller model set
//! `S` and `1` for the larger set `L`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pass_with_errors, Kind, Row, RowContext, ScenarioResult};
use crate::error::Result;
use crate::estimators::McConfig;
use crate::fitter::ProjectionFitter;
use crate::model::{Method, NoiseModel};
use crate::projections::ConvexSetSpec;
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyLaw {
    /// `y₁ ~ U(−1, 1)`, `y₂ = 2`.
    Uniform,
    /// `N((0, 2), diag(1/3, 0))`: same mean and covariance as the uniform law.
    Gaussian,
}

pub(crate) const SET_PARAM: &str = "set";
const KINDS: [Kind; 3] = [Kind::Omega, Kind::Train, Kind::Pred];

fn toy_noise(law: ToyLaw) -> Result<NoiseModel<f64>> {
    let mean = Vector::from_column_slice(&[0.0, 2.0]);
    match law {
        ToyLaw::Uniform => NoiseModel::uniform_component(mean, 0, -1.0, 1.0),
        ToyLaw::Gaussian => NoiseModel::gaussian_diag(mean, vec![1.0 / 3.0, 0.0]),
    }
}

fn run_pair(
    scenario: &str,
    noise: &NoiseModel<f64>,
    small: ConvexSetSpec<f64>,
    large: ConvexSetSpec<f64>,
    mc: &McConfig,
) -> Result<ScenarioResult> {
    let sets = [(0.0, small), (1.0, large)];
    let rows: Vec<Vec<Row>> = sets
        .par_iter()
        .map(|(code, set)| {
            let summary = pass_with_errors(&ProjectionFitter::new(set.clone()), noise, mc, None)?;
            let ctx = RowContext {
                scenario,
                param_name: SET_PARAM,
                param_value: *code,
                seed: mc.seed,
            };
            ctx.summary_rows(&summary, Method::CovarianceMc, &KINDS, noise.n(), None)
        })
        .collect::<Result<_>>()?;
    Ok(ScenarioResult::new(rows.concat()))
}

/// `S` is the segment `[−1, 1] × {0}`, `L` the unit disk.
pub fn run_toy_segment_disk(mc: &McConfig, law: ToyLaw) -> Result<ScenarioResult> {
    let name = match law {
        ToyLaw::Uniform => "toy-segment-disk",
        ToyLaw::Gaussian => "toy-segment-disk-gaussian",
    };
    run_pair(
        name,
        &toy_noise(law)?,
        ConvexSetSpec::segment(-1.0, 1.0)?,
        ConvexSetSpec::ball(1.0)?,
        mc,
    )
}

/// `y ~ N((1, 0), 0.1² I)`; `S = {(0, −1), (0, 1)}` is not convex and sits
/// inside the vertical axis `L`.
pub fn run_convexity_example(mc: &McConfig) -> Result<ScenarioResult> {
    let noise = NoiseModel::gaussian_iso(Vector::from_column_slice(&[1.0, 0.0]), 0.01)?;
    let axis = Matrix::from_column_slice(2, 1, &[0.0, 1.0]);
    run_pair(
        "convexity-example",
        &noise,
        ConvexSetSpec::finite_set(vec![vec![0.0, -1.0], vec![0.0, 1.0]])?,
        ConvexSetSpec::subspace(&axis)?,
        mc,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_rows_and_ordering() {
        let r = run_toy_segment_disk(&McConfig::new(20_000, 5), ToyLaw::Uniform).unwrap();
        assert_eq!(r.rows.len(), 2 * 3);
        let s = r.get(SET_PARAM, 0.0, "covariance_mc", Kind::Omega).unwrap();
        let l = r.get(SET_PARAM, 1.0, "covariance_mc", Kind::Omega).unwrap();
        assert!((s.estimate - 1.0 / 3.0).abs() < 4.0 * s.stderr);
        assert!((l.estimate - 0.1556).abs() < 4.0 * l.stderr + 1e-3);
        assert!(s.estimate > l.estimate);
    }

    #[test]
    fn gaussian_toy_keeps_the_reversal() {
        let r = run_toy_segment_disk(&McConfig::new(20_000, 6), ToyLaw::Gaussian).unwrap();
        let s = r.get(SET_PARAM, 0.0, "covariance_mc", Kind::Omega).unwrap();
        let l = r.get(SET_PARAM, 1.0, "covariance_mc", Kind::Omega).unwrap();
        let se = (s.stderr.powi(2) + l.stderr.powi(2)).sqrt();
        assert!(s.estimate - l.estimate > 3.0 * se);
    }

    #[test]
    fn convexity_values() {
        let r = run_convexity_example(&McConfig::new(50_000, 7)).unwrap();
        let s = r.get(SET_PARAM, 0.0, "covariance_mc", Kind::Omega).unwrap();
        let l = r.get(SET_PARAM, 1.0, "covariance_mc", Kind::Omega).unwrap();
        assert!((l.estimate - 0.01).abs() < 0.001);
        assert!((s.estimate - 0.1 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.003);
    }
}
