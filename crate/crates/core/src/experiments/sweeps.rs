//! Randomized property sweeps over designs, penalties and constraints.
//!
//! Trial `t` draws its design and parameters from substream
//! `TRIAL_STREAM + t` of the master seed and runs its Monte Carlo under
//! seed `seed + t + 1`, so trials never share random numbers.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Kind, Row, RowContext, ScenarioResult};
use crate::error::{Error, Result};
use crate::estimators::{dominance_margin, mc_optimism_covariance, McConfig};
use crate::fitter::{ConstrainedLsFitter, RidgeFitter};
use crate::model::{DesignMatrix, Method, NoiseModel};
use crate::projections::ConvexSetSpec;
use crate::rng::{RngStream, StreamRng};
use crate::smoothers::{
    hetero_ridge_optimism, ridge_df_closed_form, smoother_matrix, trace_df, RidgeSpec,
};
use crate::{Matrix, Vector};

const TRIAL_STREAM: u64 = 1 << 62;
pub const GENRIDGE_LAMBDAS: [f64; 5] = [0.0, 0.1, 1.0, 10.0, 100.0];
pub const MONOTONE_TOL: f64 = 1e-9;
pub const DOMINANCE_TOL: f64 = 1e-6;
pub const DOMINANCE_EPS: f64 = 1e-4;
const DOMINANCE_POINTS: usize = 20;

fn trial_rng(seed: u64, t: u64) -> StreamRng {
    RngStream::new(seed, TRIAL_STREAM + t).generator()
}

fn trial_mc(mc: &McConfig, t: u64) -> McConfig {
    McConfig {
        seed: mc.seed.wrapping_add(t + 1),
        ..*mc
    }
}

fn gaussian_matrix(g: &mut StreamRng, n: usize, p: usize) -> Matrix<f64> {
    Matrix::from_fn(n, p, |_, _| g.standard_normal())
}

fn gaussian_vector(g: &mut StreamRng, n: usize) -> Vector<f64> {
    Vector::from_fn(n, |_, _| g.standard_normal())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    Ok(())
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub result: ScenarioResult,
    pub trials: u64,
    /// Largest increase of df from one grid value to the next.
    pub max_violation: f64,
    /// Trials with an increase above [`MONOTONE_TOL`].
    pub violations: usize,
}

/// Trace df of `X(XᵀX + λK)⁻¹Xᵀ` at each `λ`.
pub fn genridge_df_path(
    design: &Arc<DesignMatrix<f64>>,
    k: &Matrix<f64>,
    lambdas: &[f64],
) -> Result<Vec<f64>> {
    lambdas
        .iter()
        .map(|l| {
            let spec = RidgeSpec::generalized(design.clone(), *l, k.clone())?;
            Ok(trace_df(&smoother_matrix(&spec)?))
        })
        .collect()
}

/// Random `X` (20×5, standard normal) and random PSD `K = AAᵀ` with `A`
/// of random width 1..=5; records the largest increase of trace df along
/// `lambdas`, which must be sorted ascending.
pub fn run_genridge_monotonicity(
    trials: u64,
    seed: u64,
    lambdas: &[f64],
) -> Result<MonotonicityReport> {
    check_trials(trials)?;
    if lambdas.is_empty() || lambdas.windows(2).any(|w| !(w[0] < w[1])) || !(lambdas[0] >= 0.0) {
        return Err(Error::invalid(
            "λ grid must be nonempty, nonnegative and increasing",
        ));
    }
    let paths: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut g = trial_rng(seed, t);
            let x = Arc::new(DesignMatrix::new(gaussian_matrix(&mut g, 20, 5))?);
            let width = 1 + (g.next_u64() % 5) as usize;
            let a = gaussian_matrix(&mut g, 5, width);
            genridge_df_path(&x, &(&a * a.transpose()), lambdas)
        })
        .collect::<Result<_>>()?;

    let steps: Vec<f64> = paths
        .iter()
        .map(|p| {
            p.windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let max_violation = steps.iter().copied().fold(0.0, f64::max);
    let violations = steps.iter().filter(|s| **s > MONOTONE_TOL).count();

    let rows = lambdas
        .iter()
        .enumerate()
        .map(|(j, l)| {
            let dfs: Vec<f64> = paths.iter().map(|p| p[j]).collect();
            let (mean, se) = mean_and_stderr(&dfs);
            RowContext {
                scenario: "genridge-monotonicity",
                param_name: "lambda",
                param_value: *l,
                seed,
            }
            .row("trace", Kind::Df, mean, se, trials)
        })
        .collect();
    Ok(MonotonicityReport {
        result: ScenarioResult::new(rows),
        trials,
        max_violation,
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientConstraint {
    L1Ball,
    Ellipsoid,
    /// L1 ball on even trials, ellipsoid on odd ones.
    #[default]
    Alternate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Report {
    pub result: ScenarioResult,
    pub trials: u64,
    /// Largest `∂̂_i μ̂ᶜ_i − ∂̂_i μ̂ᵒˡˢ_i` over trials, points and coordinates.
    pub max_margin: f64,
    /// Trials with a margin above [`DOMINANCE_TOL`].
    pub dominance_violations: usize,
    /// Trials whose constrained df exceeds `p + 3 SE`.
    pub df_violations: usize,
}

/// Random `X` (15×4), `β`, and a convex coefficient constraint that
/// usually binds at `β`. Compares constrained least squares against OLS:
/// per-coordinate Jacobian dominance at 20 draws of `y` by central
/// differences, and covariance-MC df against `p`.
pub fn run_theorem2_sweep(
    trials: u64,
    mc: &McConfig,
    constraint: CoefficientConstraint,
) -> Result<Theorem2Report> {
    check_trials(trials)?;
    let (n, p) = (15, 4);
    let outcomes: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut g = trial_rng(mc.seed, t);
            let x = Arc::new(DesignMatrix::new(gaussian_matrix(&mut g, n, p))?);
            let beta = gaussian_vector(&mut g, p);
            let use_l1 = match constraint {
                CoefficientConstraint::L1Ball => true,
                CoefficientConstraint::Ellipsoid => false,
                CoefficientConstraint::Alternate => t % 2 == 0,
            };
            let set = if use_l1 {
                let radius = (0.2 + 0.6 * g.uniform(0.0, 1.0)) * beta.lp_norm(1);
                ConvexSetSpec::l1_ball(radius)?
            } else {
                let radii = beta
                    .iter()
                    .map(|b| (0.3 + 0.7 * g.uniform(0.0, 1.0)) * b.abs() + 0.05)
                    .collect();
                ConvexSetSpec::ellipsoid(radii)?
            };
            let noise = NoiseModel::gaussian_iso(x.apply(&beta), 1.0)?;
            let ols = RidgeFitter::new(RidgeSpec::new(x.clone(), 0.0)?)?;
            let exact = ConstrainedLsFitter {
                design: x.clone(),
                coefficient_set: set.clone(),
                tol: 1e-14,
                max_iter: 2_000_000,
            };
            let mut margin = f64::NEG_INFINITY;
            for _ in 0..DOMINANCE_POINTS {
                let y = noise.mean() + gaussian_vector(&mut g, n);
                margin = margin.max(dominance_margin(&exact, &ols, &y, DOMINANCE_EPS)?);
            }
            let fast = ConstrainedLsFitter {
                tol: 1e-10,
                ..exact
            };
            let df = mc_optimism_covariance(&fast, &noise, &trial_mc(mc, t))?.to_df(n, 1.0)?;
            Ok((margin, df.value, df.stderr))
        })
        .collect::<Result<_>>()?;

    let max_margin = outcomes
        .iter()
        .map(|o| o.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let dominance_violations = outcomes.iter().filter(|o| o.0 > DOMINANCE_TOL).count();
    let df_violations = outcomes
        .iter()
        .filter(|o| o.1 > p as f64 + 3.0 * o.2)
        .count();
    let mut rows: Vec<Row> = Vec::new();
    for (t, (_, df, se)) in outcomes.iter().enumerate() {
        let ctx = RowContext {
            scenario: "theorem2-sweep",
            param_name: "trial",
            param_value: t as f64,
            seed: mc.seed,
        };
        rows.push(ctx.row(Method::ClosedForm.as_str(), Kind::Df, p as f64, 0.0, 0));
        rows.push(ctx.row(
            Method::CovarianceMc.as_str(),
            Kind::Df,
            *df,
            *se,
            mc.replicates,
        ));
    }
    Ok(Theorem2Report {
        result: ScenarioResult::new(rows),
        trials,
        max_margin,
        dominance_violations,
        df_violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeteroReport {
    pub result: ScenarioResult,
    pub trials: u64,
    /// Largest `|closed − MC| / SE` over trials.
    pub max_z: f64,
    /// Trials with `|closed − MC| > 3 SE`.
    pub outside_3se: usize,
    /// Largest gap between the heteroscedastic formula at equal variances
    /// and `(2σ²/n) Σ d²/(d² + λ)`.
    pub max_reduction_error: f64,
    /// Trials whose closed form increases somewhere along [`GENRIDGE_LAMBDAS`].
    pub monotone_violations: usize,
}

/// Random `X` (30×4), `β`, per-observation variances in `[0.2, 3]` and a
/// log-uniform `λ ∈ [0.01, 100]`: the closed-form ridge optimism under
/// heteroscedastic noise against covariance-MC.
pub fn run_hetero_ridge_check(trials: u64, mc: &McConfig) -> Result<HeteroReport> {
    check_trials(trials)?;
    let (n, p) = (30, 4);
    let outcomes: Vec<(f64, f64, f64, f64, f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut g = trial_rng(mc.seed, t);
            let x = Arc::new(DesignMatrix::new(gaussian_matrix(&mut g, n, p))?);
            let beta = gaussian_vector(&mut g, p);
            let variances: Vec<f64> = (0..n).map(|_| g.uniform(0.2, 3.0)).collect();
            let lambda = 10f64.powf(g.uniform(-2.0, 2.0));

            let closed = hetero_ridge_optimism(&x, lambda, &variances)?;
            let noise = NoiseModel::gaussian_diag(x.apply(&beta), variances.clone())?;
            let fitter = RidgeFitter::new(RidgeSpec::new(x.clone(), lambda)?)?;
            let est = mc_optimism_covariance(&fitter, &noise, &trial_mc(mc, t))?;

            let s2 = variances[0];
            let equal = hetero_ridge_optimism(&x, lambda, &vec![s2; n])?;
            let d: Vec<f64> = x.singular_values().iter().copied().collect();
            let reference = 2.0 * s2 / n as f64 * ridge_df_closed_form(&d, lambda)?;

            let path: Vec<f64> = GENRIDGE_LAMBDAS
                .iter()
                .map(|l| hetero_ridge_optimism(&x, *l, &variances))
                .collect::<Result<_>>()?;
            let monotone = path.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            Ok((
                closed,
                est.value,
                est.stderr,
                lambda,
                (equal - reference).abs(),
                monotone,
            ))
        })
        .collect::<Result<_>>()?;

    let z = |o: &(f64, f64, f64, f64, f64, bool)| (o.0 - o.1).abs() / o.2;
    let max_z = outcomes.iter().map(z).fold(0.0, f64::max);
    let outside_3se = outcomes.iter().filter(|o| z(o) > 3.0).count();
    let max_reduction_error = outcomes.iter().map(|o| o.4).fold(0.0, f64::max);
    let monotone_violations = outcomes.iter().filter(|o| !o.5).count();
    let mut rows = Vec::new();
    for (t, o) in outcomes.iter().enumerate() {
        let ctx = RowContext {
            scenario: "hetero-ridge",
            param_name: "trial",
            param_value: t as f64,
            seed: mc.seed,
        };
        rows.push(ctx.row(Method::ClosedForm.as_str(), Kind::Omega, o.0, 0.0, 0));
        rows.push(ctx.row(
            Method::CovarianceMc.as_str(),
            Kind::Omega,
            o.1,
            o.2,
            mc.replicates,
        ));
    }
    Ok(HeteroReport {
        result: ScenarioResult::new(rows),
        trials,
        max_z,
        outside_3se,
        max_reduction_error,
        monotone_violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeDfReport {
    pub result: ScenarioResult,
    pub trials: u64,
    pub max_z: f64,
    pub outside_3se: usize,
}

/// Random `X` (50×5), `β` and log-uniform `λ ∈ [0.01, 100]` under unit
/// isotropic noise: `Σ d²/(d² + λ)` against covariance-MC df.
pub fn run_ridge_df_check(trials: u64, mc: &McConfig) -> Result<RidgeDfReport> {
    check_trials(trials)?;
    let (n, p) = (50, 5);
    let outcomes: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut g = trial_rng(mc.seed, t);
            let x = Arc::new(DesignMatrix::new(gaussian_matrix(&mut g, n, p))?);
            let beta = gaussian_vector(&mut g, p);
            let lambda = 10f64.powf(g.uniform(-2.0, 2.0));
            let d: Vec<f64> = x.singular_values().iter().copied().collect();
            let closed = ridge_df_closed_form(&d, lambda)?;
            let noise = NoiseModel::gaussian_iso(x.apply(&beta), 1.0)?;
            let fitter = RidgeFitter::new(RidgeSpec::new(x, lambda)?)?;
            let df = mc_optimism_covariance(&fitter, &noise, &trial_mc(mc, t))?.to_df(n, 1.0)?;
            Ok((closed, df.value, df.stderr))
        })
        .collect::<Result<_>>()?;
    let z = |o: &(f64, f64, f64)| (o.0 - o.1).abs() / o.2;
    let max_z = outcomes.iter().map(z).fold(0.0, f64::max);
    let outside_3se = outcomes.iter().filter(|o| z(o) > 3.0).count();
    let mut rows = Vec::new();
    for (t, o) in outcomes.iter().enumerate() {
        let ctx = RowContext {
            scenario: "ridge-closed-form",
            param_name: "trial",
            param_value: t as f64,
            seed: mc.seed,
        };
        rows.push(ctx.row(Method::ClosedForm.as_str(), Kind::Df, o.0, 0.0, 0));
        rows.push(ctx.row(
            Method::CovarianceMc.as_str(),
            Kind::Df,
            o.1,
            o.2,
            mc.replicates,
        ));
    }
    Ok(RidgeDfReport {
        result: ScenarioResult::new(rows),
        trials,
        max_z,
        outside_3se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_penalty_path_strictly_decreases_from_rank() {
        let mut g = trial_rng(3, 0);
        let x = Arc::new(DesignMatrix::new(gaussian_matrix(&mut g, 20, 5)).unwrap());
        let path = genridge_df_path(&x, &Matrix::identity(5, 5), &GENRIDGE_LAMBDAS).unwrap();
        assert!((path[0] - 5.0).abs() < 1e-10);
        assert!(path.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn genridge_sweep_small() {
        let r = run_genridge_monotonicity(10, 1, &GENRIDGE_LAMBDAS).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.result.rows.len(), 5);
        assert!((r.result.rows[0].estimate - 5.0).abs() < 1e-10);
    }

    #[test]
    fn unconstrained_dominates_itself() {
        let mut g = trial_rng(9, 0);
        let x = Arc::new(DesignMatrix::new(gaussian_matrix(&mut g, 15, 4)).unwrap());
        let ols = RidgeFitter::new(RidgeSpec::new(x, 0.0).unwrap()).unwrap();
        let y = gaussian_vector(&mut g, 15);
        assert!(
            dominance_margin(&ols, &ols, &y, DOMINANCE_EPS)
                .unwrap()
                .abs()
                < 1e-9
        );
    }

    #[test]
    fn theorem2_small() {
        let r = run_theorem2_sweep(4, &McConfig::new(200, 2), CoefficientConstraint::Alternate)
            .unwrap();
        assert_eq!(r.dominance_violations, 0, "{}", r.max_margin);
        assert_eq!(
            r.result
                .get("trial", 0.0, "closed_form", Kind::Df)
                .unwrap()
                .estimate,
            4.0
        );
    }

    #[test]
    fn hetero_small() {
        let r = run_hetero_ridge_check(3, &McConfig::new(2000, 3)).unwrap();
        assert!(r.max_reduction_error < 1e-12);
        assert_eq!(r.monotone_violations, 0);
        assert_eq!(r.result.rows.len(), 6);
    }
}
