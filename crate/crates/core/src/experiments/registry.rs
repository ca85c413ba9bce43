//! Named scenarios with their default constants.

use super::lasso_example::{run_lasso_counterexample, LassoGrids};
use super::ridge_profile::{default_rl_grid, run_ridge_profile, ProfileNoise};
use super::sweeps::{
    run_genridge_monotonicity, run_hetero_ridge_check, run_ridge_df_check, run_theorem2_sweep,
    CoefficientConstraint, GENRIDGE_LAMBDAS,
};
use super::toy::{run_convexity_example, run_toy_segment_disk, ToyLaw};
use super::ScenarioResult;
use crate::error::{Error, Result};
use crate::estimators::{McConfig, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub name: &'static str,
    /// One-line summary for listings.
    pub anchor: &'static str,
    /// Constants, grids and defaults.
    pub description: &'static str,
    pub default_replicates: u64,
    /// Trials for the randomized sweeps.
    pub default_trials: Option<u64>,
    pub has_grid: bool,
}

/// Sorted by name.
pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "convexity-example",
        anchor: "non-convex two-point set inside a line has more optimism",
        description: "y = (1, 0) + e, e ~ N(0, σ² I) with σ = 0.1 (n = 2)\n\
                      S = {(0, -1), (0, 1)} (not convex), L = vertical axis {y1 = 0}\n\
                      expected: ω_L = var(y2) = 0.01, ω_S = E|y2| = 0.1·sqrt(2/π) ≈ 0.0798\n\
                      estimator: covariance_mc, R = 1000000\n\
                      rows: param set = 0 (S) or 1 (L); kinds omega, train, pred",
        default_replicates: 1_000_000,
        default_trials: None,
        has_grid: false,
    },
    Scenario {
        name: "example-4-lasso",
        anchor: "lasso df non-monotone in λ and in s",
        description: "design: n=1001, p=3, unit-norm columns\n\
                      x1 = sqrt(1/(n-1)) for i < n, 0 at i = n\n\
                      x2 = ±sqrt(1/(n-1)) (+ for odd i) for i < n, 0 at i = n\n\
                      x3 = sqrt(3/(2(n-1))) for odd i < n, 0 for even i < n, 0.5 at i = n\n\
                      y = x1 + x2 - 0.1·x3 + e, e ~ N(0, 0.02) (variance; --noise-as-sd reads 0.02 as sd)\n\
                      penalized: λ grid = 21 log-spaced in [0.01, 2] plus {0.1, 0.5}\n\
                      constrained: s grid = 21 points in [0, 2.31]\n\
                      estimators: covariance_mc and stein_mc (|A|, or |A| - 1 when the L1 constraint binds), R=5000\n\
                      rows: param lambda or s; kinds df, omega, train, pred",
        default_replicates: 5000,
        default_trials: None,
        has_grid: true,
    },
    Scenario {
        name: "genridge-monotonicity",
        anchor: "generalized ridge df is monotone in λ for any PSD penalty",
        description: "per trial: X 20×5 standard normal, K = A·Aᵀ with A 5×k, k uniform in 1..=5\n\
                      df = tr(X(XᵀX + λK)⁻¹Xᵀ) on λ grid {0, 0.1, 1, 10, 100}\n\
                      trials = 100; violation tolerance 1e-9\n\
                      rows: param lambda; estimator trace; kind df averaged over trials",
        default_replicates: 0,
        default_trials: Some(100),
        has_grid: true,
    },
    Scenario {
        name: "hetero-ridge",
        anchor: "ridge optimism under heteroscedastic noise, closed form vs Monte Carlo",
        description: "per trial: X 30×4 standard normal, β standard normal, variances uniform in [0.2, 3]\n\
                      λ log-uniform in [0.01, 100]\n\
                      closed form: (2/n) Σ_i σ_i² Σ_j d_j²/(d_j² + λ) u_ij²\n\
                      trials = 20, R = 5000 per trial\n\
                      rows: param trial; estimators closed_form and covariance_mc; kind omega",
        default_replicates: 5000,
        default_trials: Some(20),
        has_grid: false,
    },
    Scenario {
        name: "ridge-closed-form",
        anchor: "ridge df Σ d²/(d² + λ) vs Monte Carlo",
        description: "per trial: X 50×5 standard normal, β standard normal, unit noise variance\n\
                      λ log-uniform in [0.01, 100]\n\
                      trials = 20, R = 5000 per trial\n\
                      rows: param trial; estimators closed_form and covariance_mc; kind df",
        default_replicates: 5000,
        default_trials: Some(20),
        has_grid: false,
    },
    Scenario {
        name: "ridge-ellipsoid-profile",
        anchor: "constrained ridge optimism rises then falls as the ellipse grows",
        description: "n = 2, ellipse radii (r_L, 0.1·r_L), smaller set r_S = 1\n\
                      y ~ N((3, 10), diag(0.1², 3²)) (--noise-as-variance: diag(0.1, 3))\n\
                      r_L grid = {1, 1.5, ..., 10}\n\
                      estimator: covariance_mc, R = 20000 per grid point, same seed at every point\n\
                      rows: param r_l; kinds omega, train, pred",
        default_replicates: 20_000,
        default_trials: None,
        has_grid: true,
    },
    Scenario {
        name: "theorem2-sweep",
        anchor: "convex constraints inside a subspace never add optimism",
        description: "per trial: X 15×4 standard normal, β standard normal, unit noise variance\n\
                      constraint on β: L1 ball (even trials) or axis ellipsoid (odd trials)\n\
                      dominance: central differences with ε = 1e-4 at 20 draws of y, tolerance 1e-6\n\
                      df: covariance_mc, R = 1000 per trial, checked against p + 3 SE\n\
                      trials = 100\n\
                      rows: param trial; estimators closed_form (OLS, df = p) and covariance_mc; kind df",
        default_replicates: 1000,
        default_trials: Some(100),
        has_grid: false,
    },
    Scenario {
        name: "toy-segment-disk",
        anchor: "segment inside the unit disk has more optimism",
        description: "y1 ~ U(-1, 1), y2 = 2 constant (n = 2)\n\
                      S = segment [-1, 1] × {0}, L = unit disk\n\
                      expected: ω_S = 1/3, ω_L ≈ 0.1556\n\
                      estimator: covariance_mc, R = 1000000\n\
                      rows: param set = 0 (S) or 1 (L); kinds omega, train, pred",
        default_replicates: 1_000_000,
        default_trials: None,
        has_grid: false,
    },
    Scenario {
        name: "toy-segment-disk-gaussian",
        anchor: "segment and disk under a gaussian law with the same moments",
        description: "y ~ N((0, 2), diag(1/3, 0)): y2 = 2 constant\n\
                      S = segment [-1, 1] × {0}, L = unit disk\n\
                      estimator: covariance_mc, R = 1000000\n\
                      rows: param set = 0 (S) or 1 (L); kinds omega, train, pred",
        default_replicates: 1_000_000,
        default_trials: None,
        has_grid: false,
    },
];

pub fn find(name: &str) -> Result<&'static Scenario> {
    SCENARIOS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub replicates: Option<u64>,
    pub trials: Option<u64>,
    /// Replaces the scenario's main grid (`λ`, `r_L`).
    pub grid: Option<Vec<f64>>,
    pub noise_as_sd: bool,
    pub profile_noise: ProfileNoise,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            replicates: None,
            trials: None,
            grid: None,
            noise_as_sd: false,
            profile_noise: ProfileNoise::default(),
        }
    }
}

/// Runs a scenario by name.
pub fn run(name: &str, opts: &RunOptions) -> Result<ScenarioResult> {
    let scenario = find(name)?;
    if opts.grid.is_some() && !scenario.has_grid {
        return Err(Error::invalid(format!(
            "scenario `{name}` has no grid to override"
        )));
    }
    let mc = McConfig::new(
        opts.replicates.unwrap_or(scenario.default_replicates),
        opts.seed,
    );
    let trials = opts.trials.or(scenario.default_trials).unwrap_or(1);
    let grid = |default: Vec<f64>| opts.grid.clone().unwrap_or(default);
    match name {
        "convexity-example" => run_convexity_example(&mc),
        "example-4-lasso" => {
            let grids = LassoGrids {
                lambda: grid(LassoGrids::default().lambda),
                ..LassoGrids::default()
            };
            run_lasso_counterexample(&mc, &grids, opts.noise_as_sd)
        }
        "genridge-monotonicity" => {
            Ok(
                run_genridge_monotonicity(trials, opts.seed, &grid(GENRIDGE_LAMBDAS.to_vec()))?
                    .result,
            )
        }
        "hetero-ridge" => Ok(run_hetero_ridge_check(trials, &mc)?.result),
        "ridge-closed-form" => Ok(run_ridge_df_check(trials, &mc)?.result),
        "ridge-ellipsoid-profile" => {
            run_ridge_profile(&mc, &grid(default_rl_grid()), opts.profile_noise)
        }
        "theorem2-sweep" => {
            Ok(run_theorem2_sweep(trials, &mc, CoefficientConstraint::Alternate)?.result)
        }
        "toy-segment-disk" => run_toy_segment_disk(&mc, ToyLaw::Uniform),
        "toy-segment-disk-gaussian" => run_toy_segment_disk(&mc, ToyLaw::Gaussian),
        _ => Err(Error::UnknownScenario(name.to_string())),
    }
}
