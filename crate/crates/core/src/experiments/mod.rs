//! Scenario runners and their tabular output.
//!
//! Every runner returns a [`ScenarioResult`]: flat rows keyed by scenario,
//! grid parameter, estimator and estimate kind. Runners that certify a
//! property over random trials also return a report with the worst case.

mod lasso_example;
mod registry;
mod ridge_profile;
mod sweeps;
mod toy;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{mc_pass, McConfig, McSummary, PassOptions};
use crate::fitter::Fitter;
use crate::model::NoiseModel;

pub use lasso_example::{
    lasso_design, lasso_noise, run_lasso_counterexample, LassoGrids, LASSO_BETA, LASSO_N,
};
pub use registry::{find, run, RunOptions, Scenario, SCENARIOS};
pub use ridge_profile::{default_rl_grid, ridge_profile_noise, run_ridge_profile, ProfileNoise};
pub use sweeps::{
    genridge_df_path, run_genridge_monotonicity, run_hetero_ridge_check, run_ridge_df_check,
    run_theorem2_sweep, CoefficientConstraint, HeteroReport, MonotonicityReport, RidgeDfReport,
    Theorem2Report, DOMINANCE_EPS, DOMINANCE_TOL, GENRIDGE_LAMBDAS, MONOTONE_TOL,
};
pub use toy::{run_convexity_example, run_toy_segment_disk, ToyLaw};

pub const CSV_HEADER: [&str; 9] = [
    "scenario",
    "param_name",
    "param_value",
    "estimator",
    "kind",
    "estimate",
    "stderr",
    "replicates",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Omega,
    Df,
    Train,
    Pred,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Omega => "omega",
            Kind::Df => "df",
            Kind::Train => "train",
            Kind::Pred => "pred",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub scenario: String,
    pub param_name: String,
    pub param_value: f64,
    pub estimator: String,
    pub kind: Kind,
    pub estimate: f64,
    pub stderr: f64,
    pub replicates: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub rows: Vec<Row>,
}

impl ScenarioResult {
    /// Sorts by `(param_name, param_value, estimator)`; the sort is stable,
    /// so kinds keep their emission order.
    pub fn new(mut rows: Vec<Row>) -> Self {
        rows.sort_by(|a, b| {
            a.param_name
                .cmp(&b.param_name)
                .then(a.param_value.total_cmp(&b.param_value))
                .then(a.estimator.cmp(&b.estimator))
        });
        Self { rows }
    }

    /// Rows matching a parameter name, estimator and kind, in grid order.
    pub fn select<'a>(
        &'a self,
        param_name: &'a str,
        estimator: &'a str,
        kind: Kind,
    ) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| {
            r.param_name == param_name && r.estimator == estimator && r.kind == kind
        })
    }

    /// The single row at `param_value`, if present.
    pub fn get(
        &self,
        param_name: &str,
        param_value: f64,
        estimator: &str,
        kind: Kind,
    ) -> Option<&Row> {
        self.rows.iter().find(|r| {
            r.param_name == param_name
                && r.param_value == param_value
                && r.estimator == estimator
                && r.kind == kind
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for row in &self.rows {
            w.serialize(row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.rows).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Builds rows for one grid point and estimator.
pub(crate) struct RowContext<'a> {
    pub scenario: &'a str,
    pub param_name: &'a str,
    pub param_value: f64,
    pub seed: u64,
}

impl RowContext<'_> {
    pub fn row(
        &self,
        estimator: &str,
        kind: Kind,
        estimate: f64,
        stderr: f64,
        replicates: u64,
    ) -> Row {
        Row {
            scenario: self.scenario.to_string(),
            param_name: self.param_name.to_string(),
            param_value: self.param_value,
            estimator: estimator.to_string(),
            kind,
            estimate,
            stderr,
            replicates,
            seed: self.seed,
        }
    }

    /// Rows for `kinds` from one Monte Carlo pass. The `df` kind is `ω`
    /// rescaled by `n/(2σ²)`; `train` and `pred` come from the pass's test
    /// draws and are shared by every estimator of the pass.
    pub fn summary_rows(
        &self,
        summary: &McSummary<f64>,
        estimator: crate::model::Method,
        kinds: &[Kind],
        n: usize,
        sigma2: Option<f64>,
    ) -> Result<Vec<Row>> {
        let omega = match estimator {
            crate::model::Method::SteinMc => summary
                .stein
                .ok_or_else(|| Error::invalid("pass has no Stein estimate"))?,
            _ => summary.covariance,
        };
        let name = estimator.as_str();
        let mut rows = Vec::with_capacity(kinds.len());
        for kind in kinds {
            let row = match kind {
                Kind::Omega => self.row(name, *kind, omega.value, omega.stderr, omega.replicates),
                Kind::Df => {
                    let s2 = sigma2.ok_or_else(|| Error::invalid("df needs a noise variance"))?;
                    let df = omega.to_df(n, s2)?;
                    self.row(name, *kind, df.value, df.stderr, df.replicates)
                }
                Kind::Train | Kind::Pred => {
                    let e = summary
                        .errors
                        .ok_or_else(|| Error::invalid("pass has no error estimates"))?;
                    let m = if *kind == Kind::Train {
                        e.train
                    } else {
                        e.pred
                    };
                    self.row(name, *kind, m.value, m.stderr, m.replicates)
                }
            };
            rows.push(row);
        }
        Ok(rows)
    }
}

/// One pass that always records train and test errors.
pub(crate) fn pass_with_errors<F: Fitter<f64> + ?Sized>(
    f: &F,
    noise: &NoiseModel<f64>,
    mc: &McConfig,
    stein_sigma2: Option<f64>,
) -> Result<McSummary<f64>> {
    mc_pass(
        f,
        noise,
        mc,
        PassOptions {
            stein_sigma2,
            errors: true,
        },
    )
}
