//! Expected optimism and effective degrees of freedom for regularized
//! regression.
//!
//! The crate computes the optimism `ω = E_pred − E_train` of a modeling
//! approach (a deterministic map `y ↦ μ̂`) either in closed form (ridge and
//! generalized ridge smoothers), by Monte Carlo over the covariance
//! `(2/n) Σ cov(μ̂_i, y_i)`, or by averaging the divergence of the fit map.
//! It also ships the scenario runners that show regularization *reducing*
//! optimism is not a law: lasso, constrained ridge and toy projection
//! examples where the smaller model set has more optimism.
//!
//! Numerical kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file pin the `f64` instantiation used by
//! the experiments and the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constrained;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod fitter;
pub mod lasso;
pub mod model;
pub mod projections;
pub mod rng;
pub mod smoothers;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

pub use error::{Error, Result};
pub use estimators::{
    finite_difference_divergence, mc_errors, mc_optimism_covariance, mc_optimism_stein,
    per_coordinate_dominance, ErrorEstimates, McConfig,
};
pub use fitter::{Fitter, FnFitter, ProjectionFitter};
pub use lasso::{lasso_constrained, lasso_penalized, LassoForm, LassoSolution};
pub use model::{
    df_from_optimism, draw, optimism_from_df, training_error, DesignMatrix, Method, NoiseKind,
    NoiseModel, ObservationVector, OptimismEstimate,
};
pub use projections::ConvexSetSpec;
pub use rng::RngStream;
pub use smoothers::{
    hetero_ridge_optimism, ridge_df_closed_form, ridge_fit, smoother_matrix, trace_df, RidgeSpec,
    SmootherMatrix,
};

/// Real scalar the numerical kernels are generic over.
///
/// Random draws are always produced in `f64` and converted, so an `f32`
/// instantiation sees the same sample path rounded to single precision.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal or sample.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type Vector<T> = nalgebra::DVector<T>;
pub type Matrix<T> = nalgebra::DMatrix<T>;

pub type DesignMatrix64 = DesignMatrix<f64>;
pub type DesignMatrix32 = DesignMatrix<f32>;
pub type NoiseModel64 = NoiseModel<f64>;
pub type RidgeSpec64 = RidgeSpec<f64>;
pub type LassoSolution64 = LassoSolution<f64>;
pub type ConvexSet64 = ConvexSetSpec<f64>;
pub type Estimate64 = OptimismEstimate<f64>;
