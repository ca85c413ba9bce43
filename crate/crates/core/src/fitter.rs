//! Modeling approaches as deterministic maps `y ↦ μ̂`.

use std::sync::Arc;

use crate::error::Result;
use crate::lasso::{
    self, lasso_constrained, lasso_penalized, stein_df_constrained, stein_df_penalized,
};
use crate::model::DesignMatrix;
use crate::projections::ConvexSetSpec;
use crate::smoothers::{ridge_fit, smoother_matrix, trace_df, RidgeSpec};
use crate::{Scalar, Vector};

pub trait Fitter<T: Scalar>: Send + Sync {
    fn fit(&self, y: &Vector<T>) -> Result<Vector<T>>;

    /// `Σ_i ∂μ̂_i/∂y_i` at `y` when it is known in closed form.
    fn divergence(&self, _y: &Vector<T>) -> Option<Result<T>> {
        None
    }
}

impl<T: Scalar, F: Fitter<T> + ?Sized> Fitter<T> for &F {
    fn fit(&self, y: &Vector<T>) -> Result<Vector<T>> {
        (**self).fit(y)
    }

    fn divergence(&self, y: &Vector<T>) -> Option<Result<T>> {
        (**self).divergence(y)
    }
}

impl<T: Scalar, F: Fitter<T> + ?Sized> Fitter<T> for Arc<F> {
    fn fit(&self, y: &Vector<T>) -> Result<Vector<T>> {
        (**self).fit(y)
    }

    fn divergence(&self, y: &Vector<T>) -> Option<Result<T>> {
        (**self).divergence(y)
    }
}

type FitFn<T> = Box<dyn Fn(&Vector<T>) -> Result<Vector<T>> + Send + Sync>;
type DivergenceFn<T> = Box<dyn Fn(&Vector<T>) -> Result<T> + Send + Sync>;

/// Wraps a closure, optionally with its analytic divergence.
pub struct FnFitter<T: Scalar> {
    fit: FitFn<T>,
    divergence: Option<DivergenceFn<T>>,
}

impl<T: Scalar> FnFitter<T> {
    pub fn new(fit: impl Fn(&Vector<T>) -> Result<Vector<T>> + Send + Sync + 'static) -> Self {
        Self {
            fit: Box::new(fit),
            divergence: None,
        }
    }

    pub fn with_divergence(
        mut self,
        divergence: impl Fn(&Vector<T>) -> Result<T> + Send + Sync + 'static,
    ) -> Self {
        self.divergence = Some(Box::new(divergence));
        self
    }

    pub fn identity() -> Self {
        Self::new(|y| Ok(y.clone())).with_divergence(|y| Ok(T::lit(y.len() as f64)))
    }

    pub fn constant(value: Vector<T>) -> Self {
        Self::new(move |_| Ok(value.clone())).with_divergence(|_| Ok(T::zero()))
    }
}

impl<T: Scalar> Fitter<T> for FnFitter<T> {
    fn fit(&self, y: &Vector<T>) -> Result<Vector<T>> {
        (self.fit)(y)
    }

    fn divergence(&self, y: &Vector<T>) -> Option<Result<T>> {
        self.divergence.as_ref().map(|d| d(y))
    }
}

/// Euclidean projection onto a model set in observation space.
#[derive(Debug, Clone)]
pub struct ProjectionFitter<T: Scalar> {
    pub set: ConvexSetSpec<T>,
}

impl<T: Scalar> ProjectionFitter<T> {
    pub fn new(set: ConvexSetSpec<T>) -> Self {
        Self { set }
    }
}

impl<T: Scalar> Fitter<T> for ProjectionFitter<T> {
    fn fit(&self, y: &Vector<T>) -> Result<Vector<T>> {
        self.set.project(y)
    }
}

/// Ridge smoother; its divergence is the constant `tr(S)`.
#[derive(Debug, Clone)]
pub struct RidgeFitter<T: Scalar> {
    spec: RidgeSpec<T>,
    trace: T,
}

impl<T: Scalar> RidgeFitter<T> {
    pub fn new(spec: RidgeSpec<T>) -> Result<Self> {
        let trace = trace_df(&smoother_matrix(&spec)?);
        Ok(Self { spec, trace })
    }

    pub fn spec(&self) -> &RidgeSpec<T> {
        &self.spec
    }
}

impl<T: Scalar> Fitter<T> for RidgeFitter<T> {
    fn fit(&self, y: &Vector<T>) -> Result<Vector<T>> {
        ridge_fit(&self.spec, y)
    }

    fn divergence(&self, _y: &Vector<T>) -> Option<Result<T>> {
        Some(Ok(self.trace))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LassoParam<T: Scalar> {
    Penalty(T),
    Radius(T),
}

/// Lasso fit whose divergence is the Stein df of its form.
#[derive(Debug, Clone)]
pub struct LassoFitter<T: Scalar> {
    pub design: Arc<DesignMatrix<T>>,
    pub param: LassoParam<T>,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> LassoFitter<T> {
    pub fn penalized(design: Arc<DesignMatrix<T>>, lambda: T) -> Self {
        Self {
            design,
            param: LassoParam::Penalty(lambda),
            tol: T::lit(lasso::DEFAULT_TOL),
            max_iter: lasso::DEFAULT_MAX_ITER,
        }
    }

    pub fn constrained(design: Arc<DesignMatrix<T>>, radius: T) -> Self {
        Self {
            design,
            param: LassoParam::Radius(radius),
            tol: T::lit(1e-12),
            max_iter: lasso::DEFAULT_MAX_ITER,
        }
    }

    pub fn solve(&self, y: &Vector<T>) -> Result<lasso::LassoSolution<T>> {
        match self.param {
            LassoParam::Penalty(l) => lasso_penalized(&self.design, y, l, self.tol, self.max_iter),
            LassoParam::Radius(s) => lasso_constrained(&self.design, y, s, self.tol, self.max_iter),
        }
    }
}

impl<T: Scalar> Fitter<T> for LassoFitter<T> {
    fn fit(&self, y: &Vector<T>) -> Result<Vector<T>> {
        Ok(self.solve(y)?.mu_hat)
    }

    fn divergence(&self, y: &Vector<T>) -> Option<Result<T>> {
        Some(self.solve(y).and_then(|sol| {
            let df = match self.param {
                LassoParam::Penalty(_) => stein_df_penalized(&sol)?,
                LassoParam::Radius(_) => stein_df_constrained(&sol)?,
            };
            Ok(T::lit(df as f64))
        }))
    }
}

/// Least squares over `{Xβ : β ∈ C}` for a convex coefficient set `C`.
#[derive(Debug, Clone)]
pub struct ConstrainedLsFitter<T: Scalar> {
    pub design: Arc<DesignMatrix<T>>,
    pub coefficient_set: ConvexSetSpec<T>,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Fitter<T> for ConstrainedLsFitter<T> {
    fn fit(&self, y: &Vector<T>) -> Result<Vector<T>> {
        let beta = crate::constrained::projected_gradient(
            &self.design,
            y,
            |b| self.coefficient_set.project(b),
            self.tol,
            self.max_iter,
        )?
        .beta;
        Ok(self.design.apply(&beta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    #[test]
    fn identity_and_constant() {
        let y = Vector::from_column_slice(&[1.0, 2.0, 3.0]);
        let id = FnFitter::identity();
        assert_eq!(id.fit(&y).unwrap(), y);
        assert_eq!(id.divergence(&y).unwrap().unwrap(), 3.0);
        let c = FnFitter::constant(Vector::from_element(3, 0.5));
        assert_eq!(c.fit(&y).unwrap(), Vector::from_element(3, 0.5));
    }

    #[test]
    fn ridge_fitter_divergence_is_trace() {
        let x = Arc::new(
            DesignMatrix::new(Matrix::from_diagonal(&Vector::from_column_slice(&[
                2.0, 1.0,
            ])))
            .unwrap(),
        );
        let f = RidgeFitter::new(RidgeSpec::new(x, 1.0).unwrap()).unwrap();
        let y = Vector::<f64>::from_column_slice(&[1.0, 1.0]);
        assert!((f.divergence(&y).unwrap().unwrap() - 1.3).abs() < 1e-14);
    }
}
