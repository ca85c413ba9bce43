//! Projected gradient for least squares over a convex coefficient set.

use crate::error::{check_len, Error, Result};
use crate::model::DesignMatrix;
use crate::{Scalar, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGradientResult<T: Scalar> {
    pub beta: Vector<T>,
    pub iterations: usize,
}

/// Minimizes `‖y − Xβ‖²` over the set whose Euclidean projection is
/// `project`, with fixed step `1/(2 d_max²)` from `β = 0`.
///
/// Stops when a step moves no coefficient by more than
/// `tol · (1 + ‖β‖_∞)`; the objective is then stationary to the same
/// order and the iterate is feasible by construction.
pub fn projected_gradient<T, P>(
    x: &DesignMatrix<T>,
    y: &Vector<T>,
    project: P,
    tol: T,
    max_iter: usize,
) -> Result<ProjectedGradientResult<T>>
where
    T: Scalar,
    P: Fn(&Vector<T>) -> Result<Vector<T>>,
{
    check_len(x.n(), y.len())?;
    if !(tol > T::zero()) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let gram = x.gram();
    let xty = x.transpose_apply(y);
    let dmax = x.max_singular_value();
    let mut beta = project(&Vector::zeros(x.p()))?;
    if dmax == T::zero() {
        return Ok(ProjectedGradientResult {
            beta,
            iterations: 0,
        });
    }
    let inv = T::one() / (dmax * dmax);
    for it in 1..=max_iter {
        let step = (&xty - gram * &beta) * inv;
        let next = project(&(&beta + step))?;
        let moved = (&next - &beta).amax();
        beta = next;
        if moved <= tol * (T::one() + beta.amax()) {
            return Ok(ProjectedGradientResult {
                beta,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "projected gradient",
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projections::{project_ball, project_ellipsoid};
    use crate::rng::RngStream;
    use crate::smoothers::RidgeSpec;
    use crate::Matrix;
    use std::sync::Arc;

    #[test]
    fn unconstrained_reaches_ols() {
        let mut g = RngStream::new(1, 0).generator();
        let x = Arc::new(
            DesignMatrix::new(Matrix::from_fn(20, 3, |_, _| g.standard_normal())).unwrap(),
        );
        let y = Vector::from_fn(20, |_, _| g.standard_normal());
        let res = projected_gradient(&x, &y, |b| Ok(b.clone()), 1e-13, 100_000).unwrap();
        let ols = RidgeSpec::new(x.clone(), 0.0)
            .unwrap()
            .coefficients(&y)
            .unwrap();
        assert!((res.beta - ols).amax() < 1e-9);
    }

    #[test]
    fn ball_constraint_matches_ridge_duality() {
        // Constrained ridge at s = ‖β̂(λ)‖ reproduces the penalized fit.
        let mut g = RngStream::new(2, 0).generator();
        let x = Arc::new(
            DesignMatrix::new(Matrix::from_fn(25, 4, |_, _| g.standard_normal())).unwrap(),
        );
        let y = Vector::from_fn(25, |_, _| 2.0 * g.standard_normal());
        let spec = RidgeSpec::new(x.clone(), 3.0).unwrap();
        let beta = spec.coefficients(&y).unwrap();
        let r = beta.norm();
        let res = projected_gradient(&x, &y, |b| Ok(project_ball(b, r)), 1e-14, 1_000_000).unwrap();
        assert!((x.apply(&res.beta) - x.apply(&beta)).amax() < 1e-8);
    }

    #[test]
    fn ellipsoid_constraint_is_feasible() {
        let mut g = RngStream::new(3, 0).generator();
        let x = Arc::new(
            DesignMatrix::new(Matrix::from_fn(15, 4, |_, _| g.standard_normal())).unwrap(),
        );
        let y = Vector::from_fn(15, |_, _| 3.0 * g.standard_normal());
        let a = Vector::from_column_slice(&[0.3, 0.5, 1.0, 0.2]);
        let res = projected_gradient(
            &x,
            &y,
            |b| project_ellipsoid(b, &a, 1e-12),
            1e-12,
            1_000_000,
        )
        .unwrap();
        let level: f64 = res
            .beta
            .iter()
            .zip(a.iter())
            .map(|(b, a)| (b / a).powi(2))
            .sum();
        assert!(level <= 1.0 + 1e-10);
    }
}
