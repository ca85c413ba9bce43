//! Penalized and constrained lasso.
//!
//! The penalized objective is `‖y − Xβ‖² + λ‖β‖₁` with no `1/2` or `1/n`
//! scaling, so coordinate descent soft-thresholds at `λ/2`. The constrained
//! problem `min ‖y − Xβ‖²  s.t. ‖β‖₁ ≤ s` is solved by projected gradient
//! with the fixed step `1/(2 d_max²)`. Both solvers work in Gram space
//! (`XᵀX`, `Xᵀy`) so each iteration costs `O(p²)` regardless of `n`.

use serde::{Deserialize, Serialize};

use crate::constrained::{projected_gradient, ProjectedGradientResult};
use crate::error::{check_len, Error, Result};
use crate::model::DesignMatrix;
use crate::projections::project_l1_ball;
use crate::{Scalar, Vector};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200_000;
/// Relative slack under which the L1 constraint counts as binding.
pub const ACTIVE_TOL: f64 = 1e-6;
/// Relative magnitude under which a coefficient counts as zero.
pub const ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "form")]
pub enum LassoForm<T: Scalar> {
    Penalized { lambda: T },
    Constrained { radius: T, constraint_active: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoSolution<T: Scalar> {
    pub beta: Vector<T>,
    pub mu_hat: Vector<T>,
    /// Indices of the nonzero coefficients, ascending.
    pub active_set: Vec<usize>,
    pub form: LassoForm<T>,
    pub iterations: usize,
}

impl<T: Scalar> LassoSolution<T> {
    pub fn l1_norm(&self) -> T {
        l1(&self.beta)
    }
}

fn l1<T: Scalar>(b: &Vector<T>) -> T {
    b.iter().fold(T::zero(), |acc, v| acc + v.abs())
}

fn soft_threshold<T: Scalar>(z: T, level: T) -> T {
    if z > level {
        z - level
    } else if z < -level {
        z + level
    } else {
        T::zero()
    }
}

fn active_set<T: Scalar>(beta: &Vector<T>) -> Vec<usize> {
    let scale = beta.amax().max(T::one());
    let cutoff = T::lit(ZERO_TOL) * scale;
    (0..beta.len())
        .filter(|&j| beta[j].abs() > cutoff)
        .collect()
}

/// `‖y − Xβ‖² + λ‖β‖₁`.
pub fn penalized_objective<T: Scalar>(
    x: &DesignMatrix<T>,
    y: &Vector<T>,
    beta: &Vector<T>,
    lambda: T,
) -> T {
    (y - x.apply(beta)).norm_squared() + lambda * l1(beta)
}

fn kkt_satisfied<T: Scalar>(corr: &Vector<T>, beta: &Vector<T>, lambda: T, tol: T) -> bool {
    let two = T::lit(2.0);
    (0..beta.len()).all(|j| {
        let g = two * corr[j];
        if beta[j] != T::zero() {
            (g - lambda * beta[j].signum()).abs() <= tol * (T::one() + lambda)
        } else {
            g.abs() <= lambda + tol
        }
    })
}

fn check_inputs<T: Scalar>(x: &DesignMatrix<T>, y: &Vector<T>, tol: T) -> Result<()> {
    check_len(x.n(), y.len())?;
    if !(tol > T::zero()) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    Ok(())
}

fn coordinate_descent<T: Scalar>(
    x: &DesignMatrix<T>,
    y: &Vector<T>,
    lambda: T,
    tol: T,
    max_iter: usize,
    mut trace: Option<&mut Vec<T>>,
) -> Result<LassoSolution<T>> {
    check_inputs(x, y, tol)?;
    if !(lambda >= T::zero()) {
        return Err(Error::invalid("lasso penalty must be nonnegative"));
    }
    let gram = x.gram();
    let xty = x.transpose_apply(y);
    let p = x.p();
    let half = lambda / T::lit(2.0);
    let mut beta = Vector::zeros(p);
    // gram · beta, kept in step with beta.
    let mut fitted = Vector::zeros(p);

    if let Some(trace) = trace.as_deref_mut() {
        trace.push(penalized_objective(x, y, &beta, lambda));
    }
    for sweep in 1..=max_iter {
        for j in 0..p {
            let gjj = gram[(j, j)];
            if gjj <= T::zero() {
                continue;
            }
            let old = beta[j];
            let z = xty[j] - fitted[j] + gjj * old;
            let new = soft_threshold(z, half) / gjj;
            if new != old {
                beta[j] = new;
                let delta = new - old;
                fitted.axpy(delta, &gram.column(j), T::one());
            }
        }
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(penalized_objective(x, y, &beta, lambda));
        }
        fitted = gram * &beta;
        let corr = &xty - &fitted;
        if kkt_satisfied(&corr, &beta, lambda, tol) {
            return Ok(LassoSolution {
                mu_hat: x.apply(&beta),
                active_set: active_set(&beta),
                beta,
                form: LassoForm::Penalized { lambda },
                iterations: sweep,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "lasso coordinate descent",
        iterations: max_iter,
    })
}

/// Penalized lasso by cyclic coordinate descent, stopping once the KKT
/// conditions hold to `tol`.
pub fn lasso_penalized<T: Scalar>(
    x: &DesignMatrix<T>,
    y: &Vector<T>,
    lambda: T,
    tol: T,
    max_iter: usize,
) -> Result<LassoSolution<T>> {
    coordinate_descent(x, y, lambda, tol, max_iter, None)
}

/// As [`lasso_penalized`], also returning the objective before the first
/// sweep and after each sweep.
pub fn lasso_penalized_traced<T: Scalar>(
    x: &DesignMatrix<T>,
    y: &Vector<T>,
    lambda: T,
    tol: T,
    max_iter: usize,
) -> Result<(LassoSolution<T>, Vec<T>)> {
    let mut trace = Vec::new();
    let sol = coordinate_descent(x, y, lambda, tol, max_iter, Some(&mut trace))?;
    Ok((sol, trace))
}

/// Constrained lasso by projected gradient. Iterates until the projected
/// step moves no coefficient by more than `tol · (1 + ‖β‖_∞)`.
pub fn lasso_constrained<T: Scalar>(
    x: &DesignMatrix<T>,
    y: &Vector<T>,
    radius: T,
    tol: T,
    max_iter: usize,
) -> Result<LassoSolution<T>> {
    check_inputs(x, y, tol)?;
    if !(radius >= T::zero()) {
        return Err(Error::invalid("L1 radius must be nonnegative"));
    }
    let beta = if radius > T::zero() {
        projected_gradient(x, y, |b| Ok(project_l1_ball(b, radius)), tol, max_iter).map_err(
            |e| match e {
                Error::NoConvergence { iterations, .. } => Error::NoConvergence {
                    solver: "constrained lasso projected gradient",
                    iterations,
                },
                other => other,
            },
        )?
    } else {
        ProjectedGradientResult {
            beta: Vector::zeros(x.p()),
            iterations: 0,
        }
    };
    let ProjectedGradientResult { beta, iterations } = beta;
    let constraint_active = radius - l1(&beta) <= T::lit(ACTIVE_TOL) * (T::one() + radius);
    Ok(LassoSolution {
        mu_hat: x.apply(&beta),
        active_set: active_set(&beta),
        beta,
        form: LassoForm::Constrained {
            radius,
            constraint_active,
        },
        iterations,
    })
}

/// Stein df estimate of the penalized lasso: the active-set size.
pub fn stein_df_penalized<T: Scalar>(sol: &LassoSolution<T>) -> Result<usize> {
    match sol.form {
        LassoForm::Penalized { .. } => Ok(sol.active_set.len()),
        _ => Err(Error::WrongForm {
            expected: "penalized",
        }),
    }
}

/// Stein df estimate of the constrained lasso: the fit is the projection
/// onto a face of the constraint polytope, which loses one dimension when
/// the constraint binds.
pub fn stein_df_constrained<T: Scalar>(sol: &LassoSolution<T>) -> Result<usize> {
    match sol.form {
        LassoForm::Constrained {
            constraint_active, ..
        } => {
            let a = sol.active_set.len();
            Ok(if constraint_active && a >= 1 {
                a - 1
            } else {
                a
            })
        }
        _ => Err(Error::WrongForm {
            expected: "constrained",
        }),
    }
}
