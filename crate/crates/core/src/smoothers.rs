//! Ridge and generalized ridge smoothers and their closed-form optimism.

use std::sync::Arc;

use nalgebra::Cholesky;

use crate::error::{check_len, Error, Result};
use crate::model::DesignMatrix;
use crate::{Matrix, Scalar, Vector};

/// Relative cutoff below which a singular value counts as zero.
const RANK_TOL: f64 = 1e-12;

/// `d² / (d² + λ)`, with zero singular values contributing nothing.
fn shrinkage<T: Scalar>(d: T, lambda: T) -> T {
    if d == T::zero() {
        T::zero()
    } else {
        d * d / (d * d + lambda)
    }
}

/// The linear map `μ̂ = S y` of a smoother.
#[derive(Debug, Clone, PartialEq)]
pub struct SmootherMatrix<T: Scalar> {
    matrix: Matrix<T>,
}

impl<T: Scalar> SmootherMatrix<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("smoother matrix must be square"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("smoother matrix has non-finite entries"));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        (&self.matrix - self.matrix.transpose()).amax() <= tol
    }

    pub fn apply(&self, y: &Vector<T>) -> Vector<T> {
        &self.matrix * y
    }
}

/// `tr(S)`, the equivalent degrees of freedom of a linear smoother.
pub fn trace_df<T: Scalar>(s: &SmootherMatrix<T>) -> T {
    s.matrix.trace()
}

/// Penalized ridge `argmin ‖y − Xβ‖² + λ βᵀKβ`, with `K = I` unless a
/// penalty matrix is supplied.
#[derive(Debug, Clone)]
pub struct RidgeSpec<T: Scalar> {
    design: Arc<DesignMatrix<T>>,
    lambda: T,
    penalty: Option<Matrix<T>>,
    // Factor of XᵀX + λK for the general path.
    factor: Option<Cholesky<T, nalgebra::Dyn>>,
}

impl<T: Scalar> RidgeSpec<T> {
    /// Plain ridge (`K = I`).
    pub fn new(design: Arc<DesignMatrix<T>>, lambda: T) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::invalid(
                "ridge penalty must be finite and nonnegative",
            ));
        }
        if lambda == T::zero() && !design.full_column_rank(T::lit(RANK_TOL)) {
            return Err(Error::Singular(
                "XᵀX is singular at λ = 0 for a rank-deficient design".into(),
            ));
        }
        Ok(Self {
            design,
            lambda,
            penalty: None,
            factor: None,
        })
    }

    /// Generalized ridge with a symmetric penalty matrix `K`. Indefinite `K`
    /// is accepted as long as `XᵀX + λK` stays positive definite.
    pub fn generalized(
        design: Arc<DesignMatrix<T>>,
        lambda: T,
        penalty: Matrix<T>,
    ) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::invalid(
                "ridge penalty must be finite and nonnegative",
            ));
        }
        let p = design.p();
        if penalty.nrows() != p || penalty.ncols() != p {
            return Err(Error::invalid(format!("penalty matrix must be {p}×{p}")));
        }
        if (&penalty - penalty.transpose()).amax() > T::lit(1e-10) {
            return Err(Error::invalid("penalty matrix is not symmetric"));
        }
        let system = design.gram() + &penalty * lambda;
        let factor = Cholesky::new(system)
            .ok_or_else(|| Error::Singular("XᵀX + λK is not positive definite".into()))?;
        Ok(Self {
            design,
            lambda,
            penalty: Some(penalty),
            factor: Some(factor),
        })
    }

    pub fn design(&self) -> &DesignMatrix<T> {
        &self.design
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn penalty(&self) -> Option<&Matrix<T>> {
        self.penalty.as_ref()
    }

    fn shrink_factors(&self) -> Vector<T> {
        self.design
            .singular_values()
            .map(|d| shrinkage(d, self.lambda))
    }

    /// `β̂ = (XᵀX + λK)⁻¹ Xᵀ y`.
    pub fn coefficients(&self, y: &Vector<T>) -> Result<Vector<T>> {
        check_len(self.design.n(), y.len())?;
        match &self.factor {
            Some(factor) => Ok(factor.solve(&self.design.transpose_apply(y))),
            None => {
                let d = self.design.singular_values();
                let scaled = self.design.left().tr_mul(y).zip_map(d, |c, d| {
                    if d == T::zero() {
                        T::zero()
                    } else {
                        c * d / (d * d + self.lambda)
                    }
                });
                Ok(self.design.right() * scaled)
            }
        }
    }

    /// `βᵀKβ` (or `‖β‖²` for plain ridge) at the fitted coefficients.
    pub fn penalty_value(&self, y: &Vector<T>) -> Result<T> {
        let beta = self.coefficients(y)?;
        Ok(match &self.penalty {
            Some(k) => beta.dot(&(k * &beta)),
            None => beta.norm_squared(),
        })
    }
}

/// `μ̂ = X(XᵀX + λK)⁻¹Xᵀy`: through the SVD for `K = I`, otherwise through
/// a Cholesky solve.
pub fn ridge_fit<T: Scalar>(spec: &RidgeSpec<T>, y: &Vector<T>) -> Result<Vector<T>> {
    check_len(spec.design.n(), y.len())?;
    match &spec.factor {
        Some(_) => Ok(spec.design.apply(&spec.coefficients(y)?)),
        None => {
            let left = spec.design.left();
            let coords = left.tr_mul(y).component_mul(&spec.shrink_factors());
            Ok(left * coords)
        }
    }
}

pub fn smoother_matrix<T: Scalar>(spec: &RidgeSpec<T>) -> Result<SmootherMatrix<T>> {
    let matrix = match &spec.factor {
        Some(factor) => {
            let x = spec.design.entries();
            x * factor.solve(&x.transpose())
        }
        None => {
            let left = spec.design.left();
            let scaled = left * Matrix::from_diagonal(&spec.shrink_factors());
            scaled * left.transpose()
        }
    };
    SmootherMatrix::new(matrix)
}

/// `Σ_j d_j² / (d_j² + λ)`: ridge degrees of freedom from singular values.
pub fn ridge_df_closed_form<T: Scalar>(singular_values: &[T], lambda: T) -> Result<T> {
    if !(lambda >= T::zero()) {
        return Err(Error::invalid("ridge penalty must be nonnegative"));
    }
    if singular_values.iter().any(|d| !(*d >= T::zero())) {
        return Err(Error::invalid("singular values must be nonnegative"));
    }
    Ok(singular_values.iter().map(|d| shrinkage(*d, lambda)).sum())
}

/// Ridge optimism under uncorrelated heteroscedastic noise:
/// `(2/n) Σ_i σ_i² Σ_j [d_j²/(d_j² + λ)] u_ij²`, with `u_ij` read from the
/// left singular vectors of `X`.
pub fn hetero_ridge_optimism<T: Scalar>(
    design: &DesignMatrix<T>,
    lambda: T,
    variances: &[T],
) -> Result<T> {
    check_len(design.n(), variances.len())?;
    if !(lambda >= T::zero()) {
        return Err(Error::invalid("ridge penalty must be nonnegative"));
    }
    if variances.iter().any(|v| !(*v >= T::zero())) {
        return Err(Error::invalid("variances must be nonnegative"));
    }
    let shrink = design.singular_values().map(|d| shrinkage(d, lambda));
    let left = design.left();
    let mut total = T::zero();
    for (i, s2) in variances.iter().enumerate() {
        let leverage: T = (0..left.ncols())
            .map(|j| shrink[j] * left[(i, j)] * left[(i, j)])
            .sum();
        total += *s2 * leverage;
    }
    Ok(T::lit(2.0) * total / T::lit(design.n() as f64))
}
