//! Shared domain types: observations, design matrices with a cached SVD,
//! noise laws, and the error/df arithmetic every estimator reports in.

use std::ops::Deref;

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::rng::RngStream;
use crate::{Matrix, Scalar, Vector};

/// A response vector `y` with at least one entry, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector<T: Scalar>(Vector<T>);

impl<T: Scalar> ObservationVector<T> {
    pub fn new(values: Vector<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("observation vector is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("observation vector has non-finite entries"));
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[T]) -> Result<Self> {
        Self::new(Vector::from_column_slice(values))
    }

    pub fn into_inner(self) -> Vector<T> {
        self.0
    }
}

impl<T: Scalar> Deref for ObservationVector<T> {
    type Target = Vector<T>;

    fn deref(&self) -> &Vector<T> {
        &self.0
    }
}

/// An `n × p` design with its thin SVD `X = L·diag(d)·Rᵀ` and Gram matrix
/// `XᵀX`, both computed once at construction.
///
/// With `k = min(n, p)`, `left` is `n × k`, `right` is `p × k` and the `k`
/// singular values are nonincreasing.
#[derive(Debug, Clone)]
pub struct DesignMatrix<T: Scalar> {
    entries: Matrix<T>,
    left: Matrix<T>,
    singular_values: Vector<T>,
    right: Matrix<T>,
    gram: Matrix<T>,
}

impl<T: Scalar> DesignMatrix<T> {
    pub fn new(entries: Matrix<T>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid("design matrix has no rows or no columns"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("design matrix has non-finite entries"));
        }
        let svd = SVD::new(entries.clone(), true, true);
        let left = svd.u.expect("left singular vectors requested");
        let right = svd
            .v_t
            .expect("right singular vectors requested")
            .transpose();
        let gram = entries.transpose() * &entries;
        Ok(Self {
            entries,
            left,
            singular_values: svd.singular_values,
            right,
            gram,
        })
    }

    /// Builds from row-major data.
    pub fn from_row_slice(n: usize, p: usize, data: &[T]) -> Result<Self> {
        check_len(n * p, data.len())?;
        Self::new(Matrix::from_row_slice(n, p, data))
    }

    pub fn from_columns(columns: &[Vector<T>]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::invalid("design matrix has no columns"));
        };
        for c in columns {
            check_len(first.len(), c.len())?;
        }
        Self::new(Matrix::from_columns(columns))
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn p(&self) -> usize {
        self.entries.ncols()
    }

    pub fn left(&self) -> &Matrix<T> {
        &self.left
    }

    pub fn singular_values(&self) -> &Vector<T> {
        &self.singular_values
    }

    pub fn right(&self) -> &Matrix<T> {
        &self.right
    }

    pub fn gram(&self) -> &Matrix<T> {
        &self.gram
    }

    pub fn max_singular_value(&self) -> T {
        self.singular_values[0]
    }

    /// Numerical rank with the relative cutoff `d_j > tol · d_max`.
    pub fn rank(&self, tol: T) -> usize {
        let cutoff = tol * self.max_singular_value();
        self.singular_values.iter().filter(|&&d| d > cutoff).count()
    }

    /// True when the columns are linearly independent at the given relative
    /// tolerance.
    pub fn full_column_rank(&self, tol: T) -> bool {
        self.p() <= self.n() && self.rank(tol) == self.p()
    }

    pub fn apply(&self, beta: &Vector<T>) -> Vector<T> {
        &self.entries * beta
    }

    pub fn transpose_apply(&self, y: &Vector<T>) -> Vector<T> {
        self.entries.tr_mul(y)
    }
}

/// Law of the observation vector around its mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NoiseKind<T: Scalar> {
    GaussianIso {
        variance: T,
    },
    GaussianDiag {
        variances: Vec<T>,
    },
    /// Coordinate `index` is `U(lo, hi)`; every other coordinate is fixed
    /// at its mean.
    UniformComponent {
        index: usize,
        lo: T,
        hi: T,
    },
    Fixed,
}

impl<T: Scalar> NoiseKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::GaussianIso { .. } => "gaussian_iso",
            NoiseKind::GaussianDiag { .. } => "gaussian_diag",
            NoiseKind::UniformComponent { .. } => "uniform_component",
            NoiseKind::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<T: Scalar> {
    mean: Vector<T>,
    kind: NoiseKind<T>,
}

impl<T: Scalar> NoiseModel<T> {
    pub fn new(mean: Vector<T>, kind: NoiseKind<T>) -> Result<Self> {
        let mut mean = mean;
        if mean.is_empty() {
            return Err(Error::invalid("noise mean is empty"));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("noise mean has non-finite entries"));
        }
        match &kind {
            NoiseKind::GaussianIso { variance } => {
                if !(*variance >= T::zero()) || !variance.is_finite() {
                    return Err(Error::invalid("variance must be finite and nonnegative"));
                }
            }
            NoiseKind::GaussianDiag { variances } => {
                check_len(mean.len(), variances.len())?;
                if variances
                    .iter()
                    .any(|v| !(*v >= T::zero()) || !v.is_finite())
                {
                    return Err(Error::invalid("variances must be finite and nonnegative"));
                }
            }
            NoiseKind::UniformComponent { index, lo, hi } => {
                if *index >= mean.len() {
                    return Err(Error::invalid("uniform component index out of range"));
                }
                if !(*lo < *hi) {
                    return Err(Error::invalid("uniform component needs lo < hi"));
                }
                mean[*index] = (*lo + *hi) / T::lit(2.0);
            }
            NoiseKind::Fixed => {}
        }
        Ok(Self { mean, kind })
    }

    pub fn gaussian_iso(mean: Vector<T>, variance: T) -> Result<Self> {
        Self::new(mean, NoiseKind::GaussianIso { variance })
    }

    pub fn gaussian_diag(mean: Vector<T>, variances: Vec<T>) -> Result<Self> {
        Self::new(mean, NoiseKind::GaussianDiag { variances })
    }

    /// The mean entry at `index` is replaced by the interval midpoint.
    pub fn uniform_component(mean: Vector<T>, index: usize, lo: T, hi: T) -> Result<Self> {
        Self::new(mean, NoiseKind::UniformComponent { index, lo, hi })
    }

    pub fn fixed(mean: Vector<T>) -> Result<Self> {
        Self::new(mean, NoiseKind::Fixed)
    }

    pub fn mean(&self) -> &Vector<T> {
        &self.mean
    }

    pub fn kind(&self) -> &NoiseKind<T> {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.mean.len()
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(
            self.kind,
            NoiseKind::GaussianIso { .. } | NoiseKind::GaussianDiag { .. }
        )
    }

    /// Per-coordinate variances `var(y_i)`.
    pub fn variances(&self) -> Vector<T> {
        let n = self.n();
        match &self.kind {
            NoiseKind::GaussianIso { variance } => Vector::from_element(n, *variance),
            NoiseKind::GaussianDiag { variances } => Vector::from_column_slice(variances),
            NoiseKind::UniformComponent { index, lo, hi } => {
                let mut v = Vector::zeros(n);
                let w = *hi - *lo;
                v[*index] = w * w / T::lit(12.0);
                v
            }
            NoiseKind::Fixed => Vector::zeros(n),
        }
    }

    /// Average of the per-coordinate variances.
    pub fn mean_variance(&self) -> T {
        self.variances().sum() / T::lit(self.n() as f64)
    }

    /// The common variance when every coordinate has the same one.
    pub fn common_variance(&self) -> Option<T> {
        match &self.kind {
            NoiseKind::GaussianIso { variance } => Some(*variance),
            NoiseKind::GaussianDiag { variances } => {
                let first = variances[0];
                variances.iter().all(|v| *v == first).then_some(first)
            }
            NoiseKind::Fixed => Some(T::zero()),
            NoiseKind::UniformComponent { .. } => None,
        }
    }
}

/// Draws one observation vector. Gaussian laws consume exactly one standard
/// normal per coordinate in index order, zero-variance coordinates included,
/// so isotropic and diagonal laws with equal variances give identical
/// samples.
pub fn draw<T: Scalar>(noise: &NoiseModel<T>, stream: RngStream) -> ObservationVector<T> {
    let n = noise.n();
    let mean = &noise.mean;
    let values = match &noise.kind {
        NoiseKind::Fixed => mean.clone(),
        NoiseKind::GaussianIso { variance } => {
            let sd = variance.as_f64().sqrt();
            let mut g = stream.generator();
            Vector::from_fn(n, |i, _| {
                T::lit(mean[i].as_f64() + sd * g.standard_normal())
            })
        }
        NoiseKind::GaussianDiag { variances } => {
            let mut g = stream.generator();
            Vector::from_fn(n, |i, _| {
                let sd = variances[i].as_f64().sqrt();
                T::lit(mean[i].as_f64() + sd * g.standard_normal())
            })
        }
        NoiseKind::UniformComponent { index, lo, hi } => {
            let mut g = stream.generator();
            let mut y = mean.clone();
            y[*index] = T::lit(g.uniform(lo.as_f64(), hi.as_f64()));
            y
        }
    };
    ObservationVector(values)
}

/// `(1/n) Σ (μ̂_i − y_i)²`.
pub fn training_error<T: Scalar>(mu_hat: &Vector<T>, y: &Vector<T>) -> Result<T> {
    check_len(y.len(), mu_hat.len())?;
    if y.is_empty() {
        return Err(Error::invalid("empty vectors"));
    }
    Ok((mu_hat - y).norm_squared() / T::lit(y.len() as f64))
}

/// `df = ω·n / (2σ²)`.
pub fn df_from_optimism<T: Scalar>(omega: T, n: usize, sigma2: T) -> Result<T> {
    if !(sigma2 > T::zero()) {
        return Err(Error::invalid("sigma2 must be positive"));
    }
    Ok(omega * T::lit(n as f64) / (T::lit(2.0) * sigma2))
}

/// `ω = 2σ²·df / n`.
pub fn optimism_from_df<T: Scalar>(df: T, n: usize, sigma2: T) -> Result<T> {
    if !(sigma2 > T::zero()) {
        return Err(Error::invalid("sigma2 must be positive"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    Ok(T::lit(2.0) * sigma2 * df / T::lit(n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CovarianceMc,
    SteinMc,
    FiniteDifference,
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::CovarianceMc => "covariance_mc",
            Method::SteinMc => "stein_mc",
            Method::FiniteDifference => "finite_difference",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// An optimism value `ω` in per-observation squared-error units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimismEstimate<T: Scalar> {
    pub value: T,
    pub stderr: T,
    pub method: Method,
    pub replicates: u64,
}

impl<T: Scalar> OptimismEstimate<T> {
    pub fn closed_form(value: T) -> Self {
        Self {
            value,
            stderr: T::zero(),
            method: Method::ClosedForm,
            replicates: 0,
        }
    }

    /// The same estimate on the degrees-of-freedom scale.
    pub fn to_df(&self, n: usize, sigma2: T) -> Result<Self> {
        Ok(Self {
            value: df_from_optimism(self.value, n, sigma2)?,
            stderr: df_from_optimism(self.stderr, n, sigma2)?,
            ..*self
        })
    }

    /// Normal-theory 95% interval.
    pub fn ci95(&self) -> (T, T) {
        let half = T::lit(1.96) * self.stderr;
        (self.value - half, self.value + half)
    }

    /// `(self − other) / √(se₁² + se₂²)`; infinite when both errors vanish
    /// and the values differ.
    pub fn z_against(&self, other: &Self) -> T {
        let se = (self.stderr * self.stderr + other.stderr * other.stderr).sqrt();
        (self.value - other.value) / se
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> Vector<f64> {
        Vector::from_column_slice(x)
    }

    #[test]
    fn training_error_examples() {
        let y = v(&[3.0, 4.0]);
        assert_eq!(training_error(&y, &y).unwrap(), 0.0);
        assert_eq!(training_error(&v(&[0.0, 0.0]), &y).unwrap(), 12.5);
        assert_eq!(
            training_error(&v(&[1.0, 1.0]), &v(&[1.0, 3.0])).unwrap(),
            2.0
        );
    }

    #[test]
    fn training_error_rejects_mismatch() {
        assert_eq!(
            training_error(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(Error::LengthMismatch {
                expected: 2,
                actual: 1
            })
        );
    }

    #[test]
    fn df_conversion_examples() {
        let omega = 2.0 * 1.0 * 5.0 / 100.0;
        assert_relative_eq!(
            df_from_optimism(omega, 100, 1.0).unwrap(),
            5.0,
            epsilon = 1e-14
        );
        assert_eq!(df_from_optimism(0.0, 10, 1.0).unwrap(), 0.0);
        assert_eq!(df_from_optimism(2.0, 2, 1.0).unwrap(), 2.0);
        assert!(df_from_optimism(1.0, 2, 0.0).is_err());
        assert!(df_from_optimism(1.0, 2, -1.0).is_err());
    }

    #[test]
    fn df_round_trip() {
        for &(omega, n, s2) in &[(0.37, 17, 0.2), (1e-3, 1001, 0.02), (12.5, 3, 7.0)] {
            let df = df_from_optimism(omega, n, s2).unwrap();
            let back = optimism_from_df(df, n, s2).unwrap();
            assert_relative_eq!(back, omega, max_relative = 1e-14);
        }
    }

    #[test]
    fn fixed_and_zero_variance_draws_return_mean() {
        let mean = v(&[1.5, -2.0, 0.25]);
        let fixed = NoiseModel::fixed(mean.clone()).unwrap();
        assert_eq!(*draw(&fixed, RngStream::new(3, 9)), mean);
        let zero = NoiseModel::gaussian_iso(mean.clone(), 0.0).unwrap();
        assert_eq!(*draw(&zero, RngStream::new(3, 9)), mean);
    }

    #[test]
    fn gaussian_sample_mean_converges() {
        let mean = v(&[0.5, -1.0]);
        let noise = NoiseModel::gaussian_iso(mean.clone(), 1.0).unwrap();
        let reps = 100_000u64;
        let mut acc = Vector::zeros(2);
        for r in 0..reps {
            acc += &*draw(&noise, RngStream::new(42, r));
        }
        acc /= reps as f64;
        let bound = 4.0 / (reps as f64).sqrt();
        for i in 0..2 {
            assert!((acc[i] - mean[i]).abs() < bound, "coord {i}: {}", acc[i]);
        }
    }

    #[test]
    fn diag_with_equal_variances_matches_iso_bitwise() {
        let mean = v(&[0.0, 1.0, 2.0, 3.0]);
        let iso = NoiseModel::gaussian_iso(mean.clone(), 0.7).unwrap();
        let diag = NoiseModel::gaussian_diag(mean, vec![0.7; 4]).unwrap();
        for r in 0..50 {
            let s = RngStream::new(5, r);
            assert_eq!(*draw(&iso, s), *draw(&diag, s));
        }
    }

    #[test]
    fn uniform_component_law() {
        let noise = NoiseModel::uniform_component(v(&[9.0, 2.0]), 0, -1.0, 1.0).unwrap();
        assert_eq!(noise.mean()[0], 0.0);
        assert_relative_eq!(noise.variances()[0], 1.0 / 3.0);
        for r in 0..1000 {
            let y = draw(&noise, RngStream::new(1, r));
            assert!((-1.0..1.0).contains(&y[0]));
            assert_eq!(y[1], 2.0);
        }
    }

    #[test]
    fn noise_construction_rejects_bad_parameters() {
        assert!(NoiseModel::gaussian_iso(v(&[0.0]), -1.0).is_err());
        assert!(NoiseModel::gaussian_diag(v(&[0.0, 0.0]), vec![1.0]).is_err());
        assert!(NoiseModel::gaussian_diag(v(&[0.0]), vec![-0.1]).is_err());
        assert!(NoiseModel::uniform_component(v(&[0.0]), 0, 1.0, 1.0).is_err());
        assert!(NoiseModel::uniform_component(v(&[0.0]), 1, 0.0, 1.0).is_err());
        assert!(NoiseModel::fixed(v(&[f64::NAN])).is_err());
    }

    #[test]
    fn observation_vector_invariants() {
        assert!(ObservationVector::<f64>::from_slice(&[]).is_err());
        assert!(ObservationVector::from_slice(&[1.0, f64::INFINITY]).is_err());
        assert_eq!(ObservationVector::from_slice(&[1.0, 2.0]).unwrap().len(), 2);
    }

    fn check_svd(x: &Matrix<f64>) {
        let dm = DesignMatrix::new(x.clone()).unwrap();
        let d = dm.singular_values();
        let rebuilt = dm.left() * Matrix::from_diagonal(d) * dm.right().transpose();
        assert!((rebuilt - x).norm() <= 1e-10 * x.norm());
        for j in 1..d.len() {
            assert!(d[j - 1] >= d[j]);
        }
        let k = d.len();
        let lt = dm.left().transpose() * dm.left();
        let rt = dm.right().transpose() * dm.right();
        assert!((lt - Matrix::identity(k, k)).amax() < 1e-10);
        assert!((rt - Matrix::identity(k, k)).amax() < 1e-10);
    }

    #[test]
    fn svd_invariants() {
        let mut g = RngStream::new(8, 0).generator();
        for &(n, p) in &[(20, 5), (5, 5), (3, 6), (1001, 3)] {
            let x = Matrix::from_fn(n, p, |_, _| g.standard_normal());
            check_svd(&x);
        }
    }

    #[test]
    fn rank_of_deficient_design() {
        let x = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let dm = DesignMatrix::new(x).unwrap();
        assert_eq!(dm.rank(1e-10), 1);
        assert!(!dm.full_column_rank(1e-10));
    }

    #[test]
    fn f32_instantiation() {
        let dm = DesignMatrix::<f32>::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(dm.singular_values().as_slice(), &[2.0f32, 1.0]);
        let e = training_error(
            &Vector::from_column_slice(&[0.0f32, 0.0]),
            &Vector::from_column_slice(&[3.0f32, 4.0]),
        );
        assert_eq!(e.unwrap(), 12.5f32);
    }
}
