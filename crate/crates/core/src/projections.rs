//! Euclidean projections onto the model sets used by the scenarios.
//!
//! Every projection onto a closed convex set is non-expansive; the
//! finite-set projection is the one non-convex variant and exists to show
//! what goes wrong without convexity.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::{Matrix, Scalar, Vector};

pub const DEFAULT_ELLIPSOID_TOL: f64 = 1e-12;
const ELLIPSOID_MAX_ITER: usize = 500;

/// First coordinate clamped to `[lo, hi]`, every other coordinate zeroed.
pub fn project_segment<T: Scalar>(y: &Vector<T>, lo: T, hi: T) -> Vector<T> {
    let mut out = Vector::zeros(y.len());
    if !y.is_empty() {
        out[0] = y[0].clamp(lo, hi);
    }
    out
}

/// Closed ball of radius `r` around the origin.
pub fn project_ball<T: Scalar>(y: &Vector<T>, r: T) -> Vector<T> {
    let norm = y.norm();
    if norm <= r {
        y.clone()
    } else {
        y * (r / norm)
    }
}

/// Axis-aligned ellipsoid `{x : Σ x_i²/a_i² ≤ 1}`.
///
/// An exterior point maps to `x_i = a_i² y_i / (a_i² + t)` where `t > 0` is
/// the root of the secular function `Σ a_i² y_i² / (a_i² + t)² − 1`. The
/// function is convex and decreasing on `t > 0`, so Newton steps are taken
/// inside a bisection bracket `(0, max_i a_i ‖y‖]` and fall back to
/// bisection whenever they leave it.
pub fn project_ellipsoid<T: Scalar>(y: &Vector<T>, radii: &Vector<T>, tol: T) -> Result<Vector<T>> {
    check_len(y.len(), radii.len())?;
    if radii.iter().any(|a| !(*a > T::zero())) {
        return Err(Error::invalid("ellipsoid radii must be positive"));
    }
    if !(tol > T::zero()) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let level: T = y
        .iter()
        .zip(radii.iter())
        .map(|(v, a)| (*v / *a) * (*v / *a))
        .sum();
    if level <= T::one() {
        return Ok(y.clone());
    }

    let a2: Vec<T> = radii.iter().map(|a| *a * *a).collect();
    let w: Vec<T> = a2
        .iter()
        .zip(y.iter())
        .map(|(a2, v)| *a2 * *v * *v)
        .collect();
    // Value and derivative of the secular function.
    let secular = |t: T| -> (T, T) {
        let mut f = -T::one();
        let mut df = T::zero();
        for (a2, w) in a2.iter().zip(&w) {
            let q = T::one() / (*a2 + t);
            f += *w * q * q;
            df -= T::lit(2.0) * *w * q * q * q;
        }
        (f, df)
    };

    let amax = radii.iter().fold(T::zero(), |m, a| m.max(*a));
    let mut lo = T::zero();
    let mut hi = amax * y.norm();
    let mut t = T::zero();
    let eps = T::default_epsilon();
    let mut converged = false;
    for _ in 0..ELLIPSOID_MAX_ITER {
        let (f, df) = secular(t);
        if f.abs() <= tol {
            converged = true;
            break;
        }
        if f > T::zero() {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= T::lit(4.0) * eps * hi.max(T::one()) {
            converged = true;
            break;
        }
        let newton = t - f / df;
        t = if df < T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / T::lit(2.0)
        };
    }
    if !converged {
        return Err(Error::NoConvergence {
            solver: "ellipsoid secular equation",
            iterations: ELLIPSOID_MAX_ITER,
        });
    }
    Ok(Vector::from_fn(y.len(), |i, _| a2[i] * y[i] / (a2[i] + t)))
}

/// Euclidean projection onto `{β : ‖β‖₁ ≤ s}` by sorting magnitudes and
/// soft-thresholding at the level that lands on the sphere.
pub fn project_l1_ball<T: Scalar>(b: &Vector<T>, s: T) -> Vector<T> {
    let l1 = b.iter().fold(T::zero(), |acc, v| acc + v.abs());
    if l1 <= s {
        return b.clone();
    }
    if s <= T::zero() {
        return Vector::zeros(b.len());
    }
    let mut mags: Vec<T> = b.iter().map(|v| v.abs()).collect();
    mags.sort_by(|x, y| y.partial_cmp(x).expect("finite magnitudes"));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (j, u) in mags.iter().enumerate() {
        cumsum += *u;
        let candidate = (cumsum - s) / T::lit((j + 1) as f64);
        if *u > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    b.map(|v| {
        let m = v.abs() - theta;
        if m > T::zero() {
            m * v.signum()
        } else {
            T::zero()
        }
    })
}

/// `Q Qᵀ y` for a basis `Q` with orthonormal columns.
pub fn project_subspace<T: Scalar>(y: &Vector<T>, basis: &Matrix<T>) -> Vector<T> {
    basis * basis.tr_mul(y)
}

/// Nearest point of a finite set; ties go to the lowest index.
pub fn project_finite_set<T: Scalar>(y: &Vector<T>, points: &[Vector<T>]) -> Result<Vector<T>> {
    let mut best: Option<(T, &Vector<T>)> = None;
    for p in points {
        check_len(y.len(), p.len())?;
        let d = (y - p).norm_squared();
        match best {
            Some((bd, _)) if d >= bd => {}
            _ => best = Some((d, p)),
        }
    }
    best.map(|(_, p)| p.clone())
        .ok_or_else(|| Error::invalid("finite set is empty"))
}

/// A model set with an exact Euclidean projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum ConvexSetSpec<T: Scalar> {
    /// First coordinate in `[lo, hi]`, all others zero.
    Segment {
        lo: T,
        hi: T,
    },
    Ball {
        radius: T,
    },
    Ellipsoid {
        radii: Vec<T>,
    },
    /// `{β : ‖β‖₁ ≤ radius}` in coefficient space.
    L1Ball {
        radius: T,
    },
    /// Column span of `basis` (orthonormal columns, stored column-major).
    Subspace {
        dim: usize,
        rank: usize,
        basis: Vec<T>,
    },
    /// Not convex; kept for the counterexample that needs it.
    FiniteSet {
        points: Vec<Vec<T>>,
    },
}

impl<T: Scalar> ConvexSetSpec<T> {
    pub fn segment(lo: T, hi: T) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::invalid("segment needs lo <= hi"));
        }
        Ok(Self::Segment { lo, hi })
    }

    pub fn ball(radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::invalid("ball radius must be positive"));
        }
        Ok(Self::Ball { radius })
    }

    pub fn ellipsoid(radii: Vec<T>) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|a| !(*a > T::zero())) {
            return Err(Error::invalid("ellipsoid radii must be positive"));
        }
        Ok(Self::Ellipsoid { radii })
    }

    pub fn l1_ball(radius: T) -> Result<Self> {
        if !(radius >= T::zero()) {
            return Err(Error::invalid("l1 ball radius must be nonnegative"));
        }
        Ok(Self::L1Ball { radius })
    }

    pub fn subspace(basis: &Matrix<T>) -> Result<Self> {
        let k = basis.ncols();
        let gram = basis.tr_mul(basis);
        if (gram - Matrix::identity(k, k)).amax() > T::lit(1e-10) {
            return Err(Error::invalid("subspace basis is not orthonormal"));
        }
        Ok(Self::Subspace {
            dim: basis.nrows(),
            rank: k,
            basis: basis.as_slice().to_vec(),
        })
    }

    pub fn finite_set(points: Vec<Vec<T>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::invalid("finite set is empty"));
        };
        let n = first.len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::invalid("finite set points differ in dimension"));
        }
        Ok(Self::FiniteSet { points })
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, Self::FiniteSet { .. })
    }

    pub fn project(&self, y: &Vector<T>) -> Result<Vector<T>> {
        match self {
            Self::Segment { lo, hi } => Ok(project_segment(y, *lo, *hi)),
            Self::Ball { radius } => Ok(project_ball(y, *radius)),
            Self::Ellipsoid { radii } => project_ellipsoid(
                y,
                &Vector::from_column_slice(radii),
                T::lit(DEFAULT_ELLIPSOID_TOL),
            ),
            Self::L1Ball { radius } => Ok(project_l1_ball(y, *radius)),
            Self::Subspace { dim, rank, basis } => {
                check_len(*dim, y.len())?;
                let q = Matrix::from_column_slice(*dim, *rank, basis);
                Ok(project_subspace(y, &q))
            }
            Self::FiniteSet { points } => {
                let pts: Vec<Vector<T>> = points
                    .iter()
                    .map(|p| Vector::from_column_slice(p))
                    .collect();
                project_finite_set(y, &pts)
            }
        }
    }

    /// Membership up to an absolute slack `tol`.
    pub fn contains(&self, x: &Vector<T>, tol: T) -> bool {
        match self {
            Self::Segment { lo, hi } => {
                x[0] >= *lo - tol && x[0] <= *hi + tol && x.iter().skip(1).all(|v| v.abs() <= tol)
            }
            Self::Ball { radius } => x.norm() <= *radius + tol,
            Self::Ellipsoid { radii } => {
                let level: T = x
                    .iter()
                    .zip(radii)
                    .map(|(v, a)| (*v / *a) * (*v / *a))
                    .sum();
                level <= T::one() + tol
            }
            Self::L1Ball { radius } => x.iter().map(|v| v.abs()).sum::<T>() <= *radius + tol,
            Self::Subspace { .. } => self
                .project(x)
                .map(|p| (p - x).amax() <= tol)
                .unwrap_or(false),
            Self::FiniteSet { points } => points
                .iter()
                .any(|p| p.iter().zip(x.iter()).all(|(a, b)| (*a - *b).abs() <= tol)),
        }
    }
}
