//! Monte Carlo and finite-difference estimators of optimism.
//!
//! Replicate `r` trains on the draw from substream `r` and, when test error
//! is requested, evaluates on an independent draw from substream `R + r`.
//! Replicates are split into `B` contiguous, near-equal batches. Each batch is folded
//! sequentially and batches are merged in index order, so every estimate is
//! bit-identical whatever the size of the rayon pool. Standard errors are
//! the spread of the `B` per-batch estimates divided by `√B`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::fitter::Fitter;
use crate::model::{draw, training_error, Method, NoiseKind, NoiseModel, OptimismEstimate};
use crate::rng::RngStream;
use crate::{Scalar, Vector};

pub const DEFAULT_SEED: u64 = 20240101;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub replicates: u64,
    pub batches: u64,
    pub seed: u64,
    pub fd_epsilon: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            replicates: 5000,
            batches: 50,
            seed: DEFAULT_SEED,
            fd_epsilon: 1e-5,
        }
    }
}

impl McConfig {
    /// `B = min(50, ⌊R/2⌋)` batches.
    pub fn new(replicates: u64, seed: u64) -> Self {
        Self {
            replicates,
            batches: (replicates / 2).min(50),
            seed,
            ..Self::default()
        }
    }

    pub fn with_batches(self, batches: u64) -> Self {
        Self { batches, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 4 {
            return Err(Error::invalid("need at least 4 replicates"));
        }
        if self.batches < 2 {
            return Err(Error::invalid("need at least 2 batches"));
        }
        if self.replicates / self.batches < 2 {
            return Err(Error::invalid("each batch needs at least 2 replicates"));
        }
        if !(self.fd_epsilon > 0.0) {
            return Err(Error::invalid("fd_epsilon must be positive"));
        }
        Ok(())
    }

    fn batch_range(&self, b: u64) -> std::ops::Range<u64> {
        let edge = |k: u64| k * self.replicates / self.batches;
        edge(b)..edge(b + 1)
    }
}

/// A sample mean with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate<T: Scalar> {
    pub value: T,
    pub stderr: T,
    pub replicates: u64,
}

/// Training error, test error and their per-replicate difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimates<T: Scalar> {
    pub train: MeanEstimate<T>,
    pub pred: MeanEstimate<T>,
    /// `pred − train`; estimates the optimism directly.
    pub gap: MeanEstimate<T>,
}

/// Everything one pass over the replicates can produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSummary<T: Scalar> {
    pub covariance: OptimismEstimate<T>,
    pub stein: Option<OptimismEstimate<T>>,
    pub errors: Option<ErrorEstimates<T>>,
}

#[derive(Debug, Clone, Copy)]
pub struct PassOptions<T: Scalar> {
    /// Noise variance for the Stein average; `None` skips it.
    pub stein_sigma2: Option<T>,
    pub errors: bool,
}

impl<T: Scalar> Default for PassOptions<T> {
    fn default() -> Self {
        Self {
            stein_sigma2: None,
            errors: false,
        }
    }
}

/// Streaming covariance of `(μ̂_i, y_i)` per coordinate, plus scalar means.
#[derive(Debug, Clone)]
struct Accumulator<T: Scalar> {
    count: u64,
    mean_fit: Vector<T>,
    mean_obs: Vector<T>,
    comoment: Vector<T>,
    divergence: T,
    train: T,
    pred: T,
    gap: T,
}

impl<T: Scalar> Accumulator<T> {
    fn new(n: usize) -> Self {
        Self {
            count: 0,
            mean_fit: Vector::zeros(n),
            mean_obs: Vector::zeros(n),
            comoment: Vector::zeros(n),
            divergence: T::zero(),
            train: T::zero(),
            pred: T::zero(),
            gap: T::zero(),
        }
    }

    fn push(&mut self, fit: &Vector<T>, obs: &Vector<T>, sample: &Sample<T>) {
        self.count += 1;
        let k = T::lit(self.count as f64);
        for i in 0..obs.len() {
            let dy = obs[i] - self.mean_obs[i];
            self.mean_obs[i] += dy / k;
            let m = self.mean_fit[i];
            self.mean_fit[i] = m + (fit[i] - m) / k;
            self.comoment[i] += (fit[i] - self.mean_fit[i]) * dy;
        }
        // Running means of the scalar series.
        self.divergence += (sample.divergence - self.divergence) / k;
        self.train += (sample.train - self.train) / k;
        self.pred += (sample.pred - self.pred) / k;
        self.gap += (sample.pred - sample.train - self.gap) / k;
    }

    fn merge(&mut self, other: &Self) {
        let (na, nb) = (T::lit(self.count as f64), T::lit(other.count as f64));
        let total = na + nb;
        for i in 0..self.mean_obs.len() {
            let dy = other.mean_obs[i] - self.mean_obs[i];
            let dm = other.mean_fit[i] - self.mean_fit[i];
            self.comoment[i] += other.comoment[i] + dm * dy * na * nb / total;
            self.mean_obs[i] += dy * nb / total;
            self.mean_fit[i] += dm * nb / total;
        }
        let blend = |a: T, b: T| (a * na + b * nb) / total;
        self.divergence = blend(self.divergence, other.divergence);
        self.train = blend(self.train, other.train);
        self.pred = blend(self.pred, other.pred);
        self.gap = blend(self.gap, other.gap);
        self.count += other.count;
    }

    /// `(2/n) Σ_i cov(μ̂_i, y_i)` with the `1/(count − 1)` normalization.
    fn omega(&self) -> T {
        let n = T::lit(self.mean_obs.len() as f64);
        let denom = T::lit((self.count - 1) as f64);
        T::lit(2.0) * self.comoment.sum() / (denom * n)
    }
}

struct Sample<T: Scalar> {
    divergence: T,
    train: T,
    pred: T,
}

fn batch_stderr<T: Scalar>(values: &[T]) -> T {
    let b = T::lit(values.len() as f64);
    let mean = values.iter().fold(T::zero(), |a, v| a + *v) / b;
    let ss = values
        .iter()
        .fold(T::zero(), |a, v| a + (*v - mean) * (*v - mean));
    (ss / (b - T::one()) / b).sqrt()
}

fn mean_estimate<T: Scalar>(value: T, batches: &[T], replicates: u64) -> MeanEstimate<T> {
    MeanEstimate {
        value,
        stderr: batch_stderr(batches),
        replicates,
    }
}

fn stein_variance<T: Scalar>(noise: &NoiseModel<T>) -> Result<()> {
    match noise.kind() {
        NoiseKind::GaussianIso { .. } => Ok(()),
        NoiseKind::GaussianDiag { .. } if noise.common_variance().is_some() => Ok(()),
        NoiseKind::GaussianDiag { .. } => Err(Error::invalid(
            "Stein average needs homoscedastic gaussian noise",
        )),
        other => Err(Error::NonGaussian(other.name())),
    }
}

/// One pass over all replicates producing the covariance estimate and,
/// on request, the Stein average and the train/test errors.
pub fn mc_pass<T: Scalar, F: Fitter<T> + ?Sized>(
    f: &F,
    noise: &NoiseModel<T>,
    cfg: &McConfig,
    opts: PassOptions<T>,
) -> Result<McSummary<T>> {
    cfg.validate()?;
    if let Some(sigma2) = opts.stein_sigma2 {
        stein_variance(noise)?;
        if !(sigma2 > T::zero()) {
            return Err(Error::invalid("sigma2 must be positive"));
        }
    }
    let n = noise.n();
    let replicates = cfg.replicates;
    let eps = T::lit(cfg.fd_epsilon);

    let run_replicate = |r: u64| -> Result<(Vector<T>, Vector<T>, Sample<T>)> {
        let y = draw(noise, RngStream::new(cfg.seed, r)).into_inner();
        let fit = f.fit(&y)?;
        check_len(n, fit.len())?;
        let divergence = match opts.stein_sigma2 {
            Some(_) => match f.divergence(&y) {
                Some(d) => d?,
                None => finite_difference_divergence(f, &y, eps)?,
            },
            None => T::zero(),
        };
        let (train, pred) = if opts.errors {
            let y_new = draw(noise, RngStream::new(cfg.seed, replicates + r)).into_inner();
            (training_error(&fit, &y)?, training_error(&fit, &y_new)?)
        } else {
            (T::zero(), T::zero())
        };
        Ok((
            fit,
            y,
            Sample {
                divergence,
                train,
                pred,
            },
        ))
    };

    let batches: Vec<Accumulator<T>> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::new(n);
            for r in cfg.batch_range(b) {
                let (fit, y, sample) = run_replicate(r).map_err(|e| Error::Replicate {
                    replicate: r,
                    source: Box::new(e),
                })?;
                acc.push(&fit, &y, &sample);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut total = batches[0].clone();
    for b in &batches[1..] {
        total.merge(b);
    }

    let batch_omegas: Vec<T> = batches.iter().map(Accumulator::omega).collect();
    let covariance = OptimismEstimate {
        value: total.omega(),
        stderr: batch_stderr(&batch_omegas),
        method: Method::CovarianceMc,
        replicates,
    };

    let stein = opts.stein_sigma2.map(|sigma2| {
        let scale = T::lit(2.0) * sigma2 / T::lit(n as f64);
        let per_batch: Vec<T> = batches.iter().map(|a| a.divergence).collect();
        OptimismEstimate {
            value: scale * total.divergence,
            stderr: scale * batch_stderr(&per_batch),
            method: Method::SteinMc,
            replicates,
        }
    });

    let errors = opts.errors.then(|| {
        let col = |get: fn(&Accumulator<T>) -> T| -> Vec<T> { batches.iter().map(get).collect() };
        ErrorEstimates {
            train: mean_estimate(total.train, &col(|a| a.train), replicates),
            pred: mean_estimate(total.pred, &col(|a| a.pred), replicates),
            gap: mean_estimate(total.gap, &col(|a| a.gap), replicates),
        }
    });

    Ok(McSummary {
        covariance,
        stein,
        errors,
    })
}

/// `ω̂ = (2/n) Σ_i ĉov(μ̂_i, y_i)` over `R` simulated datasets.
pub fn mc_optimism_covariance<T: Scalar, F: Fitter<T> + ?Sized>(
    f: &F,
    noise: &NoiseModel<T>,
    cfg: &McConfig,
) -> Result<OptimismEstimate<T>> {
    Ok(mc_pass(f, noise, cfg, PassOptions::default())?.covariance)
}

/// `ω̂ = (2σ²/n) · mean divergence`, using the fitter's analytic
/// divergence or else central differences. Errors on non-gaussian noise.
pub fn mc_optimism_stein<T: Scalar, F: Fitter<T> + ?Sized>(
    f: &F,
    noise: &NoiseModel<T>,
    sigma2: T,
    cfg: &McConfig,
) -> Result<OptimismEstimate<T>> {
    let opts = PassOptions {
        stein_sigma2: Some(sigma2),
        errors: false,
    };
    Ok(mc_pass(f, noise, cfg, opts)?
        .stein
        .expect("stein requested"))
}

/// Mean training error and mean error against an independent test draw.
pub fn mc_errors<T: Scalar, F: Fitter<T> + ?Sized>(
    f: &F,
    noise: &NoiseModel<T>,
    cfg: &McConfig,
) -> Result<ErrorEstimates<T>> {
    let opts = PassOptions {
        stein_sigma2: None,
        errors: true,
    };
    Ok(mc_pass(f, noise, cfg, opts)?
        .errors
        .expect("errors requested"))
}

fn central_differences<T: Scalar, F: Fitter<T> + ?Sized>(
    f: &F,
    y: &Vector<T>,
    eps: T,
) -> Result<Vector<T>> {
    if !(eps > T::zero()) {
        return Err(Error::invalid("eps must be positive"));
    }
    let mut out = Vector::zeros(y.len());
    let mut probe = y.clone();
    for i in 0..y.len() {
        let h = eps * (T::one() + y[i].abs());
        probe[i] = y[i] + h;
        let up = f.fit(&probe)?;
        probe[i] = y[i] - h;
        let down = f.fit(&probe)?;
        probe[i] = y[i];
        check_len(y.len(), up.len())?;
        out[i] = (up[i] - down[i]) / (T::lit(2.0) * h);
    }
    Ok(out)
}

/// `Σ_i [μ̂_i(y + h_i e_i) − μ̂_i(y − h_i e_i)] / (2h_i)` with
/// `h_i = eps · (1 + |y_i|)`.
pub fn finite_difference_divergence<T: Scalar, F: Fitter<T> + ?Sized>(
    f: &F,
    y: &Vector<T>,
    eps: T,
) -> Result<T> {
    Ok(central_differences(f, y, eps)?.sum())
}

/// Largest `∂̂_i small − ∂̂_i large` over coordinates, from central
/// differences. Nonpositive when `small` is dominated everywhere.
pub fn dominance_margin<T, S, L>(small: &S, large: &L, y: &Vector<T>, eps: T) -> Result<T>
where
    T: Scalar,
    S: Fitter<T> + ?Sized,
    L: Fitter<T> + ?Sized,
{
    let ds = central_differences(small, y, eps)?;
    let dl = central_differences(large, y, eps)?;
    Ok((ds - dl).max())
}

/// True when every diagonal Jacobian entry of `small` is at most that of
/// `large` plus `1e-8`.
pub fn per_coordinate_dominance<T, S, L>(
    small: &S,
    large: &L,
    y: &Vector<T>,
    eps: T,
) -> Result<bool>
where
    T: Scalar,
    S: Fitter<T> + ?Sized,
    L: Fitter<T> + ?Sized,
{
    Ok(dominance_margin(small, large, y, eps)? <= T::lit(1e-8))
}
