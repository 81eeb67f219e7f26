//! Exact Gaussian process conditionals on (possibly warped) inputs.
//!
//! Everything goes through one Cholesky factor of `K + σ_n² I`; nothing is
//! ever explicitly inverted.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{cross_gram, gram, KernelSpec};
use crate::levy::SubordinatorPath;

/// Variance entries more negative than this are treated as a failure.
pub const NEGATIVE_VARIANCE_SLACK: f64 = 1e-10;

/// Observations with homoscedastic Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    /// Raw inputs, one row per observation.
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub noise_variance: f64,
}

impl RegressionData {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, noise_variance: f64) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::param("regression data needs at least one observation"));
        }
        if x.nrows() != y.len() {
            return Err(Error::param(format!(
                "{} input rows but {} observations",
                x.nrows(),
                y.len()
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("inputs and observations must be finite"));
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::param(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        Ok(RegressionData {
            x,
            y,
            noise_variance,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_dims(&self) -> usize {
        self.x.ncols()
    }
}

/// Which stored sample produced a conditional posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRef {
    pub chain: usize,
    pub sweep: usize,
}

/// GP posterior at test points given one fixed warp.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPosterior {
    pub test_mean: DVector<f64>,
    pub test_cov: DMatrix<f64>,
    pub log_cond_lik: f64,
    pub path_ref: Option<SampleRef>,
}

/// Apply the path coordinate-wise to every row of `x`.
pub fn warp_inputs(path: &SubordinatorPath, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != path.n_dims() {
        return Err(Error::param(format!(
            "inputs have {} columns, path has {} dimensions",
            x.ncols(),
            path.n_dims()
        )));
    }
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for k in 0..x.ncols() {
        for i in 0..x.nrows() {
            out[(i, k)] = path
                .evaluate(x[(i, k)], k)
                .map_err(|e| e.context(format!("row {i}")))?;
        }
    }
    Ok(out)
}

/// Factorized GP on a fixed set of training coordinates.
pub struct FittedGp {
    coords: DMatrix<f64>,
    kernel: KernelSpec,
    chol: Cholesky<f64, Dyn>,
    weights: DVector<f64>,
    log_lik: f64,
}

impl FittedGp {
    pub fn fit(
        coords: &DMatrix<f64>,
        y: &DVector<f64>,
        kernel: &KernelSpec,
        noise_variance: f64,
    ) -> Result<Self> {
        let n = coords.nrows();
        let mut a = gram(coords, kernel, kernel.jitter);
        for i in 0..n {
            a[(i, i)] += noise_variance;
        }
        let chol = Cholesky::new(a).ok_or_else(|| {
            Error::numerical(format!(
                "Cholesky factorization of the {n}x{n} covariance failed \
                 (signal variance {}, noise variance {noise_variance}, jitter {})",
                kernel.signal_variance, kernel.jitter
            ))
        })?;
        let weights = chol.solve(y);
        let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let log_lik = -0.5 * y.dot(&weights) - 0.5 * log_det - 0.5 * n as f64 * (2.0 * PI).ln();
        if !log_lik.is_finite() {
            return Err(Error::numerical(format!("log likelihood is not finite ({log_lik})")));
        }
        Ok(FittedGp {
            coords: coords.clone(),
            kernel: *kernel,
            chol,
            weights,
            log_lik,
        })
    }

    /// `log N(y; 0, K + σ_n² I)`.
    pub fn log_likelihood(&self) -> f64 {
        self.log_lik
    }

    pub fn mean(&self, test: &DMatrix<f64>) -> DVector<f64> {
        cross_gram(test, &self.coords, &self.kernel) * &self.weights
    }

    /// Posterior mean and covariance at `test` coordinates.
    pub fn predict(&self, test: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let k_star = cross_gram(&self.coords, test, &self.kernel);
        let mean = k_star.tr_mul(&self.weights);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&k_star)
            .ok_or_else(|| Error::numerical("triangular solve failed"))?;
        let mut cov = gram(test, &self.kernel, self.kernel.jitter) - v.tr_mul(&v);
        let m = cov.nrows();
        for i in 0..m {
            for j in 0..i {
                let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                cov[(i, j)] = s;
                cov[(j, i)] = s;
            }
            let d = cov[(i, i)];
            if d < -NEGATIVE_VARIANCE_SLACK || !d.is_finite() {
                return Err(Error::numerical(format!(
                    "posterior variance {d:e} at test point {i} is negative"
                )));
            }
            if d < 0.0 {
                cov[(i, i)] = 0.0;
            }
        }
        Ok((mean, cov))
    }
}

/// Conditional posterior at `x_test` given the warp `path`.
pub fn posterior(
    data: &RegressionData,
    x_test: &DMatrix<f64>,
    path: &SubordinatorPath,
    kernel: &KernelSpec,
) -> Result<ConditionalPosterior> {
    let train = warp_inputs(path, &data.x)?;
    let test = warp_inputs(path, x_test)?;
    posterior_on_coords(&train, &data.y, data.noise_variance, &test, kernel)
}

/// Conditional posterior on coordinates that are already warped (or raw, for
/// the plain GP).
pub fn posterior_on_coords(
    train: &DMatrix<f64>,
    y: &DVector<f64>,
    noise_variance: f64,
    test: &DMatrix<f64>,
    kernel: &KernelSpec,
) -> Result<ConditionalPosterior> {
    let gp = FittedGp::fit(train, y, kernel, noise_variance)?;
    let (test_mean, test_cov) = gp.predict(test)?;
    Ok(ConditionalPosterior {
        test_mean,
        test_cov,
        log_cond_lik: gp.log_likelihood(),
        path_ref: None,
    })
}

/// `log p(y | W)`: the GP marginal likelihood on warped inputs.
pub fn log_conditional_likelihood(
    data: &RegressionData,
    path: &SubordinatorPath,
    kernel: &KernelSpec,
) -> Result<f64> {
    let train = warp_inputs(path, &data.x)?;
    log_likelihood_on_coords(&train, &data.y, data.noise_variance, kernel)
}

pub fn log_likelihood_on_coords(
    coords: &DMatrix<f64>,
    y: &DVector<f64>,
    noise_variance: f64,
    kernel: &KernelSpec,
) -> Result<f64> {
    Ok(FittedGp::fit(coords, y, kernel, noise_variance)?.log_likelihood())
}

/// Plain GP log marginal likelihood on raw inputs.
pub fn log_marginal_likelihood(data: &RegressionData, kernel: &KernelSpec) -> Result<f64> {
    log_likelihood_on_coords(&data.x, &data.y, data.noise_variance, kernel)
}

/// Log-spaced length-scale grid, inclusive at both ends.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && points >= 1) {
        return Err(Error::param(format!(
            "bad length-scale grid: min {min}, max {max}, points {points}"
        )));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Length scale on `grid` maximizing the plain GP marginal likelihood.
pub fn grid_search_length_scale(
    data: &RegressionData,
    kernel: &KernelSpec,
    grid: &[f64],
) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &l in grid {
        let ll = log_marginal_likelihood(data, &kernel.with_length_scale(l)?)?;
        if best.is_none_or(|(_, b)| ll > b) {
            best = Some((l, ll));
        }
    }
    best.ok_or_else(|| Error::param("empty length-scale grid"))
}
