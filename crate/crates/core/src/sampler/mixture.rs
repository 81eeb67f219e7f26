//! Moments of the Gaussian mixture formed by per-sample conditional posteriors.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gp::ConditionalPosterior;
use crate::levy::SubordinatorPath;

use super::chain::ProposalRecord;

/// Mixture mean `(1/N) Σ m̄_k` and covariance
/// `(1/N) Σ [K̄_k + (m̄_k − m)(m̄_k − m)ᵀ]`.
pub fn mixture_moments(samples: &[ConditionalPosterior]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let first = samples
        .first()
        .ok_or_else(|| Error::param("mixture needs at least one sample"))?;
    let m = first.test_mean.len();
    for (k, s) in samples.iter().enumerate() {
        if s.test_mean.len() != m || s.test_cov.shape() != (m, m) {
            return Err(Error::param(format!(
                "sample {k} has mean length {} and covariance {:?}, expected {m}",
                s.test_mean.len(),
                s.test_cov.shape()
            )));
        }
    }
    let n = samples.len() as f64;
    let mut mean = DVector::zeros(m);
    for s in samples {
        mean += &s.test_mean;
    }
    mean /= n;
    let mut cov = DMatrix::zeros(m, m);
    for s in samples {
        cov += &s.test_cov;
        let d = &s.test_mean - &mean;
        cov.ger(1.0, &d, &d, 1.0);
    }
    cov /= n;
    Ok((mean, cov))
}

/// Mixture moments of the predictive density: `σ_n² I` added to every
/// component covariance before aggregation.
pub fn predictive_moments(
    samples: &[ConditionalPosterior],
    noise_variance: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if noise_variance.is_nan() || noise_variance < 0.0 {
        return Err(Error::param(format!(
            "noise variance must be non-negative, got {noise_variance}"
        )));
    }
    let (mean, mut cov) = mixture_moments(samples)?;
    // the shift is identical for every component, so it commutes with the average
    for i in 0..cov.nrows() {
        cov[(i, i)] += noise_variance;
    }
    Ok((mean, cov))
}

/// Running mixture moments, updated one component at a time.
#[derive(Debug, Clone)]
pub struct MixtureAccumulator {
    n: usize,
    mean: DVector<f64>,
    avg_cov: DMatrix<f64>,
    scatter: DMatrix<f64>,
}

impl MixtureAccumulator {
    pub fn new(m: usize) -> Self {
        MixtureAccumulator {
            n: 0,
            mean: DVector::zeros(m),
            avg_cov: DMatrix::zeros(m, m),
            scatter: DMatrix::zeros(m, m),
        }
    }

    pub fn push(&mut self, sample: &ConditionalPosterior) -> Result<()> {
        let m = self.mean.len();
        if sample.test_mean.len() != m || sample.test_cov.shape() != (m, m) {
            return Err(Error::param("sample dimensions do not match the accumulator"));
        }
        self.n += 1;
        let w = 1.0 / self.n as f64;
        let delta = &sample.test_mean - &self.mean;
        self.mean.axpy(w, &delta, 1.0);
        let delta_after = &sample.test_mean - &self.mean;
        self.scatter.ger(1.0, &delta, &delta_after, 1.0);
        self.avg_cov += (&sample.test_cov - &self.avg_cov) * w;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn finish(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        if self.n == 0 {
            return Err(Error::param("mixture needs at least one sample"));
        }
        let mut cov = &self.avg_cov + &self.scatter / self.n as f64;
        cov = (&cov + cov.transpose()) * 0.5;
        Ok((self.mean.clone(), cov))
    }
}

/// Pooled MH-within-Gibbs output: conditional posteriors, their aggregate and
/// chain diagnostics.
#[derive(Debug, Clone)]
pub struct MixturePosterior {
    pub samples: Vec<ConditionalPosterior>,
    /// Subordinator path behind each entry of `samples`.
    pub paths: Vec<SubordinatorPath>,
    pub aggregate_mean: DVector<f64>,
    pub aggregate_cov: DMatrix<f64>,
    pub acceptance_rate: f64,
    pub accepted: usize,
    pub proposals: usize,
    pub avg_log_cond_lik: f64,
    pub std_log_cond_lik: f64,
    /// Per-chain proposal traces.
    pub traces: Vec<Vec<ProposalRecord>>,
}

pub(crate) fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl MixturePosterior {
    /// Merge independent chains by pooling their post-burn-in samples.
    pub fn pool(chains: Vec<MixturePosterior>) -> Result<Self> {
        if chains.is_empty() {
            return Err(Error::param("nothing to pool"));
        }
        if chains.len() == 1 {
            return Ok(chains.into_iter().next().unwrap());
        }
        let mut samples = Vec::new();
        let mut paths = Vec::new();
        let mut traces = Vec::new();
        let (mut accepted, mut proposals) = (0, 0);
        for c in chains {
            samples.extend(c.samples);
            paths.extend(c.paths);
            traces.extend(c.traces);
            accepted += c.accepted;
            proposals += c.proposals;
        }
        let (aggregate_mean, aggregate_cov) = mixture_moments(&samples)?;
        let lls: Vec<f64> = samples.iter().map(|s| s.log_cond_lik).collect();
        let (avg, std) = mean_and_std(&lls);
        Ok(MixturePosterior {
            samples,
            paths,
            aggregate_mean,
            aggregate_cov,
            acceptance_rate: if proposals == 0 { 0.0 } else { accepted as f64 / proposals as f64 },
            accepted,
            proposals,
            avg_log_cond_lik: avg,
            std_log_cond_lik: std,
            traces,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn posterior_std(&self) -> DVector<f64> {
        self.aggregate_cov.diagonal().map(|v| v.max(0.0).sqrt())
    }

    pub fn predictive(&self, noise_variance: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        predictive_moments(&self.samples, noise_variance)
    }

    pub fn predictive_std(&self, noise_variance: f64) -> DVector<f64> {
        self.aggregate_cov
            .diagonal()
            .map(|v| (v.max(0.0) + noise_variance).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(mean: &[f64], cov: &[f64]) -> ConditionalPosterior {
        let m = mean.len();
        ConditionalPosterior {
            test_mean: DVector::from_column_slice(mean),
            test_cov: DMatrix::from_row_slice(m, m, cov),
            log_cond_lik: 0.0,
            path_ref: None,
        }
    }

    #[test]
    fn single_sample_is_returned_exactly() {
        let s = sample(&[1.0, -2.0], &[2.0, 0.5, 0.5, 1.0]);
        let (m, c) = mixture_moments(std::slice::from_ref(&s)).unwrap();
        assert_eq!(m, s.test_mean);
        assert_eq!(c, s.test_cov);
    }

    #[test]
    fn symmetric_pair_adds_outer_product() {
        let k = [1.0, 0.2, 0.2, 0.5];
        let a = [0.3, -0.7];
        let s1 = sample(&a, &k);
        let s2 = sample(&[-a[0], -a[1]], &k);
        let (m, c) = mixture_moments(&[s1, s2]).unwrap();
        assert!(m.iter().all(|v| v.abs() < 1e-15));
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(c[(i, j)], k[2 * i + j] + a[i] * a[j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert!(mixture_moments(&[]).is_err());
        let s1 = sample(&[1.0], &[1.0]);
        let s2 = sample(&[1.0, 2.0], &[1.0, 0.0, 0.0, 1.0]);
        assert!(mixture_moments(&[s1, s2]).is_err());
    }

    #[test]
    fn predictive_adds_noise_to_the_diagonal() {
        let s1 = sample(&[1.0, 0.0], &[1.0, 0.1, 0.1, 2.0]);
        let s2 = sample(&[0.0, 2.0], &[0.5, 0.0, 0.0, 0.3]);
        let samples = [s1, s2];
        let (m0, c0) = mixture_moments(&samples).unwrap();
        let (m1, c1) = predictive_moments(&samples, 0.0).unwrap();
        assert_eq!(m0, m1);
        assert_eq!(c0, c1);
        let (_, c2) = predictive_moments(&samples, 0.25).unwrap();
        for i in 0..2 {
            assert_relative_eq!(c2[(i, i)], c0[(i, i)] + 0.25, epsilon = 1e-15);
            for j in 0..2 {
                if i != j {
                    assert_eq!(c2[(i, j)], c0[(i, j)]);
                }
            }
        }
        // literal route: add noise per component, then aggregate
        let noisy: Vec<ConditionalPosterior> = samples
            .iter()
            .map(|s| ConditionalPosterior {
                test_cov: &s.test_cov + DMatrix::identity(2, 2) * 0.25,
                ..s.clone()
            })
            .collect();
        let (_, c3) = mixture_moments(&noisy).unwrap();
        assert!((c3 - c2).abs().max() < 1e-15);
        assert!(predictive_moments(&samples, -1.0).is_err());
    }

    #[test]
    fn accumulator_matches_batch() {
        let samples = vec![
            sample(&[1.0, 2.0, 0.5], &[1.0, 0.1, 0.0, 0.1, 1.0, 0.2, 0.0, 0.2, 1.0]),
            sample(&[-1.0, 0.0, 1.5], &[0.5, 0.0, 0.0, 0.0, 0.4, 0.1, 0.0, 0.1, 0.3]),
            sample(&[0.3, 1.0, -0.5], &[2.0, 0.3, 0.1, 0.3, 1.0, 0.0, 0.1, 0.0, 0.7]),
        ];
        let mut acc = MixtureAccumulator::new(3);
        for s in &samples {
            acc.push(s).unwrap();
        }
        let (m1, c1) = acc.finish().unwrap();
        let (m2, c2) = mixture_moments(&samples).unwrap();
        assert!((m1 - m2).abs().max() < 1e-12);
        assert!((c1 - c2).abs().max() < 1e-12);
        assert!(MixtureAccumulator::new(2).finish().is_err());
    }

    #[test]
    fn mean_and_std_cases() {
        assert_eq!(mean_and_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_and_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_relative_eq!(s, 1.0);
    }
}
