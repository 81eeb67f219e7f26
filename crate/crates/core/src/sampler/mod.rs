//! MH-within-Gibbs inference over subordinator paths and the resulting
//! mixture-of-GP posterior.
//!
//! Each sweep visits every (dimension, interval) pair in order. A proposal
//! deletes the jumps of one interval and redraws them from the prior, so the
//! acceptance ratio reduces to the ratio of conditional likelihoods
//! `p(y | W')/p(y | W)`.

mod chain;
mod mixture;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{posterior, RegressionData, SampleRef};
use crate::kernels::KernelSpec;
use crate::levy::{Interval, Jump, JumpSet, LevyMeasureSpec, SubordinatorPath};

pub use chain::{
    acceptance_probability, burn_in_sweeps, propose, run_chain, ChainOutput, FlatTarget,
    GibbsChain, GpTarget, LogTarget, ProposalRecord,
};
pub use mixture::{mixture_moments, predictive_moments, MixtureAccumulator, MixturePosterior};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// Evenly spaced equal jumps approximating `W(x) = x`.
    IdentityMap,
    /// Final state of a short run on a few wide intervals.
    #[serde(alias = "coarse")]
    CoarseRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub n_sweeps: usize,
    /// Gibbs intervals per dimension.
    pub n_intervals: usize,
    pub burn_in_fraction: f64,
    pub init: InitStrategy,
    pub coarse_intervals: usize,
    pub coarse_sweeps: usize,
    /// Supplied by the run, not the config section.
    #[serde(skip)]
    pub seed: u64,
    pub randomize_interval_order: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_sweeps: 50,
            n_intervals: 100,
            burn_in_fraction: 0.2,
            init: InitStrategy::CoarseRun,
            coarse_intervals: 5,
            coarse_sweeps: 10,
            seed: 0,
            randomize_interval_order: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sweeps == 0 {
            return Err(Error::param("n_sweeps must be at least 1"));
        }
        if self.n_intervals == 0 {
            return Err(Error::param("n_intervals must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::param(format!(
                "burn_in_fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            )));
        }
        if self.init == InitStrategy::CoarseRun && (self.coarse_intervals == 0 || self.coarse_sweeps == 0) {
            return Err(Error::param("coarse initialization needs intervals and sweeps"));
        }
        Ok(())
    }
}

/// `J'` equal jumps of size `|domain|/J'` at `lb + i|domain|/J'`, `i = 1..J'`.
///
/// The last jump sits on `ub`, so `W(ub) = |domain|` exactly and
/// `|W(x) − (x − lb)| < |domain|/J'` everywhere.
pub fn init_identity(domains: &[Interval], n_jumps: usize) -> Result<SubordinatorPath> {
    if n_jumps == 0 {
        return Err(Error::param("identity initialization needs at least one jump"));
    }
    let sets = domains
        .iter()
        .map(|d| {
            let d = Interval::new(d.lb, d.ub)?;
            let step = d.length() / n_jumps as f64;
            let jumps = (1..=n_jumps)
                .map(|i| Jump {
                    position: if i == n_jumps { d.ub } else { d.lb + i as f64 * step },
                    magnitude: step,
                })
                .collect();
            JumpSet::new(d, jumps)
        })
        .collect::<Result<Vec<_>>>()?;
    SubordinatorPath::new(sets)
}

/// Crude warp estimate: a short chain on `coarse_intervals` wide intervals,
/// started from the identity map; its final state seeds the main chain.
pub fn init_coarse<R: Rng + ?Sized>(
    data: &RegressionData,
    domains: &[Interval],
    kernel: &KernelSpec,
    levy: &LevyMeasureSpec,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<SubordinatorPath> {
    if cfg.coarse_intervals >= cfg.n_intervals {
        return Err(Error::param(format!(
            "coarse_intervals ({}) must be smaller than n_intervals ({})",
            cfg.coarse_intervals, cfg.n_intervals
        )));
    }
    let coarse = SamplerConfig {
        n_sweeps: cfg.coarse_sweeps,
        n_intervals: cfg.coarse_intervals,
        burn_in_fraction: 0.0,
        init: InitStrategy::IdentityMap,
        ..*cfg
    };
    let start = init_identity(domains, cfg.n_intervals)?;
    let target = GpTarget {
        y: &data.y,
        noise_variance: data.noise_variance,
        kernel: *kernel,
    };
    let out = run_chain(&data.x, &target, levy, &coarse, &start, rng)
        .map_err(|e| e.context("coarse initialization"))?;
    Ok(out.final_path)
}

fn check_domains(data: &RegressionData, domains: &[Interval]) -> Result<()> {
    if domains.len() != data.n_dims() {
        return Err(Error::param(format!(
            "{} domains for {}-dimensional inputs",
            domains.len(),
            data.n_dims()
        )));
    }
    Ok(())
}

/// Full inference run: initialization, `cfg.n_sweeps` Gibbs sweeps and one
/// conditional posterior at `x_test` per post-burn-in sweep.
pub fn run_mh_gibbs<R: Rng + ?Sized>(
    data: &RegressionData,
    x_test: &DMatrix<f64>,
    domains: &[Interval],
    kernel: &KernelSpec,
    levy: &LevyMeasureSpec,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<MixturePosterior> {
    run_mh_gibbs_chain(data, x_test, domains, kernel, levy, cfg, 0, rng)
}

#[allow(clippy::too_many_arguments)]
fn run_mh_gibbs_chain<R: Rng + ?Sized>(
    data: &RegressionData,
    x_test: &DMatrix<f64>,
    domains: &[Interval],
    kernel: &KernelSpec,
    levy: &LevyMeasureSpec,
    cfg: &SamplerConfig,
    chain_index: usize,
    rng: &mut R,
) -> Result<MixturePosterior> {
    cfg.validate()?;
    check_domains(data, domains)?;
    if x_test.ncols() != data.n_dims() {
        return Err(Error::param("test inputs have the wrong number of columns"));
    }
    let initial = match cfg.init {
        InitStrategy::IdentityMap => init_identity(domains, cfg.n_intervals)?,
        InitStrategy::CoarseRun => init_coarse(data, domains, kernel, levy, cfg, rng)?,
    };
    run_mh_gibbs_from(data, x_test, kernel, levy, cfg, &initial, chain_index, rng)
}

/// As [`run_mh_gibbs`], starting from an explicit path.
#[allow(clippy::too_many_arguments)]
pub fn run_mh_gibbs_from<R: Rng + ?Sized>(
    data: &RegressionData,
    x_test: &DMatrix<f64>,
    kernel: &KernelSpec,
    levy: &LevyMeasureSpec,
    cfg: &SamplerConfig,
    initial: &SubordinatorPath,
    chain_index: usize,
    rng: &mut R,
) -> Result<MixturePosterior> {
    let target = GpTarget {
        y: &data.y,
        noise_variance: data.noise_variance,
        kernel: *kernel,
    };
    let out = run_chain(&data.x, &target, levy, cfg, initial, rng)?;
    let samples = out
        .samples
        .par_iter()
        .map(|(sweep, path, _)| {
            let mut p = posterior(data, x_test, path, kernel)
                .map_err(|e| e.context(format!("posterior at sweep {sweep}")))?;
            p.path_ref = Some(SampleRef {
                chain: chain_index,
                sweep: *sweep,
            });
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = MixtureAccumulator::new(x_test.nrows());
    for s in &samples {
        acc.push(s)?;
    }
    let (aggregate_mean, aggregate_cov) = acc.finish()?;
    let lls: Vec<f64> = samples.iter().map(|s| s.log_cond_lik).collect();
    let (avg, std) = mixture::mean_and_std(&lls);
    let acceptance_rate = out.acceptance_rate();
    Ok(MixturePosterior {
        samples,
        paths: out.samples.into_iter().map(|(_, p, _)| p).collect(),
        aggregate_mean,
        aggregate_cov,
        acceptance_rate,
        accepted: out.accepted,
        proposals: out.proposals,
        avg_log_cond_lik: avg,
        std_log_cond_lik: std,
        traces: vec![out.trace],
    })
}

/// Random source for chain `index` of a run seeded with `seed`: one ChaCha
/// stream per chain.
pub fn chain_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Independent chains in parallel, pooled in chain order.
pub fn run_chains(
    data: &RegressionData,
    x_test: &DMatrix<f64>,
    domains: &[Interval],
    kernel: &KernelSpec,
    levy: &LevyMeasureSpec,
    cfg: &SamplerConfig,
    n_chains: usize,
) -> Result<MixturePosterior> {
    if n_chains == 0 {
        return Err(Error::param("need at least one chain"));
    }
    let chains = (0..n_chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = chain_rng(cfg.seed, c);
            run_mh_gibbs_chain(data, x_test, domains, kernel, levy, cfg, c, &mut rng)
                .map_err(|e| e.context(format!("chain {c}")))
        })
        .collect::<Result<Vec<_>>>()?;
    MixturePosterior::pool(chains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::warp_inputs;
    use approx::assert_relative_eq;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn identity_init_layout() {
        let p = init_identity(&[unit()], 4).unwrap();
        let positions: Vec<f64> = p.jump_set(0).jumps().iter().map(|j| j.position).collect();
        assert_eq!(positions, vec![0.25, 0.5, 0.75, 1.0]);
        assert!(p.jump_set(0).jumps().iter().all(|j| j.magnitude == 0.25));
        assert_eq!(p.evaluate(1.0, 0).unwrap(), 1.0);
        let w = p.evaluate(0.9, 0).unwrap() - p.evaluate(0.1, 0).unwrap();
        assert_relative_eq!(w, 0.75);
    }

    #[test]
    fn identity_init_tracks_the_identity() {
        let d = Interval::new(-0.5, 2.0).unwrap();
        for n in [1, 3, 10, 100] {
            let p = init_identity(&[d], n).unwrap();
            assert_relative_eq!(p.evaluate(2.0, 0).unwrap(), 2.5, epsilon = 1e-12);
            for i in 0..=1000 {
                let x = -0.5 + 2.5 * i as f64 / 1000.0;
                let err = (p.evaluate(x, 0).unwrap() - (x + 0.5)).abs();
                assert!(err <= 2.5 / n as f64 + 1e-12, "n={n} x={x} err={err}");
            }
        }
        assert!(init_identity(&[d], 0).is_err());
    }

    #[test]
    fn identity_warp_approximates_inputs() {
        let p = init_identity(&[unit()], 200).unwrap();
        let x = DMatrix::from_column_slice(3, 1, &[0.1, 0.5, 0.9]);
        let w = warp_inputs(&p, &x).unwrap();
        for i in 0..3 {
            assert!((w[(i, 0)] - x[(i, 0)]).abs() <= 1.0 / 200.0 + 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::default().validate().is_ok());
        assert!(SamplerConfig { n_sweeps: 0, ..Default::default() }.validate().is_err());
        assert!(SamplerConfig { n_intervals: 0, ..Default::default() }.validate().is_err());
        assert!(SamplerConfig { burn_in_fraction: 1.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn burn_in_keeps_at_least_one_sweep() {
        let cfg = SamplerConfig { n_sweeps: 1, burn_in_fraction: 0.9, ..Default::default() };
        assert_eq!(burn_in_sweeps(&cfg), 0);
        let cfg = SamplerConfig { n_sweeps: 50, burn_in_fraction: 0.2, ..Default::default() };
        assert_eq!(burn_in_sweeps(&cfg), 10);
    }

    #[test]
    fn coarse_needs_fewer_intervals() {
        let data = RegressionData::new(
            DMatrix::from_column_slice(2, 1, &[0.2, 0.8]),
            nalgebra::DVector::from_vec(vec![0.0, 1.0]),
            0.1,
        )
        .unwrap();
        let k = KernelSpec::squared_exponential(0.1, 1.0).unwrap();
        let l = LevyMeasureSpec::normalized_tempered_stable(0.8, 5.0, 100).unwrap();
        let cfg = SamplerConfig { n_intervals: 5, coarse_intervals: 5, ..Default::default() };
        let mut rng = chain_rng(0, 0);
        assert!(init_coarse(&data, &[unit()], &k, &l, &cfg, &mut rng).is_err());
        let cfg = SamplerConfig { n_intervals: 5, coarse_intervals: 1, coarse_sweeps: 3, ..Default::default() };
        let p = init_coarse(&data, &[unit()], &k, &l, &cfg, &mut rng).unwrap();
        assert_eq!(p.n_dims(), 1);
        assert!(p.jump_set(0).jumps().iter().all(|j| j.magnitude > 0.0 && unit().contains(j.position)));
    }
}
