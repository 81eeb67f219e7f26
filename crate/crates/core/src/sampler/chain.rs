//! Metropolis-Hastings-within-Gibbs over subordinator paths.
//!
//! The chain keeps each dimension's jumps bucketed by Gibbs interval, with
//! per-interval cumulative sums, so a proposal only rebuilds the interval it
//! touches and warped inputs are `prefix[s] + partial_s(x)`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::log_likelihood_on_coords;
use crate::kernels::KernelSpec;
use crate::levy::{simulate_interval, sort_jumps, Interval, Jump, JumpSet, LevyMeasureSpec, SubordinatorPath};

use super::SamplerConfig;

/// Log-likelihood of the data given warped training inputs.
pub trait LogTarget {
    fn log_likelihood(&self, warped: &DMatrix<f64>) -> Result<f64>;
}

/// Constant likelihood; the chain then samples the prior.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatTarget;

impl LogTarget for FlatTarget {
    fn log_likelihood(&self, _warped: &DMatrix<f64>) -> Result<f64> {
        Ok(0.0)
    }
}

/// GP marginal likelihood `p(y | W)`.
#[derive(Debug, Clone)]
pub struct GpTarget<'a> {
    pub y: &'a DVector<f64>,
    pub noise_variance: f64,
    pub kernel: KernelSpec,
}

impl LogTarget for GpTarget<'_> {
    fn log_likelihood(&self, warped: &DMatrix<f64>) -> Result<f64> {
        log_likelihood_on_coords(warped, self.y, self.noise_variance, &self.kernel)
    }
}

impl<F> LogTarget for F
where
    F: Fn(&DMatrix<f64>) -> Result<f64>,
{
    fn log_likelihood(&self, warped: &DMatrix<f64>) -> Result<f64> {
        self(warped)
    }
}

/// `min(1, exp(new - old))`, evaluated in log space.
pub fn acceptance_probability(log_lik_new: f64, log_lik_old: f64) -> Result<f64> {
    if log_lik_new.is_nan() || log_lik_old.is_nan() {
        return Err(Error::numerical("NaN log likelihood in acceptance ratio"));
    }
    let diff = log_lik_new - log_lik_old;
    if diff.is_nan() {
        return Err(Error::numerical(format!(
            "undefined likelihood ratio ({log_lik_new} vs {log_lik_old})"
        )));
    }
    Ok(if diff >= 0.0 { 1.0 } else { diff.exp() })
}

/// Jumps removed by a proposal on `interval`: `[lb, ub)`, closed on the right
/// when the interval ends at the domain boundary.
fn owned_by(interval: &Interval, domain: &Interval, v: f64) -> bool {
    interval.lb <= v && (v < interval.ub || (interval.ub == domain.ub && v == domain.ub))
}

/// Replace every jump of dimension `dim` inside `interval` by a fresh prior
/// draw with epochs at rate `|interval|`.
pub fn propose<R: Rng + ?Sized>(
    current: &SubordinatorPath,
    dim: usize,
    interval: Interval,
    spec: &LevyMeasureSpec,
    rng: &mut R,
) -> Result<SubordinatorPath> {
    let interval = Interval::new(interval.lb, interval.ub)?;
    if dim >= current.n_dims() {
        return Err(Error::param(format!("dimension {dim} out of range")));
    }
    let domain = current.jump_set(dim).domain();
    if interval.lb < domain.lb || interval.ub > domain.ub {
        return Err(Error::Domain(format!(
            "interval [{}, {}) not inside [{}, {}]",
            interval.lb, interval.ub, domain.lb, domain.ub
        )));
    }
    let fresh = simulate_interval(spec, interval, rng)?;
    let mut sets = current.jump_sets().to_vec();
    let mut jumps: Vec<Jump> = sets[dim]
        .jumps()
        .iter()
        .copied()
        .filter(|j| !owned_by(&interval, &domain, j.position))
        .collect();
    jumps.extend(fresh);
    sets[dim] = JumpSet::new(domain, jumps)?;
    SubordinatorPath::new(sets)
}

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    jumps: Vec<Jump>,
    cumulative: Vec<f64>,
}

impl Segment {
    fn new(mut jumps: Vec<Jump>) -> Self {
        sort_jumps(&mut jumps);
        let mut acc = 0.0;
        let cumulative = jumps
            .iter()
            .map(|j| {
                acc += j.magnitude;
                acc
            })
            .collect();
        Segment { jumps, cumulative }
    }

    fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    fn partial(&self, x: f64) -> f64 {
        let k = self.jumps.partition_point(|j| j.position <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

#[derive(Debug, Clone)]
struct DimState {
    domain: Interval,
    edges: Vec<f64>,
    segments: Vec<Segment>,
    prefix: Vec<f64>,
}

impl DimState {
    fn new(set: &JumpSet, n_intervals: usize) -> Self {
        let domain = set.domain();
        let edges = domain.edges(n_intervals);
        let mut buckets = vec![Vec::new(); n_intervals];
        for j in set.jumps() {
            buckets[segment_of(&edges, j.position)].push(*j);
        }
        let segments: Vec<Segment> = buckets.into_iter().map(Segment::new).collect();
        let mut state = DimState {
            domain,
            edges,
            segments,
            prefix: Vec::new(),
        };
        state.refresh_prefix();
        state
    }

    fn refresh_prefix(&mut self) {
        let mut acc = 0.0;
        self.prefix.clear();
        self.prefix.push(0.0);
        for s in &self.segments {
            acc += s.total();
            self.prefix.push(acc);
        }
    }

    fn interval(&self, s: usize) -> Interval {
        Interval {
            lb: self.edges[s],
            ub: self.edges[s + 1],
        }
    }

    fn eval(&self, s: usize, x: f64) -> f64 {
        self.prefix[s] + self.segments[s].partial(x)
    }

    fn jump_set(&self) -> JumpSet {
        let jumps = self.segments.iter().flat_map(|s| s.jumps.iter().copied()).collect();
        // every stored jump came from a validated set or a fresh interval draw
        JumpSet::new(self.domain, jumps).expect("chain state holds valid jumps")
    }
}

/// Index of the half-open interval holding `v`; the last interval is closed.
fn segment_of(edges: &[f64], v: f64) -> usize {
    let n = edges.len() - 1;
    edges.partition_point(|&e| e <= v).saturating_sub(1).min(n - 1)
}

/// One proposal's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalRecord {
    pub sweep: usize,
    pub dim: usize,
    pub interval: usize,
    pub proposed_log_lik: f64,
    /// Log likelihood of the chain state after the accept/reject decision.
    pub log_lik: f64,
    pub accepted: bool,
}

/// Mutable state of one MH-within-Gibbs chain.
pub struct GibbsChain<'a, T: LogTarget> {
    x: &'a DMatrix<f64>,
    target: &'a T,
    levy: LevyMeasureSpec,
    dims: Vec<DimState>,
    point_segments: Vec<Vec<usize>>,
    warped: DMatrix<f64>,
    log_lik: f64,
}

impl<'a, T: LogTarget> GibbsChain<'a, T> {
    pub fn new(
        x: &'a DMatrix<f64>,
        target: &'a T,
        levy: LevyMeasureSpec,
        initial: &SubordinatorPath,
        n_intervals: usize,
    ) -> Result<Self> {
        levy.validate()?;
        if n_intervals == 0 {
            return Err(Error::param("need at least one Gibbs interval"));
        }
        if x.ncols() != initial.n_dims() {
            return Err(Error::param(format!(
                "inputs have {} columns, path has {} dimensions",
                x.ncols(),
                initial.n_dims()
            )));
        }
        let dims: Vec<DimState> = initial
            .jump_sets()
            .iter()
            .map(|s| DimState::new(s, n_intervals))
            .collect();
        let mut point_segments = Vec::with_capacity(dims.len());
        for (k, d) in dims.iter().enumerate() {
            let mut segs = Vec::with_capacity(x.nrows());
            for i in 0..x.nrows() {
                let v = x[(i, k)];
                if !d.domain.contains(v) {
                    return Err(Error::Domain(format!(
                        "input row {i} has x = {v} outside [{}, {}] in dimension {k}",
                        d.domain.lb, d.domain.ub
                    )));
                }
                segs.push(segment_of(&d.edges, v));
            }
            point_segments.push(segs);
        }
        let mut chain = GibbsChain {
            x,
            target,
            levy,
            dims,
            point_segments,
            warped: DMatrix::zeros(x.nrows(), x.ncols()),
            log_lik: 0.0,
        };
        for k in 0..chain.dims.len() {
            chain.fill_column(k, None);
        }
        chain.log_lik = chain
            .target
            .log_likelihood(&chain.warped)
            .map_err(|e| e.context("initial state"))?;
        Ok(chain)
    }

    fn fill_column(&mut self, k: usize, out: Option<&mut DMatrix<f64>>) {
        let d = &self.dims[k];
        let segs = &self.point_segments[k];
        let dest = match out {
            Some(m) => m,
            None => &mut self.warped,
        };
        for (i, &s) in segs.iter().enumerate() {
            dest[(i, k)] = d.eval(s, self.x[(i, k)]);
        }
    }

    pub fn n_intervals(&self) -> usize {
        self.dims[0].segments.len()
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_lik
    }

    pub fn warped(&self) -> &DMatrix<f64> {
        &self.warped
    }

    pub fn interval(&self, dim: usize, s: usize) -> Interval {
        self.dims[dim].interval(s)
    }

    pub fn path(&self) -> SubordinatorPath {
        SubordinatorPath::new(self.dims.iter().map(DimState::jump_set).collect())
            .expect("chain has at least one dimension")
    }

    /// Propose fresh jumps on interval `s` of dimension `dim` and accept or
    /// reject. Returns `(proposed log likelihood, accepted)`.
    pub fn step<R: Rng + ?Sized>(&mut self, dim: usize, s: usize, rng: &mut R) -> Result<(f64, bool)> {
        let interval = self.dims[dim].interval(s);
        let fresh = Segment::new(simulate_interval(&self.levy, interval, rng)?);
        let old = std::mem::replace(&mut self.dims[dim].segments[s], fresh);
        self.dims[dim].refresh_prefix();

        let mut proposed = self.warped.clone();
        self.fill_column(dim, Some(&mut proposed));
        let outcome = self
            .target
            .log_likelihood(&proposed)
            .and_then(|ll| Ok((ll, acceptance_probability(ll, self.log_lik)?)));
        let (ll, a) = match outcome {
            Ok(v) => v,
            Err(e) => {
                self.dims[dim].segments[s] = old;
                self.dims[dim].refresh_prefix();
                return Err(e);
            }
        };
        let u: f64 = rng.random();
        if u < a {
            self.warped = proposed;
            self.log_lik = ll;
            Ok((ll, true))
        } else {
            self.dims[dim].segments[s] = old;
            self.dims[dim].refresh_prefix();
            Ok((ll, false))
        }
    }
}

/// Raw chain output before any GP posteriors are formed.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    /// `(sweep, path, log likelihood)` for every post-burn-in sweep.
    pub samples: Vec<(usize, SubordinatorPath, f64)>,
    pub trace: Vec<ProposalRecord>,
    pub accepted: usize,
    pub proposals: usize,
    pub final_path: SubordinatorPath,
    pub final_log_lik: f64,
}

impl ChainOutput {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// Number of leading sweeps discarded as burn-in.
pub fn burn_in_sweeps(cfg: &SamplerConfig) -> usize {
    let b = (cfg.burn_in_fraction * cfg.n_sweeps as f64).floor() as usize;
    b.min(cfg.n_sweeps - 1)
}

/// Run `cfg.n_sweeps` sweeps from `initial` and record one sample per
/// post-burn-in sweep.
pub fn run_chain<T: LogTarget, R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    target: &T,
    levy: &LevyMeasureSpec,
    cfg: &SamplerConfig,
    initial: &SubordinatorPath,
    rng: &mut R,
) -> Result<ChainOutput> {
    cfg.validate()?;
    let mut chain = GibbsChain::new(x, target, *levy, initial, cfg.n_intervals)?;
    let burn = burn_in_sweeps(cfg);
    let mut out = ChainOutput {
        samples: Vec::with_capacity(cfg.n_sweeps - burn),
        trace: Vec::with_capacity(cfg.n_sweeps * cfg.n_intervals * chain.n_dims()),
        accepted: 0,
        proposals: 0,
        final_path: initial.clone(),
        final_log_lik: chain.log_likelihood(),
    };
    let mut order: Vec<usize> = (0..cfg.n_intervals).collect();
    for sweep in 0..cfg.n_sweeps {
        for dim in 0..chain.n_dims() {
            if cfg.randomize_interval_order {
                order.shuffle(rng);
            }
            for &s in &order {
                let (proposed, accepted) = chain
                    .step(dim, s, rng)
                    .map_err(|e| e.context(format!("sweep {sweep}, dimension {dim}, interval {s}")))?;
                if sweep >= burn {
                    out.proposals += 1;
                    out.accepted += accepted as usize;
                }
                out.trace.push(ProposalRecord {
                    sweep,
                    dim,
                    interval: s,
                    proposed_log_lik: proposed,
                    log_lik: chain.log_likelihood(),
                    accepted,
                });
            }
        }
        if sweep >= burn {
            out.samples.push((sweep, chain.path(), chain.log_likelihood()));
        }
    }
    out.final_path = chain.path();
    out.final_log_lik = chain.log_likelihood();
    Ok(out)
}
