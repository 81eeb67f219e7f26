//! Shot-noise series simulation of pure-jump subordinators.
//!
//! Jump magnitudes are generated by passing Poisson epochs through the
//! inverse tail mass of a tractable dominating Lévy measure and thinning the
//! candidates down to the target measure:
//!
//! ```text
//! tempered stable  Q(x) = C x^{-1-α} e^{-βx}
//!   candidate      x = (α Γ / C)^{-1/α}           accept w.p. e^{-βx}
//! gamma            Q(x) = C x^{-1} e^{-βx}
//!   candidate      x = 1 / (β (e^{Γ/C} - 1))      accept w.p. (1 + βx) e^{-βx}
//! ```
//!
//! Epochs are generated at a rate equal to the measure of the region the jumps
//! live on, so a single routine covers any interval length.

use rand::Rng;
use rand_distr::{Distribution, Exp, Open01};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Closed interval `[lb, ub]` with `lb < ub`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lb: f64,
    pub ub: f64,
}

impl Interval {
    pub fn new(lb: f64, ub: f64) -> Result<Self> {
        if !(lb.is_finite() && ub.is_finite()) || lb >= ub {
            return Err(Error::param(format!("degenerate interval [{lb}, {ub}]")));
        }
        Ok(Interval { lb, ub })
    }

    pub fn length(&self) -> f64 {
        self.ub - self.lb
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lb <= x && x <= self.ub
    }

    /// Split into `n` equal consecutive pieces. The last edge is exactly `ub`.
    pub fn edges(&self, n: usize) -> Vec<f64> {
        let w = self.length() / n as f64;
        let mut edges: Vec<f64> = (0..n).map(|j| self.lb + j as f64 * w).collect();
        edges.push(self.ub);
        edges
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevyFamily {
    TemperedStable,
    Gamma,
    Stable,
}

/// Subordinator family, its Lévy measure parameters and the series budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyMeasureSpec {
    pub family: LevyFamily,
    /// Scale `C`: expected jumps per unit measure.
    pub scale: f64,
    /// Tail index, unused for the gamma family.
    pub alpha: f64,
    /// Tempering rate, ignored for the stable family.
    pub beta: f64,
    /// Number of Poisson epochs generated per simulation.
    pub n_terms: usize,
}

pub const DEFAULT_N_TERMS: usize = 1000;

impl LevyMeasureSpec {
    pub fn tempered_stable(scale: f64, alpha: f64, beta: f64, n_terms: usize) -> Result<Self> {
        Self {
            family: LevyFamily::TemperedStable,
            scale,
            alpha,
            beta,
            n_terms,
        }
        .validated()
    }

    /// Tempered stable measure with `C` chosen so that `E[W]` equals the
    /// length of the domain.
    pub fn normalized_tempered_stable(alpha: f64, beta: f64, n_terms: usize) -> Result<Self> {
        let scale = normalize_scale(alpha, beta, LevyFamily::TemperedStable)?;
        Self::tempered_stable(scale, alpha, beta, n_terms)
    }

    pub fn gamma(scale: f64, beta: f64, n_terms: usize) -> Result<Self> {
        Self {
            family: LevyFamily::Gamma,
            scale,
            alpha: 0.0,
            beta,
            n_terms,
        }
        .validated()
    }

    pub fn stable(scale: f64, alpha: f64, n_terms: usize) -> Result<Self> {
        Self {
            family: LevyFamily::Stable,
            scale,
            alpha,
            beta: 0.0,
            n_terms,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::param(format!("scale C must be positive, got {}", self.scale)));
        }
        if self.n_terms == 0 {
            return Err(Error::param("n_terms must be at least 1"));
        }
        match self.family {
            LevyFamily::TemperedStable | LevyFamily::Stable => {
                if !(self.alpha > 0.0 && self.alpha < 1.0) {
                    return Err(Error::param(format!(
                        "alpha must lie in (0, 1), got {}",
                        self.alpha
                    )));
                }
            }
            LevyFamily::Gamma => {}
        }
        match self.family {
            // beta = 0 is admitted here and reduces to the stable sampler
            LevyFamily::TemperedStable if !(self.beta >= 0.0 && self.beta.is_finite()) => Err(
                Error::param(format!("beta must be non-negative, got {}", self.beta)),
            ),
            LevyFamily::Gamma if !(self.beta > 0.0 && self.beta.is_finite()) => Err(Error::param(
                format!("gamma subordinator needs beta > 0, got {}", self.beta),
            )),
            _ => Ok(()),
        }
    }

    /// Lévy density `Q(x)` for `x > 0`.
    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let c = self.scale;
        match self.family {
            LevyFamily::TemperedStable => c * x.powf(-1.0 - self.alpha) * (-self.beta * x).exp(),
            LevyFamily::Stable => c * x.powf(-1.0 - self.alpha),
            LevyFamily::Gamma => c / x * (-self.beta * x).exp(),
        }
    }

    /// `E[W(t)] / t` of the untruncated process.
    pub fn mean_rate(&self) -> f64 {
        let c = self.scale;
        match self.family {
            LevyFamily::TemperedStable if self.beta > 0.0 => {
                c * gamma(1.0 - self.alpha) * self.beta.powf(self.alpha - 1.0)
            }
            LevyFamily::Gamma => c / self.beta,
            _ => f64::INFINITY,
        }
    }

    /// `Var[W(t)] / t` of the untruncated process.
    pub fn variance_rate(&self) -> f64 {
        let c = self.scale;
        match self.family {
            LevyFamily::TemperedStable if self.beta > 0.0 => {
                c * gamma(2.0 - self.alpha) * self.beta.powf(self.alpha - 2.0)
            }
            LevyFamily::Gamma => c / (self.beta * self.beta),
            _ => f64::INFINITY,
        }
    }
}

/// Scale `C` giving `E[W]` equal to 1 over a unit-length domain (and so equal
/// to the domain length in general).
pub fn normalize_scale(alpha: f64, beta: f64, family: LevyFamily) -> Result<f64> {
    match family {
        LevyFamily::TemperedStable => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
            }
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::param("tempered stable mean is finite only for beta > 0"));
            }
            Ok(beta.powf(1.0 - alpha) / gamma(1.0 - alpha))
        }
        LevyFamily::Gamma => {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::param(format!("gamma subordinator needs beta > 0, got {beta}")));
            }
            Ok(beta)
        }
        LevyFamily::Stable => Err(Error::param(
            "a stable subordinator has infinite mean; no scale normalizes it",
        )),
    }
}

/// Epochs `Γ_1 < … < Γ_n` of a Poisson process with the given rate.
pub fn poisson_epochs<R: Rng + ?Sized>(rate: f64, n_terms: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::param(format!("Poisson rate must be positive, got {rate}")));
    }
    if n_terms == 0 {
        return Err(Error::param("n_terms must be at least 1"));
    }
    let exp = Exp::new(rate).map_err(|e| Error::param(e.to_string()))?;
    Ok(cumulative_epochs(exp.sample_iter(rng).take(n_terms)))
}

pub(crate) fn cumulative_epochs(spacings: impl IntoIterator<Item = f64>) -> Vec<f64> {
    spacings
        .into_iter()
        .scan(0.0, |acc, e| {
            *acc += e;
            Some(*acc)
        })
        .collect()
}

/// Inverse tail mass of the stable measure `C x^{-1-α}`.
#[inline]
pub fn stable_candidate(scale: f64, alpha: f64, epoch: f64) -> f64 {
    (alpha * epoch / scale).powf(-1.0 / alpha)
}

/// Inverse tail mass of the dominating measure `C x^{-1} (1 + βx)^{-1}`.
#[inline]
pub fn gamma_candidate(scale: f64, beta: f64, epoch: f64) -> f64 {
    1.0 / (beta * (epoch / scale).exp_m1())
}

fn thin<R: Rng + ?Sized>(
    candidates: impl Iterator<Item = f64>,
    accept: impl Fn(f64) -> f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::new();
    for x in candidates {
        // underflowed candidates carry no mass
        if !(x > 0.0 && x.is_finite()) {
            continue;
        }
        let p = accept(x);
        if p >= 1.0 || rng.random::<f64>() < p {
            out.push(x);
        }
    }
    out
}

fn check_region(region_measure: f64) -> Result<()> {
    if region_measure > 0.0 && region_measure.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!(
            "region measure must be positive, got {region_measure}"
        )))
    }
}

fn expect_family(spec: &LevyMeasureSpec, family: LevyFamily) -> Result<()> {
    spec.validate()?;
    if spec.family != family {
        return Err(Error::param(format!(
            "expected a {family:?} measure, got {:?}",
            spec.family
        )));
    }
    Ok(())
}

/// Accepted tempered stable jump magnitudes on a region of the given measure.
pub fn simulate_ts_jumps<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    region_measure: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    expect_family(spec, LevyFamily::TemperedStable)?;
    check_region(region_measure)?;
    let epochs = poisson_epochs(region_measure, spec.n_terms, rng)?;
    let (c, alpha, beta) = (spec.scale, spec.alpha, spec.beta);
    Ok(thin(
        epochs.into_iter().map(|g| stable_candidate(c, alpha, g)),
        |x| (-beta * x).exp(),
        rng,
    ))
}

/// Untempered stable jumps; identical to the tempered sampler at `β = 0`.
pub fn simulate_stable_jumps<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    region_measure: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    expect_family(spec, LevyFamily::Stable)?;
    check_region(region_measure)?;
    let epochs = poisson_epochs(region_measure, spec.n_terms, rng)?;
    let (c, alpha) = (spec.scale, spec.alpha);
    Ok(thin(
        epochs.into_iter().map(|g| stable_candidate(c, alpha, g)),
        |_| 1.0,
        rng,
    ))
}

/// Accepted gamma-subordinator jump magnitudes on a region of the given measure.
pub fn simulate_gamma_jumps<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    region_measure: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    expect_family(spec, LevyFamily::Gamma)?;
    check_region(region_measure)?;
    let epochs = poisson_epochs(region_measure, spec.n_terms, rng)?;
    let (c, beta) = (spec.scale, spec.beta);
    Ok(thin(
        epochs.into_iter().map(|g| gamma_candidate(c, beta, g)),
        |x| (1.0 + beta * x) * (-beta * x).exp(),
        rng,
    ))
}

pub fn simulate_jumps<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    region_measure: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    match spec.family {
        LevyFamily::TemperedStable => simulate_ts_jumps(spec, region_measure, rng),
        LevyFamily::Gamma => simulate_gamma_jumps(spec, region_measure, rng),
        LevyFamily::Stable => simulate_stable_jumps(spec, region_measure, rng),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub position: f64,
    pub magnitude: f64,
}

/// Uniform draw on the open interval `(lb, ub)`.
pub(crate) fn open_uniform<R: Rng + ?Sized>(domain: &Interval, rng: &mut R) -> f64 {
    loop {
        let u: f64 = Open01.sample(rng);
        let v = domain.lb + u * domain.length();
        if v > domain.lb && v < domain.ub {
            return v;
        }
    }
}

/// Pair each magnitude with an independent uniform position on the open domain.
pub fn assign_positions<R: Rng + ?Sized>(
    magnitudes: &[f64],
    domain: Interval,
    rng: &mut R,
) -> Result<JumpSet> {
    let domain = Interval::new(domain.lb, domain.ub)?;
    let jumps = magnitudes
        .iter()
        .map(|&magnitude| Jump {
            position: open_uniform(&domain, rng),
            magnitude,
        })
        .collect();
    JumpSet::new(domain, jumps)
}

/// Fresh jumps on `interval`, with epochs at rate equal to its length.
pub fn simulate_interval<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    interval: Interval,
    rng: &mut R,
) -> Result<Vec<Jump>> {
    let mags = simulate_jumps(spec, interval.length(), rng)?;
    Ok(mags
        .into_iter()
        .map(|magnitude| Jump {
            position: open_uniform(&interval, rng),
            magnitude,
        })
        .collect())
}

/// Truncated Poisson random measure of one input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSet {
    domain: Interval,
    jumps: Vec<Jump>,
}

impl JumpSet {
    pub fn new(domain: Interval, jumps: Vec<Jump>) -> Result<Self> {
        for j in &jumps {
            if !(j.magnitude > 0.0 && j.magnitude.is_finite()) {
                return Err(Error::param(format!(
                    "jump magnitude must be positive, got {}",
                    j.magnitude
                )));
            }
            if !domain.contains(j.position) {
                return Err(Error::Domain(format!(
                    "jump position {} outside [{}, {}]",
                    j.position, domain.lb, domain.ub
                )));
            }
        }
        Ok(JumpSet { domain, jumps })
    }

    pub fn empty(domain: Interval) -> Self {
        JumpSet {
            domain,
            jumps: Vec::new(),
        }
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.jumps.iter().map(|j| j.magnitude).sum()
    }

    /// Jumps ordered by position, ties broken by magnitude.
    pub fn sorted_jumps(&self) -> Vec<Jump> {
        let mut v = self.jumps.clone();
        sort_jumps(&mut v);
        v
    }
}

pub(crate) fn sort_jumps(jumps: &mut [Jump]) {
    jumps.sort_unstable_by(|a, b| {
        a.position
            .total_cmp(&b.position)
            .then(a.magnitude.total_cmp(&b.magnitude))
    });
}

#[derive(Debug, Clone, PartialEq)]
struct StepCache {
    positions: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepCache {
    fn build(set: &JumpSet) -> Self {
        let sorted = set.sorted_jumps();
        let positions = sorted.iter().map(|j| j.position).collect();
        let cumulative = cumulative_epochs(sorted.iter().map(|j| j.magnitude));
        StepCache {
            positions,
            cumulative,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let k = self.positions.partition_point(|&p| p <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

/// Non-decreasing step function `W(x) = Σ M_i 1{V_i ≤ x}`, one per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorPath {
    dims: Vec<JumpSet>,
    cache: Vec<StepCache>,
}

impl SubordinatorPath {
    pub fn new(dims: Vec<JumpSet>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::param("a path needs at least one dimension"));
        }
        let cache = dims.iter().map(StepCache::build).collect();
        Ok(SubordinatorPath { dims, cache })
    }

    /// Independent prior draw in every dimension.
    pub fn simulate<R: Rng + ?Sized>(
        spec: &LevyMeasureSpec,
        domains: &[Interval],
        rng: &mut R,
    ) -> Result<Self> {
        let dims = domains
            .iter()
            .map(|d| {
                let mags = simulate_jumps(spec, d.length(), rng)?;
                assign_positions(&mags, *d, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn jump_sets(&self) -> &[JumpSet] {
        &self.dims
    }

    pub fn jump_set(&self, dim: usize) -> &JumpSet {
        &self.dims[dim]
    }

    pub fn domains(&self) -> Vec<Interval> {
        self.dims.iter().map(|d| d.domain()).collect()
    }

    pub fn into_jump_sets(self) -> Vec<JumpSet> {
        self.dims
    }

    pub fn evaluate(&self, x: f64, dim: usize) -> Result<f64> {
        let set = self
            .dims
            .get(dim)
            .ok_or_else(|| Error::param(format!("dimension {dim} out of range")))?;
        let d = set.domain();
        if !d.contains(x) {
            return Err(Error::Domain(format!(
                "x = {x} outside [{}, {}] in dimension {dim}",
                d.lb, d.ub
            )));
        }
        Ok(self.cache[dim].eval(x))
    }

    /// Coordinate-wise warp of one input point.
    pub fn warp_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dims.len() {
            return Err(Error::param(format!(
                "point has {} coordinates, path has {} dimensions",
                x.len(),
                self.dims.len()
            )));
        }
        x.iter()
            .enumerate()
            .map(|(k, &xi)| self.evaluate(xi, k))
            .collect()
    }
}

pub fn evaluate_path(path: &SubordinatorPath, x: f64, dim: usize) -> Result<f64> {
    path.evaluate(x, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn epochs_are_cumulative_sums() {
        assert_eq!(cumulative_epochs([0.5, 0.2, 0.3]), vec![0.5, 0.7, 1.0]);
    }

    #[test]
    fn epochs_reject_bad_arguments() {
        assert!(poisson_epochs(1.0, 0, &mut rng(0)).is_err());
        assert!(poisson_epochs(0.0, 5, &mut rng(0)).is_err());
        assert!(poisson_epochs(-1.0, 5, &mut rng(0)).is_err());
    }

    #[test]
    fn epochs_strictly_increase_with_mean_spacing() {
        let n = 100_000;
        let e = poisson_epochs(2.0, n, &mut rng(1)).unwrap();
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        let mean_spacing = e[n - 1] / n as f64;
        // exponential(2): sd 0.5, standard error 0.5 / sqrt(n)
        let se = 0.5 / (n as f64).sqrt();
        assert!((mean_spacing - 0.5).abs() < 3.0 * se, "{mean_spacing}");
    }

    #[test]
    fn stable_candidate_formula() {
        assert_relative_eq!(stable_candidate(1.0, 0.5, 2.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gamma_candidate_limit() {
        let x = gamma_candidate(2.0, 4.0, 200.0);
        assert!(x < 1e-40);
        assert_relative_eq!((1.0 + 4.0 * x) * (-4.0 * x).exp(), 1.0);
    }

    #[test]
    fn untempered_candidates_all_accepted() {
        let spec = LevyMeasureSpec::tempered_stable(1.0, 0.5, 0.0, 200).unwrap();
        let mut r = rng(3);
        let epochs = poisson_epochs(1.0, 200, &mut rng(3)).unwrap();
        let jumps = simulate_ts_jumps(&spec, 1.0, &mut r).unwrap();
        let expected: Vec<f64> = epochs.iter().map(|&g| stable_candidate(1.0, 0.5, g)).collect();
        assert_eq!(jumps, expected);
    }

    #[test]
    fn zero_tempering_matches_stable_sampler() {
        let ts = LevyMeasureSpec::tempered_stable(0.7, 0.6, 0.0, 500).unwrap();
        let st = LevyMeasureSpec::stable(0.7, 0.6, 500).unwrap();
        let a = simulate_ts_jumps(&ts, 1.3, &mut rng(9)).unwrap();
        let b = simulate_stable_jumps(&st, 1.3, &mut rng(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn candidates_decrease() {
        let spec = LevyMeasureSpec::normalized_tempered_stable(0.8, 5.0, 1000).unwrap();
        let jumps = simulate_ts_jumps(&spec, 1.0, &mut rng(5)).unwrap();
        assert!(jumps.windows(2).all(|w| w[0] > w[1]));
        assert!(jumps.iter().all(|&m| m > 0.0));
    }

    #[test]
    fn spec_validation() {
        assert!(LevyMeasureSpec::tempered_stable(1.0, 1.0, 1.0, 10).is_err());
        assert!(LevyMeasureSpec::tempered_stable(1.0, 0.0, 1.0, 10).is_err());
        assert!(LevyMeasureSpec::tempered_stable(1.0, 0.5, -1.0, 10).is_err());
        assert!(LevyMeasureSpec::tempered_stable(1.0, 0.5, 1.0, 0).is_err());
        assert!(LevyMeasureSpec::tempered_stable(0.0, 0.5, 1.0, 10).is_err());
        assert!(LevyMeasureSpec::gamma(1.0, 0.0, 10).is_err());
        assert!(LevyMeasureSpec::gamma(1.0, 2.0, 10).is_ok());
        // family mismatch
        let g = LevyMeasureSpec::gamma(1.0, 2.0, 10).unwrap();
        assert!(simulate_ts_jumps(&g, 1.0, &mut rng(0)).is_err());
        assert!(simulate_gamma_jumps(&g, 0.0, &mut rng(0)).is_err());
    }

    #[test]
    fn normalized_scales() {
        let c = normalize_scale(0.8, 5.0, LevyFamily::TemperedStable).unwrap();
        assert_relative_eq!(c, 0.300_539, epsilon = 1e-6);
        assert_eq!(normalize_scale(0.0, 4.0, LevyFamily::Gamma).unwrap(), 4.0);
        assert!(normalize_scale(0.5, 0.0, LevyFamily::TemperedStable).is_err());
        assert!(normalize_scale(0.5, 1.0, LevyFamily::Stable).is_err());
        for &(a, b) in &[(0.8, 5.0), (0.3, 0.5), (0.5, 20.0)] {
            let s = LevyMeasureSpec::normalized_tempered_stable(a, b, 10).unwrap();
            assert!((s.mean_rate() - 1.0).abs() < 1e-12);
        }
        let g = LevyMeasureSpec::gamma(normalize_scale(0.0, 4.0, LevyFamily::Gamma).unwrap(), 4.0, 10)
            .unwrap();
        assert!((g.mean_rate() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_positions() {
        let set = assign_positions(&[], unit(), &mut rng(0)).unwrap();
        assert!(set.is_empty());
        let path = SubordinatorPath::new(vec![set]).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(path.evaluate(x, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn positions_are_interior_and_uniform() {
        let n = 100_000;
        let mags = vec![1.0; n];
        let d = Interval::new(0.0, 2.0).unwrap();
        let set = assign_positions(&mags, d, &mut rng(11)).unwrap();
        assert!(set.jumps().iter().all(|j| j.position > 0.0 && j.position < 2.0));
        let mean = set.jumps().iter().map(|j| j.position).sum::<f64>() / n as f64;
        let se = (4.0f64 / 12.0).sqrt() / (n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn degenerate_domain_rejected() {
        assert!(assign_positions(&[1.0], Interval { lb: 1.0, ub: 1.0 }, &mut rng(0)).is_err());
    }

    #[test]
    fn step_function_closed_on_the_right() {
        let set = JumpSet::new(
            unit(),
            vec![
                Jump { position: 0.7, magnitude: 2.0 },
                Jump { position: 0.3, magnitude: 1.0 },
            ],
        )
        .unwrap();
        let path = SubordinatorPath::new(vec![set]).unwrap();
        assert_eq!(path.evaluate(0.5, 0).unwrap(), 1.0);
        assert_eq!(path.evaluate(0.7, 0).unwrap(), 3.0);
        assert_eq!(path.evaluate(0.9, 0).unwrap(), 3.0);
        assert_eq!(path.evaluate(0.0, 0).unwrap(), 0.0);
        assert!(matches!(path.evaluate(1.5, 0), Err(Error::Domain(_))));
        assert!(path.evaluate(-0.1, 0).is_err());
    }

    #[test]
    fn jump_set_invariants_enforced() {
        assert!(JumpSet::new(unit(), vec![Jump { position: 0.5, magnitude: 0.0 }]).is_err());
        assert!(JumpSet::new(unit(), vec![Jump { position: 1.5, magnitude: 1.0 }]).is_err());
    }

    #[test]
    fn gamma_jumps_thin_large_candidates() {
        let spec = LevyMeasureSpec::gamma(2.0, 4.0, 1000).unwrap();
        let jumps = simulate_gamma_jumps(&spec, 1.0, &mut rng(2)).unwrap();
        assert!(!jumps.is_empty());
        assert!(jumps.iter().all(|&m| m > 0.0 && m.is_finite()));
    }

    #[test]
    fn same_seed_same_path() {
        let spec = LevyMeasureSpec::normalized_tempered_stable(0.8, 5.0, 300).unwrap();
        let d = [unit(), Interval::new(-1.0, 1.0).unwrap()];
        let a = SubordinatorPath::simulate(&spec, &d, &mut rng(4)).unwrap();
        let b = SubordinatorPath::simulate(&spec, &d, &mut rng(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.warp_point(&[0.5, 0.0]).unwrap().len(), 2);
        assert!(a.warp_point(&[0.5]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sampled_paths_are_monotone(seed in 0u64..1000, xs in prop::collection::vec(0.0f64..=1.0, 2..40)) {
                let spec = LevyMeasureSpec::normalized_tempered_stable(0.8, 5.0, 200).unwrap();
                let path = SubordinatorPath::simulate(&spec, &[unit()], &mut rng(seed)).unwrap();
                let mut xs = xs;
                xs.sort_by(f64::total_cmp);
                let ws: Vec<f64> = xs.iter().map(|&x| path.evaluate(x, 0).unwrap()).collect();
                prop_assert!(ws.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(ws.iter().all(|&w| w >= 0.0));
            }

            #[test]
            fn discontinuities_match_jump_count(seed in 0u64..500) {
                let spec = LevyMeasureSpec::gamma(3.0, 2.0, 50).unwrap();
                let path = SubordinatorPath::simulate(&spec, &[unit()], &mut rng(seed)).unwrap();
                let set = path.jump_set(0);
                // each jump position is a distinct discontinuity
                let mut steps = 0;
                for j in set.sorted_jumps() {
                    let left = path.evaluate(j.position - 1e-12, 0).unwrap();
                    let at = path.evaluate(j.position, 0).unwrap();
                    if at > left { steps += 1; }
                }
                prop_assert_eq!(steps, set.len());
            }
        }
    }
}
