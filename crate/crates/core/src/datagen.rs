//! Synthetic datasets drawn from the warped-GP prior.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{gram, KernelSpec};
use crate::levy::{open_uniform, Interval, LevyMeasureSpec, SubordinatorPath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarpSpec {
    /// `W(x) = x`: a plain GP sample.
    Identity,
    Levy(LevyMeasureSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputLayout {
    /// Cell centres of a regular grid; `n_points` must be a perfect `d`-th
    /// power when `d > 1`.
    #[default]
    Grid,
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub domains: Vec<Interval>,
    pub n_points: usize,
    pub n_observed: usize,
    pub kernel: KernelSpec,
    pub warp: WarpSpec,
    pub noise_std: f64,
    #[serde(default)]
    pub layout: InputLayout,
    pub seed: u64,
}

impl GenSpec {
    /// The SE experiment: a tempered stable warp on (0, 0.5), length scale
    /// 0.1 and noise std 0.1.
    pub fn se_experiment(seed: u64) -> Self {
        GenSpec {
            domains: vec![Interval { lb: 0.0, ub: 0.5 }],
            n_points: 100,
            n_observed: 100,
            kernel: KernelSpec::squared_exponential(0.1, 1.0).expect("valid kernel"),
            warp: WarpSpec::Levy(
                LevyMeasureSpec::normalized_tempered_stable(0.8, 5.0, crate::levy::DEFAULT_N_TERMS)
                    .expect("valid measure"),
            ),
            noise_std: 0.1,
            layout: InputLayout::Grid,
            seed,
        }
    }

    /// The Matérn-5/2 experiment: 500 grid points on (0, 1), 100 observed.
    pub fn matern_experiment(seed: u64) -> Self {
        GenSpec {
            domains: vec![Interval { lb: 0.0, ub: 1.0 }],
            n_points: 500,
            n_observed: 100,
            kernel: KernelSpec::matern52(0.1, 1.0).expect("valid kernel"),
            ..Self::se_experiment(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.domains.is_empty() {
            return Err(Error::param("at least one input dimension is required"));
        }
        for d in &self.domains {
            Interval::new(d.lb, d.ub)?;
        }
        if self.n_points == 0 {
            return Err(Error::param("n_points must be positive"));
        }
        if self.n_observed == 0 || self.n_observed > self.n_points {
            return Err(Error::param(format!(
                "n_observed must lie in 1..={}, got {}",
                self.n_points, self.n_observed
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::param(format!("noise_std must be non-negative, got {}", self.noise_std)));
        }
        self.kernel.validate()?;
        if let WarpSpec::Levy(l) = &self.warp {
            l.validate()?;
        }
        if self.layout == InputLayout::Grid && self.domains.len() > 1 {
            grid_side(self.n_points, self.domains.len())?;
        }
        Ok(())
    }
}

fn grid_side(n: usize, d: usize) -> Result<usize> {
    let side = (n as f64).powf(1.0 / d as f64).round() as usize;
    if side.checked_pow(d as u32) != Some(n) {
        return Err(Error::param(format!(
            "a {d}-dimensional grid needs a perfect {d}-th power of points, got {n}"
        )));
    }
    Ok(side)
}

/// Inputs of `n` points; rows are points.
pub fn input_grid<R: Rng + ?Sized>(
    domains: &[Interval],
    n: usize,
    layout: InputLayout,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let d = domains.len();
    match layout {
        InputLayout::Grid => {
            let side = if d == 1 { n } else { grid_side(n, d)? };
            let mut x = DMatrix::zeros(n, d);
            for i in 0..n {
                let mut rest = i;
                // first column varies slowest
                for k in (0..d).rev() {
                    let idx = rest % side;
                    rest /= side;
                    let dom = domains[k];
                    x[(i, k)] = dom.lb + (idx as f64 + 0.5) * dom.length() / side as f64;
                }
            }
            Ok(x)
        }
        InputLayout::UniformRandom => {
            let mut x = DMatrix::zeros(n, d);
            for i in 0..n {
                for (k, dom) in domains.iter().enumerate() {
                    x[(i, k)] = open_uniform(dom, rng);
                }
            }
            Ok(x)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    /// Noise-free function values.
    pub f: DVector<f64>,
    pub y: DVector<f64>,
    pub observed: Vec<bool>,
    pub true_path: Option<SubordinatorPath>,
}

impl Dataset {
    fn rows(&self, keep: bool) -> Vec<usize> {
        (0..self.observed.len()).filter(|&i| self.observed[i] == keep).collect()
    }

    pub fn observed_rows(&self) -> Vec<usize> {
        self.rows(true)
    }

    pub fn held_out_rows(&self) -> Vec<usize> {
        self.rows(false)
    }

    pub fn observed_x(&self) -> DMatrix<f64> {
        self.x.select_rows(&self.observed_rows())
    }

    pub fn observed_y(&self) -> DVector<f64> {
        self.y.select_rows(&self.observed_rows())
    }

    pub fn held_out_x(&self) -> DMatrix<f64> {
        self.x.select_rows(&self.held_out_rows())
    }

    pub fn held_out_y(&self) -> DVector<f64> {
        self.y.select_rows(&self.held_out_rows())
    }
}

/// Draw a zero-mean GP sample at `coords`.
pub fn sample_gp<R: Rng + ?Sized>(
    coords: &DMatrix<f64>,
    kernel: &KernelSpec,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let n = coords.nrows();
    let k = gram(coords, kernel, kernel.jitter);
    let chol = Cholesky::new(k)
        .ok_or_else(|| Error::numerical(format!("prior Gram factorization failed for {n} points")))?;
    let z = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
    Ok(chol.l() * z)
}

/// Sample the warp, the latent function, the noisy observations and the
/// observed subset, in that order.
pub fn generate<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> Result<Dataset> {
    spec.validate()?;
    let x = input_grid(&spec.domains, spec.n_points, spec.layout, rng)?;
    let (coords, true_path) = match &spec.warp {
        WarpSpec::Identity => (x.clone(), None),
        WarpSpec::Levy(levy) => {
            let path = SubordinatorPath::simulate(levy, &spec.domains, rng)?;
            (crate::gp::warp_inputs(&path, &x)?, Some(path))
        }
    };
    let f = sample_gp(&coords, &spec.kernel, rng)?;
    let y = DVector::from_fn(f.len(), |i, _| {
        let e: f64 = StandardNormal.sample(rng);
        f[i] + spec.noise_std * e
    });
    let mut observed = vec![false; spec.n_points];
    for i in index::sample(rng, spec.n_points, spec.n_observed) {
        observed[i] = true;
    }
    Ok(Dataset {
        x,
        f,
        y,
        observed,
        true_path,
    })
}
