//! Stationary covariance functions on warped coordinates.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_JITTER: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    #[serde(rename = "se", alias = "squared_exponential")]
    SquaredExponential,
    #[serde(rename = "matern52", alias = "matern")]
    Matern52,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub length_scale: f64,
    pub signal_variance: f64,
    /// Diagonal stabilizer relative to `signal_variance`.
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

fn default_jitter() -> f64 {
    DEFAULT_JITTER
}

impl KernelSpec {
    pub fn new(family: KernelFamily, length_scale: f64, signal_variance: f64) -> Result<Self> {
        let spec = KernelSpec {
            family,
            length_scale,
            signal_variance,
            jitter: DEFAULT_JITTER,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn squared_exponential(length_scale: f64, signal_variance: f64) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, length_scale, signal_variance)
    }

    pub fn matern52(length_scale: f64, signal_variance: f64) -> Result<Self> {
        Self::new(KernelFamily::Matern52, length_scale, signal_variance)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_scale > 0.0 && self.length_scale.is_finite()) {
            return Err(Error::param(format!(
                "length scale must be positive, got {}",
                self.length_scale
            )));
        }
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(Error::param(format!(
                "signal variance must be positive, got {}",
                self.signal_variance
            )));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::param(format!("jitter must be non-negative, got {}", self.jitter)));
        }
        Ok(())
    }

    pub fn with_length_scale(self, length_scale: f64) -> Result<Self> {
        let spec = KernelSpec {
            length_scale,
            ..self
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_jitter(self, jitter: f64) -> Result<Self> {
        let spec = KernelSpec { jitter, ..self };
        spec.validate()?;
        Ok(spec)
    }

    /// Covariance at distance `r`, without argument checks.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let s = r / self.length_scale;
        match self.family {
            KernelFamily::SquaredExponential => self.signal_variance * (-0.5 * s * s).exp(),
            KernelFamily::Matern52 => {
                let a = 5f64.sqrt() * s;
                self.signal_variance * (1.0 + a + a * a / 3.0) * (-a).exp()
            }
        }
    }
}

pub fn kernel_value(spec: &KernelSpec, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::param(format!("distance must be non-negative, got {r}")));
    }
    Ok(spec.eval(r))
}

#[inline]
fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Cross-covariance between two coordinate sets (rows are points).
pub fn cross_gram(a: &DMatrix<f64>, b: &DMatrix<f64>, spec: &KernelSpec) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols(), "coordinate dimension mismatch");
    let rows_a: Vec<Vec<f64>> = a.row_iter().map(|r| r.iter().copied().collect()).collect();
    let rows_b: Vec<Vec<f64>> = b.row_iter().map(|r| r.iter().copied().collect()).collect();
    DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| {
        spec.eval(distance(&rows_a[i], &rows_b[j]))
    })
}

/// Symmetric Gram matrix of one coordinate set with `jitter·σ_f²` on the
/// diagonal. Duplicated rows are allowed.
pub fn gram(points: &DMatrix<f64>, spec: &KernelSpec, jitter: f64) -> DMatrix<f64> {
    let n = points.nrows();
    let rows: Vec<Vec<f64>> = points.row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = spec.signal_variance * (1.0 + jitter);
        for j in 0..i {
            let v = spec.eval(distance(&rows[i], &rows[j]));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Gram assembly; jitter applies only when both sides are the same point set.
pub fn build_gram(
    points_a: &DMatrix<f64>,
    points_b: &DMatrix<f64>,
    spec: &KernelSpec,
    jitter: f64,
) -> Result<DMatrix<f64>> {
    if points_a.ncols() != points_b.ncols() && points_a.nrows() > 0 && points_b.nrows() > 0 {
        return Err(Error::param(format!(
            "coordinate dimensions differ: {} vs {}",
            points_a.ncols(),
            points_b.ncols()
        )));
    }
    if points_a.iter().chain(points_b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::param("warped coordinates must be finite"));
    }
    if jitter.is_nan() || jitter < 0.0 {
        return Err(Error::param(format!("jitter must be non-negative, got {jitter}")));
    }
    if points_a.nrows() == 0 || points_b.nrows() == 0 {
        return Ok(DMatrix::zeros(points_a.nrows(), points_b.nrows()));
    }
    if points_a == points_b {
        Ok(gram(points_a, spec, jitter))
    } else {
        Ok(cross_gram(points_a, points_b, spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn se() -> KernelSpec {
        KernelSpec::squared_exponential(0.1, 1.0).unwrap()
    }

    fn matern() -> KernelSpec {
        KernelSpec::matern52(0.1, 1.0).unwrap()
    }

    #[test]
    fn zero_lag_is_signal_variance() {
        for fam in [KernelFamily::SquaredExponential, KernelFamily::Matern52] {
            let k = KernelSpec::new(fam, 0.3, 2.5).unwrap();
            assert_eq!(kernel_value(&k, 0.0).unwrap(), 2.5);
        }
    }

    #[test]
    fn se_value() {
        assert_relative_eq!(kernel_value(&se(), 0.1).unwrap(), (-0.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(kernel_value(&se(), 0.1).unwrap(), 0.6065, epsilon = 1e-4);
    }

    #[test]
    fn matern_decays_slower_at_one_length_scale() {
        // at r = l: 0.5240 (Matérn) < 0.6065 (SE); the Matérn tail only
        // dominates beyond r ≈ 1.95 l
        let m = kernel_value(&matern(), 0.1).unwrap();
        let s = kernel_value(&se(), 0.1).unwrap();
        assert_relative_eq!(m, 0.523_994, epsilon = 1e-6);
        assert!(m < s);
        let m3 = kernel_value(&matern(), 0.3).unwrap();
        let s3 = kernel_value(&se(), 0.3).unwrap();
        assert!(m3 > 2.0 * s3);
    }

    #[test]
    fn negative_distance_rejected() {
        assert!(kernel_value(&se(), -1e-3).is_err());
        assert!(kernel_value(&se(), f64::NAN).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(KernelSpec::squared_exponential(0.0, 1.0).is_err());
        assert!(KernelSpec::squared_exponential(1.0, -1.0).is_err());
    }

    #[test]
    fn single_point_gram() {
        let p = DMatrix::from_row_slice(1, 1, &[0.4]);
        let k = KernelSpec::squared_exponential(0.2, 3.0).unwrap();
        let g = build_gram(&p, &p, &k, 1e-8).unwrap();
        assert_eq!(g[(0, 0)], 3.0 * (1.0 + 1e-8));
    }

    #[test]
    fn empty_gram() {
        let a = DMatrix::<f64>::zeros(0, 1);
        let b = DMatrix::from_row_slice(2, 1, &[0.1, 0.2]);
        let g = build_gram(&a, &b, &se(), 1e-8).unwrap();
        assert_eq!(g.shape(), (0, 2));
    }

    #[test]
    fn cross_gram_has_no_jitter() {
        let a = DMatrix::from_row_slice(2, 1, &[0.1, 0.2]);
        let b = DMatrix::from_row_slice(3, 1, &[0.1, 0.2, 0.3]);
        let g = build_gram(&a, &b, &se(), 1e-3).unwrap();
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(1, 1)], 1.0);
    }

    #[test]
    fn duplicated_coordinates_factorize() {
        let p = DMatrix::from_row_slice(4, 1, &[0.2, 0.2, 0.2, 0.5]);
        let g = build_gram(&p, &p, &se(), DEFAULT_JITTER).unwrap();
        assert!(g.cholesky().is_some());
    }

    proptest! {
        #[test]
        fn kernel_non_increasing(r1 in 0.0f64..2.0, r2 in 0.0f64..2.0, l in 0.01f64..1.0) {
            for fam in [KernelFamily::SquaredExponential, KernelFamily::Matern52] {
                let k = KernelSpec::new(fam, l, 1.0).unwrap();
                let (a, b) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
                prop_assert!(k.eval(a) >= k.eval(b));
            }
        }

        #[test]
        fn gram_symmetric_positive_definite(xs in prop::collection::vec(0.0f64..3.0, 20), use_matern in any::<bool>()) {
            let k = if use_matern { matern() } else { se() };
            let p = DMatrix::from_row_slice(20, 1, &xs);
            let g = build_gram(&p, &p, &k, DEFAULT_JITTER).unwrap();
            prop_assert_eq!(&g, &g.transpose());
            prop_assert!(g.clone().cholesky().is_some());
        }

        #[test]
        fn shift_invariance(xs in prop::collection::vec(-1.0f64..1.0, 2..12), shift in -5.0f64..5.0) {
            let n = xs.len() / 2;
            let p = DMatrix::from_row_slice(n, 2, &xs[..2 * n]);
            let q = p.map(|v| v + shift);
            let g1 = build_gram(&p, &p, &se(), 1e-8).unwrap();
            let g2 = build_gram(&q, &q, &se(), 1e-8).unwrap();
            for (a, b) in g1.iter().zip(g2.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
