//! Independent reference computations shared by the integration and
//! acceptance tests. Nothing here calls into the library's numerics.
#![allow(dead_code)]

use statrs::function::gamma::gamma_ur;

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∫_0^∞ x^k · C x^{−1−α} e^{−βx} dx` for `k > α`, by quadrature.
///
/// Substituting `x = u^p` with `p = 1/(k − α)` turns the integrand into the
/// smooth `C p e^{−β u^p}`.
pub fn ts_moment(c: f64, alpha: f64, beta: f64, k: f64) -> f64 {
    let p = 1.0 / (k - alpha);
    // e^{−β u^p} < e^{−60} beyond u_max
    let u_max = (60.0 / beta).powf(1.0 / p);
    c * p * simpson(|u| (-beta * u.powf(p)).exp(), 0.0, u_max, 200_000)
}

/// Expected value of the accepted jump mass of a tempered stable series
/// truncated after `n_terms` epochs of a rate-`t` Poisson process:
/// `∫ x(γ) e^{−β x(γ)} · t · P(Poisson(tγ) ≤ N − 1) dγ`.
pub fn truncated_ts_mean(c: f64, alpha: f64, beta: f64, t: f64, n_terms: usize) -> f64 {
    let n = n_terms as f64;
    let g_max = (n + 40.0 * n.sqrt() + 100.0) / t;
    let integrand = |g: f64| {
        if g <= 0.0 {
            return 0.0;
        }
        let x = (alpha * g / c).powf(-1.0 / alpha);
        x * (-beta * x).exp() * t * gamma_ur(n, t * g)
    };
    simpson(integrand, 0.0, g_max, 400_000)
}

pub fn se(l: f64, s2: f64, r: f64) -> f64 {
    s2 * (-(r * r) / (2.0 * l * l)).exp()
}

pub fn matern52(l: f64, s2: f64, r: f64) -> f64 {
    let a = 5f64.sqrt() * r / l;
    s2 * (1.0 + a + a * a / 3.0) * (-a).exp()
}

pub type Mat = Vec<Vec<f64>>;

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; p]; n];
    for i in 0..n {
        for k in 0..m {
            for j in 0..p {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn transpose(a: &Mat) -> Mat {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Gauss-Jordan inverse with partial pivoting, plus `ln |det|`.
pub fn inverse_and_log_det(a: &Mat) -> (Mat, f64) {
    let n = a.len();
    let mut m: Mat = a.clone();
    let mut inv: Mat = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut log_det = 0.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col];
        log_det += d.abs().ln();
        for j in 0..n {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = m[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        m[i][j] -= f * m[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    (inv, log_det)
}

pub struct DenseGp {
    pub mean: Vec<f64>,
    pub cov: Mat,
    pub log_lik: f64,
}

/// Textbook GP regression with an explicit inverse. `k(a, b, same)` must add
/// any diagonal jitter itself when `same` is true.
pub fn dense_gp(
    train: &[Vec<f64>],
    y: &[f64],
    noise: f64,
    test: &[Vec<f64>],
    k: impl Fn(&[f64], &[f64], bool) -> f64,
) -> DenseGp {
    let n = train.len();
    let mut kxx: Mat = (0..n)
        .map(|i| (0..n).map(|j| k(&train[i], &train[j], i == j)).collect())
        .collect();
    for (i, row) in kxx.iter_mut().enumerate() {
        row[i] += noise;
    }
    let (inv, log_det) = inverse_and_log_det(&kxx);
    let ks: Mat = test.iter().map(|t| train.iter().map(|x| k(t, x, false)).collect()).collect();
    let yv: Mat = y.iter().map(|v| vec![*v]).collect();
    let alpha = matmul(&inv, &yv);
    let mean: Vec<f64> = matmul(&ks, &alpha).into_iter().map(|r| r[0]).collect();
    let kss: Mat = (0..test.len())
        .map(|i| (0..test.len()).map(|j| k(&test[i], &test[j], i == j)).collect())
        .collect();
    let reduction = matmul(&matmul(&ks, &inv), &transpose(&ks));
    let cov: Mat = (0..test.len())
        .map(|i| (0..test.len()).map(|j| kss[i][j] - reduction[i][j]).collect())
        .collect();
    let quad: f64 = y.iter().zip(&alpha).map(|(a, b)| a * b[0]).sum();
    let log_lik = -0.5 * quad - 0.5 * log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    DenseGp { mean, cov, log_lik }
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mixture mean and covariance written out term by term.
pub fn brute_force_mixture(means: &[Vec<f64>], covs: &[Mat]) -> (Vec<f64>, Mat) {
    let n = means.len() as f64;
    let m = means[0].len();
    let mut mean = vec![0.0; m];
    for mk in means {
        for i in 0..m {
            mean[i] += mk[i] / n;
        }
    }
    let mut cov = vec![vec![0.0; m]; m];
    for (mk, kk) in means.iter().zip(covs) {
        for i in 0..m {
            for j in 0..m {
                cov[i][j] += (kk[i][j] + (mk[i] - mean[i]) * (mk[j] - mean[j])) / n;
            }
        }
    }
    (mean, cov)
}

#[test]
fn quadrature_sanity() {
    // ∫_0^∞ x^{0.2−1} e^{−x} dx = Γ(0.2) ≈ 4.5908
    let v = ts_moment(1.0, 0.8, 1.0, 1.0);
    assert!((v - 4.590_843_712).abs() < 1e-6, "{v}");
    let (inv, ld) = inverse_and_log_det(&vec![vec![4.0, 1.0], vec![1.0, 3.0]]);
    assert!((ld - 11f64.ln()).abs() < 1e-14);
    assert!((inv[0][0] - 3.0 / 11.0).abs() < 1e-15);
}
