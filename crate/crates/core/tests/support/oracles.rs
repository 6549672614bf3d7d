//! Reference computations that share no code with the library.
#![allow(dead_code)]

use lambid_core::nalgebra::{Complex, DMatrix};
use lambid_core::system::SystemMatrices;
use lambid_core::ElasticConstants;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Positive-definite orthotropic constants over a wide range of composites.
pub fn random_theta(rng: &mut ChaCha8Rng) -> ElasticConstants {
    let c11: f64 = rng.random_range(10.0..200.0);
    let c33: f64 = rng.random_range(5.0..40.0);
    let c13 = rng.random_range(0.05..0.8) * (c11 * c33).sqrt();
    let c55 = rng.random_range(2.0..20.0);
    let rho = rng.random_range(1000.0..3000.0);
    ElasticConstants::from_gpa(c11, c13, c33, c55, rho).unwrap()
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// `P_0..=P_n` and their first two derivatives at `x`, by the three-term
/// recurrence and `P'_{k+1} = P'_{k-1} + (2k+1) P_k`.
pub fn legendre_all(n: usize, x: f64) -> [Vec<f64>; 3] {
    let mut p = vec![0.0; n + 2];
    let mut d1 = vec![0.0; n + 2];
    let mut d2 = vec![0.0; n + 2];
    p[0] = 1.0;
    p[1] = x;
    d1[1] = 1.0;
    for k in 1..=n {
        p[k + 1] = ((2 * k + 1) as f64 * x * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
        d1[k + 1] = d1[k - 1] + (2 * k + 1) as f64 * p[k];
        d2[k + 1] = d2[k - 1] + (2 * k + 1) as f64 * d1[k];
    }
    p.truncate(n + 1);
    d1.truncate(n + 1);
    d2.truncate(n + 1);
    [p, d1, d2]
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let [p, d, _] = legendre_all(n, x);
                let dx = p[n] / d[n];
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let [_, d, _] = legendre_all(n, x);
            (x, 2.0 / ((1.0 - x * x) * d[n] * d[n]))
        })
        .collect()
}

/// `Q_m^(n)(q3)` on `[0, kh]`.
fn q(m: usize, n: usize, kh: f64, q3: f64) -> f64 {
    let x = 2.0 * q3 / kh - 1.0;
    let all = legendre_all(m.max(1), x);
    ((2 * m + 1) as f64 / kh).sqrt() * (2.0 / kh).powi(n as i32) * all[n][m]
}

/// `∫_0^kh Q_j Q_m^(n) dq3` by 24-point Gauss-Legendre quadrature.
pub fn nt1_quadrature(m: usize, j: usize, n: usize, kh: f64) -> f64 {
    gauss_legendre(24)
        .iter()
        .map(|&(x, w)| {
            let q3 = 0.5 * kh * (x + 1.0);
            0.5 * kh * w * q(j, 0, kh, q3) * q(m, n, kh, q3)
        })
        .sum()
}

/// `[Q_j Q_m^(n)](0) - [Q_j Q_m^(n)](kh)`.
pub fn nt2_boundary(m: usize, j: usize, n: usize, kh: f64) -> f64 {
    q(j, 0, kh, 0.0) * q(m, n, kh, 0.0) - q(j, 0, kh, kh) * q(m, n, kh, kh)
}

/// Complex block matrix `[[A11, i Im A13], [i Im A31, A33]]` before realification.
pub fn complex_block(sys: &SystemMatrices) -> DMatrix<Complex<f64>> {
    let n = sys.block_dim();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| match (r < n, c < n) {
        (true, true) => Complex::new(sys.a11[(r, c)], 0.0),
        (true, false) => Complex::new(0.0, sys.a13_im[(r, c - n)]),
        (false, true) => Complex::new(0.0, sys.a31_im[(r - n, c)]),
        (false, false) => Complex::new(sys.a33[(r - n, c - n)], 0.0),
    })
}

/// Eigenvalues of a complex matrix from its complex Schur form.
pub fn complex_eigenvalues(a: DMatrix<Complex<f64>>) -> Vec<Complex<f64>> {
    a.schur().eigenvalues().expect("triangular Schur form").iter().copied().collect()
}

/// Worst distance between two eigenvalue multisets after sorting by real
/// then imaginary part, relative to the spectral radius.
pub fn multiset_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    let key = |x: &Complex<f64>, y: &Complex<f64>| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(key);
    b.sort_by(key);
    let scale = a.iter().chain(&b).map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}
