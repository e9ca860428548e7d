//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's own solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use fdsic::linalg::CMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn to_nalgebra(m: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn from_nalgebra(m: &DMatrix<Complex64>) -> CMatrix {
    let rows: Vec<Vec<Complex64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    CMatrix::from_rows(&rows).unwrap()
}

/// Random Hermitian positive-definite matrix `I + GᴴG/(2n)` with G having
/// unit-variance complex Gaussian entries. Its eigenvalues lie in roughly
/// [1, 3] for large n.
pub fn random_hpd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    DMatrix::identity(n, n) + g.adjoint() * &g / Complex64::new(2.0 * n as f64, 0.0)
}

/// Exact solve through LU factorization.
pub fn lu_solve(a: &DMatrix<Complex64>, b: &[Complex64]) -> Vec<Complex64> {
    let x = a
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .expect("nonsingular");
    x.iter().copied().collect()
}

/// Least-squares fit of `y ≈ A·c` through SVD.
pub fn lstsq(rows: &[Vec<Complex64>], y: &[Complex64]) -> Vec<Complex64> {
    let cols = rows[0].len();
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let svd = a.svd(true, true);
    let c = svd
        .solve(&DVector::from_column_slice(y), 1e-12)
        .expect("svd solve");
    c.iter().copied().collect()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn mean_power(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>() / v.len() as f64
}

pub fn db(p: f64) -> f64 {
    10.0 * p.log10()
}

/// Memory-polynomial output Σ_m Σ_k c[m][k]·x[n-m]|x[n-m]|^(order_k - 1),
/// computed straight from the definition.
pub fn hammerstein(x: &[Complex64], coeffs: &[Vec<Complex64>], orders: &[usize]) -> Vec<Complex64> {
    (0..x.len())
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, block) in coeffs.iter().enumerate() {
                if n < m {
                    continue;
                }
                let s = x[n - m];
                for (c, &p) in block.iter().zip(orders) {
                    acc += c * s * s.norm().powi(p as i32 - 1);
                }
            }
            acc
        })
        .collect()
}

/// Regression rows [φ_k(x[n-m])] for the block least-squares oracle.
pub fn hammerstein_rows(
    x: &[Complex64],
    memory: usize,
    orders: &[usize],
    range: std::ops::Range<usize>,
) -> Vec<Vec<Complex64>> {
    range
        .map(|n| {
            let mut row = Vec::with_capacity(memory * orders.len());
            for m in 0..memory {
                let s = if n >= m {
                    x[n - m]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                for &p in orders {
                    row.push(s * s.norm().powi(p as i32 - 1));
                }
            }
            row
        })
        .collect()
}
