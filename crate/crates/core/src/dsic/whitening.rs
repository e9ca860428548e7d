//! Covariance estimation and Cholesky whitening of the basis functions.
//!
//! The raw orders are strongly correlated and have very different variances.
//! With Y = L·Lᴴ, applying T = L⁻¹ gives components that are uncorrelated
//! with unit variance over the training block.

use num_complex::Complex64;

use super::basis::BasisVector;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Relative diagonal loading: ε = LOADING · trace(Y) / terms.
pub const DIAGONAL_LOADING: f64 = 1e-8;

/// Sample covariance (1/n)·Σ φ[n]φᴴ[n] over the first `n_cov` vectors plus
/// diagonal loading.
pub fn estimate_covariance(basis: &[BasisVector], n_cov: usize) -> Result<CMatrix> {
    if n_cov == 0 || basis.len() < n_cov {
        return Err(Error::InsufficientSamples {
            needed: n_cov.max(1),
            have: basis.len(),
        });
    }
    let terms = basis[0].len();
    let mut y = CMatrix::zeros(terms, terms);
    for v in &basis[..n_cov] {
        if v.len() != terms {
            return Err(Error::Dimension {
                expected: terms,
                got: v.len(),
            });
        }
        for i in 0..terms {
            for j in 0..=i {
                y[(i, j)] += v.0[i] * v.0[j].conj();
            }
        }
    }
    let inv = 1.0 / n_cov as f64;
    for i in 0..terms {
        for j in 0..=i {
            y[(i, j)] *= inv;
            y[(j, i)] = y[(i, j)].conj();
        }
        y[(i, i)].im = 0.0;
    }
    let loading = DIAGONAL_LOADING * y.trace().re / terms as f64;
    for i in 0..terms {
        y[(i, i)].re += loading;
    }
    Ok(y)
}

/// Whitening transform built from a Hermitian positive-definite covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningTransform {
    covariance: CMatrix,
    lower: CMatrix,
    transform: CMatrix,
}

impl WhiteningTransform {
    pub fn identity(terms: usize) -> Self {
        Self {
            covariance: CMatrix::identity(terms),
            lower: CMatrix::identity(terms),
            transform: CMatrix::identity(terms),
        }
    }

    pub fn covariance(&self) -> &CMatrix {
        &self.covariance
    }

    /// Cholesky factor L (lower triangular, positive real diagonal).
    pub fn lower(&self) -> &CMatrix {
        &self.lower
    }

    /// T = L⁻¹.
    pub fn transform(&self) -> &CMatrix {
        &self.transform
    }

    pub fn terms(&self) -> usize {
        self.transform.rows()
    }
}

/// Cholesky factorization Y = L·Lᴴ. A non-positive pivot is reported with
/// its index.
pub fn cholesky(y: &CMatrix) -> Result<CMatrix> {
    if !y.is_square() {
        return Err(Error::Dimension {
            expected: y.rows(),
            got: y.cols(),
        });
    }
    let n = y.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = y[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::NotPositiveDefinite { index: j, value: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = y[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix with nonzero diagonal, by forward
/// substitution.
pub fn invert_lower(l: &CMatrix) -> CMatrix {
    let n = l.rows();
    let mut t = CMatrix::zeros(n, n);
    for j in 0..n {
        t[(j, j)] = l[(j, j)].inv();
        for i in j + 1..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in j..i {
                s += l[(i, k)] * t[(k, j)];
            }
            t[(i, j)] = -s / l[(i, i)];
        }
    }
    t
}

pub fn whitening_from_covariance(y: &CMatrix) -> Result<WhiteningTransform> {
    let lower = cholesky(y)?;
    let transform = invert_lower(&lower);
    Ok(WhiteningTransform {
        covariance: y.clone(),
        lower,
        transform,
    })
}

/// φ̃ = T·φ.
pub fn whiten(phi: &BasisVector, t: &WhiteningTransform) -> Result<BasisVector> {
    let m = t.transform();
    if phi.len() != m.cols() {
        return Err(Error::Dimension {
            expected: m.cols(),
            got: phi.len(),
        });
    }
    // T is lower triangular: row i only touches φ[0..=i].
    Ok(BasisVector(
        (0..m.rows())
            .map(|i| {
                m.row(i)[..=i]
                    .iter()
                    .zip(&phi.0[..=i])
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect(),
    ))
}
