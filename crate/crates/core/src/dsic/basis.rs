//! Parallel Hammerstein basis and regressor stacking.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::signal::ComplexSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisConfig {
    /// Highest nonlinearity order.
    pub order: usize,
    /// Memory depth in samples.
    pub memory: usize,
    /// Generate only odd orders 1, 3, 5, … (the usual passband case).
    #[serde(default = "default_true")]
    pub odd_only: bool,
}

fn default_true() -> bool {
    true
}

impl BasisConfig {
    pub fn new(order: usize, memory: usize) -> Self {
        Self {
            order,
            memory,
            odd_only: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return config_err("basis: order must be at least 1");
        }
        if self.memory == 0 {
            return config_err("basis: memory depth must be at least 1");
        }
        Ok(())
    }

    /// Orders p that are generated.
    pub fn orders(&self) -> Vec<usize> {
        let step = if self.odd_only { 2 } else { 1 };
        (1..=self.order).step_by(step).collect()
    }

    /// Number of basis functions per sample.
    pub fn terms(&self) -> usize {
        if self.odd_only {
            self.order.div_ceil(2)
        } else {
            self.order
        }
    }

    /// Regressor length `memory · terms`.
    pub fn dim(&self) -> usize {
        self.memory * self.terms()
    }
}

/// Instantaneous basis φ[n] = [φ_1[n], φ_3[n], …].
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector(pub Vec<Complex64>);

impl BasisVector {
    pub fn zeros(terms: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); terms])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

/// φ_p(x) = x·|x|^(p-1) for each configured order.
pub fn basis_of(x: Complex64, orders: &[usize]) -> BasisVector {
    let mag = x.norm();
    BasisVector(
        orders
            .iter()
            .map(|&p| {
                if p == 1 {
                    x
                } else {
                    x * mag.powi(p as i32 - 1)
                }
            })
            .collect(),
    )
}

pub fn basis_generate(x: &ComplexSequence, cfg: &BasisConfig) -> Result<Vec<BasisVector>> {
    cfg.validate()?;
    let orders = cfg.orders();
    Ok(x.samples().iter().map(|&s| basis_of(s, &orders)).collect())
}

/// Stacked regressor u[n] = [φ̃[n]ᵀ φ̃[n-1]ᵀ … φ̃[n-M+1]ᵀ]ᵀ.
#[derive(Debug, Clone, PartialEq)]
pub struct Regressor(pub Vec<Complex64>);

impl Regressor {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Build u[n] from `history`, newest first. Missing history (stream start)
/// must already be zero-padded by the caller.
pub fn build_regressor(history: &[BasisVector]) -> Result<Regressor> {
    let terms = history.first().map_or(0, BasisVector::len);
    let mut u = Vec::with_capacity(terms * history.len());
    for v in history {
        if v.len() != terms {
            return Err(Error::Dimension {
                expected: terms,
                got: v.len(),
            });
        }
        u.extend_from_slice(v.as_slice());
    }
    Ok(Regressor(u))
}

/// Sliding regressor updated by a block shift per sample.
#[derive(Debug, Clone)]
pub struct RegressorBuffer {
    terms: usize,
    u: Vec<Complex64>,
}

impl RegressorBuffer {
    pub fn new(cfg: &BasisConfig) -> Self {
        Self {
            terms: cfg.terms(),
            u: vec![Complex64::new(0.0, 0.0); cfg.dim()],
        }
    }

    /// Shift in the newest whitened basis vector.
    pub fn push(&mut self, newest: &BasisVector) -> Result<&[Complex64]> {
        if newest.len() != self.terms {
            return Err(Error::Dimension {
                expected: self.terms,
                got: newest.len(),
            });
        }
        let n = self.u.len();
        self.u.copy_within(0..n - self.terms, self.terms);
        self.u[..self.terms].copy_from_slice(newest.as_slice());
        Ok(&self.u)
    }

    pub fn current(&self) -> &[Complex64] {
        &self.u
    }
}
