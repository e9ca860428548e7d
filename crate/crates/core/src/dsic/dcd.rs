//! Leading-element dichotomous coordinate descent.
//!
//! Solves R·Δh = β approximately without multiplications. The complex
//! system is handled as its real expansion with interleaved coordinates
//! (2k = Re Δh_k, 2k+1 = Im Δh_k), so N = 2·dim. Step sizes are H/2^m;
//! with H a power of two every scaling is a bit shift. Comparisons are
//! charged as additions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::counters::OpCount;
use crate::error::{config_err, Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcdParams {
    /// Amplitude range H of the solution update.
    pub amplitude: f64,
    /// Bits M_b: the finest step is H/2^M_b.
    pub bits: u32,
    /// Maximum successful updates N_u per solve.
    pub max_updates: usize,
}

impl DcdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return config_err("dcd: amplitude H must be positive");
        }
        if self.bits == 0 || self.bits > 52 {
            return config_err(format!("dcd: bits must be in 1..=52, got {}", self.bits));
        }
        if self.max_updates == 0 {
            return config_err("dcd: max_updates must be positive");
        }
        Ok(())
    }

    /// Smallest update step H/2^M_b.
    pub fn resolution(&self) -> f64 {
        self.amplitude * 2f64.powi(-(self.bits as i32))
    }

    /// Worst-case additions N(2N_u + M_b - 1) + N_u for a real system of
    /// dimension `n`.
    pub fn addition_bound(&self, n: usize) -> u64 {
        let (n, nu, mb) = (n as u64, self.max_updates as u64, self.bits as u64);
        n * (2 * nu + mb - 1) + nu
    }
}

impl Default for DcdParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            bits: 15,
            max_updates: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcdSolution {
    pub delta: Vec<Complex64>,
    /// r = β - R·Δh.
    pub residual: Vec<Complex64>,
    pub updates: usize,
    pub ops: OpCount,
}

#[inline]
fn component(v: &[Complex64], c: usize) -> f64 {
    let z = v[c / 2];
    if c.is_multiple_of(2) {
        z.re
    } else {
        z.im
    }
}

/// Solve in place: `delta` is accumulated and `residual` starts as β.
/// Returns (successful updates, operation count).
pub(crate) fn dcd_solve_into(
    r_mat: &CMatrix,
    delta: &mut [Complex64],
    residual: &mut [Complex64],
    p: &DcdParams,
) -> (usize, OpCount) {
    let dim = residual.len();
    let n = 2 * dim;
    let mut adds = 0u64;
    let mut updates = 0usize;
    let mut m = 1u32;
    let mut step = p.amplitude * 0.5;

    for _ in 0..p.max_updates {
        // Leading element of the real-expanded residual.
        let mut lead = 0usize;
        let mut lead_abs = component(residual, 0).abs();
        for c in 1..n {
            let a = component(residual, c).abs();
            if a > lead_abs {
                lead = c;
                lead_abs = a;
            }
        }
        adds += n as u64 - 1;

        let k = lead / 2;
        let diag = r_mat[(k, k)].re;
        let mut exhausted = false;
        loop {
            adds += 1;
            if lead_abs > 0.5 * step * diag {
                break;
            }
            m += 1;
            step *= 0.5;
            if m > p.bits {
                exhausted = true;
                break;
            }
        }
        if exhausted {
            break;
        }

        let r_lead = component(residual, lead);
        let signed = if r_lead > 0.0 { step } else { -step };
        if lead.is_multiple_of(2) {
            delta[k].re += signed;
            for (i, r) in residual.iter_mut().enumerate() {
                *r -= r_mat[(i, k)] * signed;
            }
        } else {
            delta[k].im += signed;
            // Column of R times j.
            for (i, r) in residual.iter_mut().enumerate() {
                let col = r_mat[(i, k)];
                r.re += col.im * signed;
                r.im -= col.re * signed;
            }
        }
        adds += 1 + n as u64;
        updates += 1;
    }
    (updates, OpCount::new(0, adds))
}

/// Approximate solution of R·Δh = β.
pub fn dcd_solve(r_mat: &CMatrix, beta: &[Complex64], p: &DcdParams) -> Result<DcdSolution> {
    p.validate()?;
    if !r_mat.is_square() || r_mat.rows() != beta.len() {
        return Err(Error::Dimension {
            expected: r_mat.rows(),
            got: beta.len(),
        });
    }
    let mut delta = vec![Complex64::new(0.0, 0.0); beta.len()];
    let mut residual = beta.to_vec();
    if beta.is_empty() {
        return Ok(DcdSolution {
            delta,
            residual,
            updates: 0,
            ops: OpCount::default(),
        });
    }
    let (updates, ops) = dcd_solve_into(r_mat, &mut delta, &mut residual, p);
    Ok(DcdSolution {
        delta,
        residual,
        updates,
        ops,
    })
}
