//! Exponentially weighted RLS with a DCD inner solver.
//!
//! Per sample n, with whitened basis φ̃[n] and regressor u[n]:
//!
//! 1. R[n] = λ·R[n-1] + u[n]·uᴴ[n], computed for the first `terms` rows only;
//!    the remaining rows follow from the shift structure of u.
//! 2. z̃[n] = y[n] - h̃ᴴ[n-1]·u[n]
//! 3. β₀[n] = λ·r[n-1] + z̃*[n]·u[n]
//! 4. R[n]·Δh̃ = β₀[n] solved by DCD, giving Δh̃[n] and r[n] = β₀ - R·Δh̃
//! 5. h̃[n] = h̃[n-1] + Δh̃[n]

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::BasisConfig;
use super::counters::{full_update_cost, step_costs, OpCount, OpCounters};
use super::dcd::{dcd_solve_into, DcdParams};
use crate::error::{config_err, Error, Result};
use crate::linalg::CMatrix;

/// Lowest accepted forgetting factor.
pub const MIN_FORGETTING: f64 = 0.9;

pub(crate) fn check_weights(lambda: f64, alpha: f64) -> Result<()> {
    if !(MIN_FORGETTING..=1.0).contains(&lambda) {
        return config_err(format!(
            "rls: forgetting factor must be in [{MIN_FORGETTING}, 1], got {lambda}"
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return config_err(format!(
            "rls: regularization must be in (0, 1), got {alpha}"
        ));
    }
    Ok(())
}

/// How step 1 refreshes the correlation matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationUpdate {
    /// Update the leading `terms` rows, shift the rest from R[n-1].
    #[default]
    ShiftStructured,
    /// Rank-one update of the whole matrix.
    Full,
}

#[derive(Debug, Clone)]
pub struct RlsState {
    coeffs: Vec<Complex64>,
    corr: CMatrix,
    residual: Vec<Complex64>,
    lambda: f64,
    alpha: f64,
    memory: usize,
    terms: usize,
    update: CorrelationUpdate,
    beta: Vec<Complex64>,
    delta: Vec<Complex64>,
    samples: usize,
}

impl RlsState {
    pub fn new(basis: &BasisConfig, lambda: f64, alpha: f64) -> Result<Self> {
        basis.validate()?;
        check_weights(lambda, alpha)?;
        let dim = basis.dim();
        let zero = Complex64::new(0.0, 0.0);
        Ok(Self {
            coeffs: vec![zero; dim],
            corr: CMatrix::scaled_identity(dim, alpha),
            residual: vec![zero; dim],
            lambda,
            alpha,
            memory: basis.memory,
            terms: basis.terms(),
            update: CorrelationUpdate::ShiftStructured,
            beta: vec![zero; dim],
            delta: vec![zero; dim],
            samples: 0,
        })
    }

    pub fn with_update(mut self, update: CorrelationUpdate) -> Self {
        self.update = update;
        self
    }

    /// Coefficients h̃ in the whitened domain.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn correlation(&self) -> &CMatrix {
        &self.corr
    }

    pub fn residual(&self) -> &[Complex64] {
        &self.residual
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    fn update_correlation_shifted(&mut self, phi: &[Complex64], u: &[Complex64]) {
        let (dim, p, lambda) = (self.dim(), self.terms, self.lambda);
        let r = &mut self.corr;
        // Lower-right block: R[n][i, j] = R[n-1][i-p, j-p]. Bottom-up so that
        // the rows read are still those of R[n-1].
        for i in (p..dim).rev() {
            for j in (p..dim).rev() {
                r[(i, j)] = r[(i - p, j - p)];
            }
        }
        for i in 0..p {
            let row = r.row_mut(i);
            for (x, uj) in row.iter_mut().zip(u) {
                *x = *x * lambda + phi[i] * uj.conj();
            }
        }
        // Hermitian completion of the leading columns and block.
        for i in 0..dim {
            for j in 0..p.min(i) {
                let v = r[(j, i)].conj();
                r[(i, j)] = v;
            }
        }
        for i in 0..p {
            r[(i, i)].im = 0.0;
        }
    }

    fn update_correlation_full(&mut self, u: &[Complex64]) {
        let (dim, lambda) = (self.dim(), self.lambda);
        let r = &mut self.corr;
        for i in 0..dim {
            for j in 0..=i {
                let v = r[(i, j)] * lambda + u[i] * u[j].conj();
                r[(i, j)] = v;
                r[(j, i)] = v.conj();
            }
            r[(i, i)].im = 0.0;
        }
    }

    /// One iteration for observation `y_obs`. `phi` is the newest whitened
    /// basis vector and `u` the regressor whose first block it is. Returns
    /// the a-priori residual z̃[n].
    pub fn step(
        &mut self,
        phi: &[Complex64],
        u: &[Complex64],
        y_obs: Complex64,
        dcd: &DcdParams,
        counters: &mut OpCounters,
    ) -> Result<Complex64> {
        let dim = self.dim();
        if u.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: u.len(),
            });
        }
        if phi.len() != self.terms {
            return Err(Error::Dimension {
                expected: self.terms,
                got: phi.len(),
            });
        }
        let sample = self.samples;
        let costs = step_costs(self.memory, self.terms);

        match self.update {
            CorrelationUpdate::ShiftStructured => {
                self.update_correlation_shifted(phi, u);
                counters.charge(1, costs[0]);
            }
            CorrelationUpdate::Full => {
                self.update_correlation_full(u);
                counters.charge(1, full_update_cost(dim));
            }
        }

        let estimate: Complex64 = self.coeffs.iter().zip(u).map(|(h, x)| h.conj() * x).sum();
        let z = y_obs - estimate;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite { step: 2, sample });
        }
        counters.charge(2, costs[1]);

        let zc = z.conj();
        for ((b, r), x) in self.beta.iter_mut().zip(&self.residual).zip(u) {
            *b = r * self.lambda + zc * x;
        }
        counters.charge(3, costs[2]);

        self.delta
            .iter_mut()
            .for_each(|d| *d = Complex64::new(0.0, 0.0));
        self.residual.copy_from_slice(&self.beta);
        let (_, ops) = dcd_solve_into(&self.corr, &mut self.delta, &mut self.residual, dcd);
        counters.charge(4, ops);
        if self
            .residual
            .iter()
            .any(|r| !(r.re.is_finite() && r.im.is_finite()))
        {
            return Err(Error::NonFinite { step: 4, sample });
        }

        for (h, d) in self.coeffs.iter_mut().zip(&self.delta) {
            *h += d;
        }
        counters.charge(5, costs[4]);
        counters.samples += 1;
        self.samples += 1;
        Ok(z)
    }

    /// Update Δh̃ applied by the most recent step.
    pub fn last_update(&self) -> &[Complex64] {
        &self.delta
    }
}

/// ỹ = h̃ᴴ·u.
pub fn regenerate_si(coeffs: &[Complex64], u: &[Complex64]) -> Result<Complex64> {
    if coeffs.len() != u.len() {
        return Err(Error::Dimension {
            expected: coeffs.len(),
            got: u.len(),
        });
    }
    Ok(coeffs.iter().zip(u).map(|(h, x)| h.conj() * x).sum())
}

/// Charge-free variant of the step costs in closed form, for reports.
pub fn closed_form_per_sample(memory: usize, terms: usize) -> OpCount {
    let mut total = OpCount::default();
    for c in step_costs(memory, terms) {
        total += c;
    }
    total
}
