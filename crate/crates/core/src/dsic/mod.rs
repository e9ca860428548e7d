//! Digital self-interference canceller.
//!
//! The known transmit samples are expanded into a parallel Hammerstein
//! basis, whitened with the Cholesky factor of their covariance, stacked
//! over the memory depth and fed to an exponentially weighted RLS whose
//! normal equations are solved by dichotomous coordinate descent. The
//! regenerated interference is subtracted from the received samples.

pub mod basis;
pub mod counters;
pub mod dcd;
pub mod rls;
pub mod whitening;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use basis::{
    basis_generate, build_regressor, BasisConfig, BasisVector, Regressor, RegressorBuffer,
};
pub use counters::{OpCount, OpCounters};
pub use dcd::{dcd_solve, DcdParams, DcdSolution};
pub use rls::{regenerate_si, CorrelationUpdate, RlsState};
pub use whitening::{estimate_covariance, whiten, whitening_from_covariance, WhiteningTransform};

use crate::analog::require_same_len;
use crate::error::{config_err, Result};
use crate::signal::{power_to_db, ComplexSequence};

/// Window of the trailing-mean residual power trace.
pub const TRACE_WINDOW: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DsicConfig {
    pub basis: BasisConfig,
    pub lambda: f64,
    pub alpha: f64,
    pub dcd: DcdParams,
    /// Training samples for the basis covariance.
    pub n_cov: usize,
    #[serde(default)]
    pub update: CorrelationUpdate,
}

impl Default for DsicConfig {
    fn default() -> Self {
        Self {
            basis: BasisConfig::new(5, 8),
            lambda: 0.9995,
            alpha: 0.01,
            dcd: DcdParams::default(),
            n_cov: 4096,
            update: CorrelationUpdate::ShiftStructured,
        }
    }
}

impl DsicConfig {
    pub fn validate(&self) -> Result<()> {
        self.basis.validate()?;
        self.dcd.validate()?;
        if self.n_cov == 0 {
            return config_err("dsic: n_cov must be positive");
        }
        rls::check_weights(self.lambda, self.alpha)
    }
}

#[derive(Debug, Clone)]
pub struct DsicOutput {
    /// z̃[n] in the units of the received stream.
    pub residual: ComplexSequence,
    /// Trailing mean of |z̃|² over `TRACE_WINDOW` samples, in dB.
    pub trace_db: Vec<f64>,
    pub counters: OpCounters,
    pub whitening: WhiteningTransform,
    pub state: RlsState,
    /// Scale applied to the received stream before adaptation.
    pub input_scale: f64,
}

impl DsicOutput {
    /// Final coefficients mapped back to the raw basis: entry `[m][k]` is
    /// the gain on φ_{order k}(x[n-m]) in received-stream units, comparable
    /// to the physical channel.
    pub fn channel_estimate(&self) -> Vec<Vec<Complex64>> {
        let t = self.whitening.transform();
        let terms = self.whitening.terms();
        self.state
            .coeffs()
            .chunks(terms)
            .map(|block| {
                // y ≈ h̃ᴴ·T·φ, so the raw-basis gain is conj(Tᴴ·h̃).
                (0..terms)
                    .map(|k| {
                        let v: Complex64 = (0..terms).map(|i| t[(i, k)].conj() * block[i]).sum();
                        v.conj() * self.input_scale
                    })
                    .collect()
            })
            .collect()
    }

    /// First sample at which the trailing-mean residual power is within 1 dB
    /// of the mean over the final 10% of the stream. Only full windows are
    /// considered.
    pub fn convergence_sample(&self) -> usize {
        let z = self.residual.samples();
        let tail = (z.len() / 10).max(1);
        let final_db = power_to_db(
            z[z.len() - tail..]
                .iter()
                .map(|s| s.norm_sqr())
                .sum::<f64>()
                / tail as f64,
        );
        let first_full = TRACE_WINDOW.min(z.len()) - 1;
        self.trace_db[first_full..]
            .iter()
            .position(|p| (p - final_db).abs() <= 1.0)
            .map_or(z.len(), |i| i + first_full)
    }

    /// Residual trace CSV: `sample_index,residual_power_db`.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sample_index,residual_power_db")?;
        for (i, p) in self.trace_db.iter().enumerate() {
            writeln!(w, "{i},{p:.6}")?;
        }
        Ok(())
    }

    /// Coefficient CSV: `tap,order,re,im` using the raw-basis estimate.
    pub fn write_coefficients_csv<W: Write>(
        &self,
        orders: &[usize],
        mut w: W,
    ) -> std::io::Result<()> {
        writeln!(w, "tap,order,re,im")?;
        for (m, block) in self.channel_estimate().iter().enumerate() {
            for (k, v) in block.iter().enumerate() {
                writeln!(w, "{m},{},{:.12e},{:.12e}", orders[k], v.re, v.im)?;
            }
        }
        Ok(())
    }
}

fn trailing_mean_db(z: &[Complex64], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(z.len());
    let mut acc = 0.0;
    for n in 0..z.len() {
        acc += z[n].norm_sqr();
        if n >= window {
            acc -= z[n - window].norm_sqr();
        }
        let len = (n + 1).min(window);
        out.push(power_to_db(acc.max(0.0) / len as f64));
    }
    out
}

/// Cancel the interference in `rx` given the aligned transmit samples `x`.
///
/// The received stream is normalized by its RMS over the training block so
/// that the DCD amplitude range H applies to O(1) coefficients; the returned
/// residual is scaled back.
pub fn cancel_stream(
    rx: &ComplexSequence,
    x: &ComplexSequence,
    cfg: &DsicConfig,
) -> Result<DsicOutput> {
    cfg.validate()?;
    require_same_len(rx, x, "cancel_stream rx/x")?;
    let basis = basis_generate(x, &cfg.basis)?;
    let cov = estimate_covariance(&basis, cfg.n_cov)?;
    let whitening = whitening_from_covariance(&cov)?;

    let train = cfg.n_cov.min(rx.len());
    let rms = (rx.samples()[..train]
        .iter()
        .map(|s| s.norm_sqr())
        .sum::<f64>()
        / train as f64)
        .sqrt();
    let input_scale = if rms > 0.0 { rms } else { 1.0 };
    let inv_scale = 1.0 / input_scale;

    let mut state = RlsState::new(&cfg.basis, cfg.lambda, cfg.alpha)?.with_update(cfg.update);
    let mut regressor = RegressorBuffer::new(&cfg.basis);
    let mut counters = OpCounters::default();
    let mut residual = Vec::with_capacity(rx.len());
    for (phi, y) in basis.iter().zip(rx.samples()) {
        let phi_w = whiten(phi, &whitening)?;
        let u = regressor.push(&phi_w)?;
        let z = state.step(phi_w.as_slice(), u, y * inv_scale, &cfg.dcd, &mut counters)?;
        residual.push(z * input_scale);
    }

    let trace_db = trailing_mean_db(&residual, TRACE_WINDOW);
    Ok(DsicOutput {
        residual: ComplexSequence::from_parts(residual, rx.sample_rate_hz()),
        trace_db,
        counters,
        whitening,
        state,
        input_scale,
    })
}
