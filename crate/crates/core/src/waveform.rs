//! Seeded multicarrier test signals: the transmit signal that drives the
//! self-interference chain and the externally received signal of interest.
//!
//! Both are CP-OFDM with random QPSK on a contiguous block of subcarriers
//! centred on DC. Symbol edges are tapered with a raised-cosine overlap
//! (weighted overlap-add) so that the out-of-band floor is set by the taper,
//! not by the rectangular symbol boundaries.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::signal::{db_to_power, ComplexSequence};

/// Default simulation rate of the transceiver's converters.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 61.44e6;
/// Default occupied bandwidth of the transmit signal.
pub const DEFAULT_OCCUPIED_BANDWIDTH_HZ: f64 = 20e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformConfig {
    pub n_subcarriers: usize,
    pub n_active: usize,
    pub cp_len: usize,
    /// Length of the raised-cosine ramp shared by adjacent symbols; must
    /// not exceed `cp_len`. Zero gives rectangular symbols.
    #[serde(default)]
    pub taper_len: usize,
    pub n_symbols: usize,
    pub occupied_bandwidth_hz: f64,
    pub rng_seed: u64,
}

impl WaveformConfig {
    /// Configuration whose active subcarriers span `occupied_bandwidth_hz`
    /// at `sample_rate_hz`.
    pub fn for_bandwidth(
        n_subcarriers: usize,
        occupied_bandwidth_hz: f64,
        sample_rate_hz: f64,
        n_symbols: usize,
        rng_seed: u64,
    ) -> Self {
        let n_active =
            (occupied_bandwidth_hz / sample_rate_hz * n_subcarriers as f64).round() as usize;
        let cp_len = n_subcarriers * 9 / 128;
        Self {
            n_subcarriers,
            n_active,
            cp_len,
            taper_len: (cp_len / 2).min(32),
            n_symbols,
            occupied_bandwidth_hz,
            rng_seed,
        }
    }

    /// Samples per symbol including the cyclic prefix.
    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }

    /// Total number of generated samples.
    pub fn len(&self) -> usize {
        self.symbol_len() * self.n_symbols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest symbol count covering `n_samples`.
    pub fn symbols_for(&self, n_samples: usize) -> usize {
        n_samples.div_ceil(self.symbol_len())
    }

    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        if self.n_subcarriers == 0 {
            return config_err("waveform: n_subcarriers must be positive");
        }
        if self.n_active == 0 || self.n_active > self.n_subcarriers {
            return config_err(format!(
                "waveform: n_active must be in 1..={}, got {}",
                self.n_subcarriers, self.n_active
            ));
        }
        if self.n_symbols == 0 {
            return config_err("waveform: n_symbols must be positive");
        }
        if self.taper_len > self.cp_len {
            return config_err("waveform: taper_len must not exceed cp_len");
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return config_err("waveform: sample rate must be positive");
        }
        if !(self.occupied_bandwidth_hz > 0.0 && self.occupied_bandwidth_hz <= sample_rate_hz) {
            return config_err(format!(
                "waveform: occupied bandwidth {} Hz must be in (0, {}]",
                self.occupied_bandwidth_hz, sample_rate_hz
            ));
        }
        Ok(())
    }
}

// Unnormalized CP-OFDM synthesis.
fn synthesize(config: &WaveformConfig) -> Vec<Complex64> {
    let n = config.n_subcarriers;
    let cp = config.cp_len;
    let w = config.taper_len;
    let period = config.symbol_len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);

    let ramp: Vec<f64> = (0..w)
        .map(|t| 0.5 * (1.0 - (PI * (t as f64 + 0.5) / w as f64).cos()))
        .collect();

    let mut out = vec![Complex64::new(0.0, 0.0); config.len() + w];
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    let first = -((config.n_active / 2) as isize);
    for sym in 0..config.n_symbols {
        bins.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for k in 0..config.n_active as isize {
            let bin = (first + k).rem_euclid(n as isize) as usize;
            let re = if rng.random::<bool>() {
                FRAC_1_SQRT_2
            } else {
                -FRAC_1_SQRT_2
            };
            let im = if rng.random::<bool>() {
                FRAC_1_SQRT_2
            } else {
                -FRAC_1_SQRT_2
            };
            bins[bin] = Complex64::new(re, im);
        }
        ifft.process(&mut bins);

        let ext_len = period + w;
        let start = sym * period;
        for t in 0..ext_len {
            let mut v = bins[(t as isize - cp as isize).rem_euclid(n as isize) as usize];
            if t < w {
                v *= ramp[t];
            } else if t >= ext_len - w {
                v *= ramp[ext_len - 1 - t];
            }
            out[start + t] += v;
        }
    }
    out.truncate(config.len());
    out
}

/// Transmit signal x[n], peak-normalized to unit magnitude.
pub fn generate_tx(config: &WaveformConfig, sample_rate_hz: f64) -> Result<ComplexSequence> {
    config.validate(sample_rate_hz)?;
    let mut samples = synthesize(config);
    let peak = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        samples.iter_mut().for_each(|s| *s /= peak);
    }
    ComplexSequence::new(samples, sample_rate_hz)
}

/// Signal of interest scaled to a mean power of `power_db` (dB full scale).
pub fn generate_soi(
    config: &WaveformConfig,
    sample_rate_hz: f64,
    power_db: f64,
) -> Result<ComplexSequence> {
    if !power_db.is_finite() {
        return config_err(format!("soi power must be finite, got {power_db}"));
    }
    let tx = generate_tx(config, sample_rate_hz)?;
    let scale = (db_to_power(power_db) / tx.mean_power()).sqrt();
    Ok(tx.scaled(scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::power_to_db;

    fn small() -> WaveformConfig {
        WaveformConfig::for_bandwidth(256, 20e6, DEFAULT_SAMPLE_RATE_HZ, 8, 11)
    }

    #[test]
    fn rejects_degenerate_configs() {
        let mut c = small();
        c.n_active = 0;
        assert!(generate_tx(&c, DEFAULT_SAMPLE_RATE_HZ).is_err());
        let mut c = small();
        c.n_symbols = 0;
        assert!(generate_soi(&c, DEFAULT_SAMPLE_RATE_HZ, -40.0).is_err());
        let mut c = small();
        c.occupied_bandwidth_hz = 70e6;
        assert!(generate_tx(&c, DEFAULT_SAMPLE_RATE_HZ).is_err());
    }

    #[test]
    fn deterministic_and_peak_normalized() {
        let a = generate_tx(&small(), DEFAULT_SAMPLE_RATE_HZ).unwrap();
        let b = generate_tx(&small(), DEFAULT_SAMPLE_RATE_HZ).unwrap();
        assert_eq!(a, b);
        assert!((a.peak() - 1.0).abs() < 1e-12);
        assert_eq!(a.len(), small().len());
        let mut other = small();
        other.rng_seed += 1;
        assert_ne!(a, generate_tx(&other, DEFAULT_SAMPLE_RATE_HZ).unwrap());
    }

    #[test]
    fn soi_power_is_exact() {
        let soi = generate_soi(&small(), DEFAULT_SAMPLE_RATE_HZ, -40.0).unwrap();
        let p = power_to_db(soi.mean_power());
        assert!((-40.1..=-39.9).contains(&p), "{p}");
    }
}
