//! Power and spectrum measurement.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{config_err, Error, Result};
use crate::signal::{power_to_db, ComplexSequence};

/// Mean power in dB over the samples after `skip`. An all-zero range
/// yields negative infinity.
pub fn measure_power(seq: &ComplexSequence, skip: usize) -> Result<f64> {
    if skip >= seq.len() {
        return Err(Error::InsufficientSamples {
            needed: skip + 1,
            have: seq.len(),
        });
    }
    let tail = &seq.samples()[skip..];
    let p = tail.iter().map(|s| s.norm_sqr()).sum::<f64>() / tail.len() as f64;
    Ok(power_to_db(p))
}

/// One bin of a power spectrum: frequency and power in the bin (not a
/// density), so that the bins sum to the mean signal power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdBin {
    pub freq_hz: f64,
    pub power_db: f64,
}

/// Averaged Hann-windowed periodogram (Welch), DC-centred.
pub fn psd_estimate(
    seq: &ComplexSequence,
    nfft: usize,
    overlap_fraction: f64,
) -> Result<Vec<PsdBin>> {
    if nfft == 0 {
        return config_err("psd: nfft must be positive");
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return config_err(format!(
            "psd: overlap fraction {overlap_fraction} not in [0, 1)"
        ));
    }
    if seq.len() < nfft {
        return Err(Error::InsufficientSamples {
            needed: nfft,
            have: seq.len(),
        });
    }
    let window: Vec<f64> = (0..nfft)
        .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / nfft as f64).cos()))
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();
    let hop = (((1.0 - overlap_fraction) * nfft as f64).round() as usize).max(1);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);

    let x = seq.samples();
    let mut acc = vec![0.0; nfft];
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let mut segments = 0usize;
    let mut start = 0;
    while start + nfft <= x.len() {
        for (b, (s, w)) in buf
            .iter_mut()
            .zip(x[start..start + nfft].iter().zip(&window))
        {
            *b = s * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }

    let norm = 1.0 / (segments as f64 * nfft as f64 * window_energy);
    let fs = seq.sample_rate_hz();
    Ok((0..nfft)
        .map(|k| {
            let bin = (k + nfft - nfft / 2) % nfft;
            let signed = k as f64 - (nfft / 2) as f64;
            PsdBin {
                freq_hz: signed * fs / nfft as f64,
                power_db: power_to_db(acc[bin] * norm),
            }
        })
        .collect())
}

/// Summed linear power of the bins with `lo_hz <= f <= hi_hz`, in dB.
pub fn band_power_db(psd: &[PsdBin], lo_hz: f64, hi_hz: f64) -> f64 {
    let p: f64 = psd
        .iter()
        .filter(|b| b.freq_hz >= lo_hz && b.freq_hz <= hi_hz)
        .map(|b| 10f64.powf(b.power_db / 10.0))
        .sum();
    power_to_db(p)
}

/// Mean per-bin power (dB) over bins with `lo_hz <= |f| <= hi_hz`.
pub fn mean_bin_power_db(psd: &[PsdBin], lo_hz: f64, hi_hz: f64) -> f64 {
    let bins: Vec<f64> = psd
        .iter()
        .filter(|b| b.freq_hz.abs() >= lo_hz && b.freq_hz.abs() <= hi_hz)
        .map(|b| 10f64.powf(b.power_db / 10.0))
        .collect();
    power_to_db(bins.iter().sum::<f64>() / bins.len().max(1) as f64)
}
