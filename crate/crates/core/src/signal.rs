//! Complex baseband sample sequences and the noise sources shared by the
//! simulation stages.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A finite, non-empty run of complex baseband samples at a fixed rate.
///
/// Every stage of the chain (transmit signal, PA output, LNA input, digitized
/// receiver output, canceller residual) is carried by this type.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl ComplexSequence {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Sequence(
                "sequence must hold at least one sample".into(),
            ));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Sequence(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(idx) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::Sequence(format!("sample {idx} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// All-zero sequence; `len` must be nonzero.
    pub fn zeros(len: usize, sample_rate_hz: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate_hz)
    }

    // Internal constructor for stage outputs whose finiteness follows from
    // finite inputs.
    pub(crate) fn from_parts(samples: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        debug_assert!(!samples.is_empty());
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Mean of |s|² over the whole sequence (linear).
    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Copy scaled by a real factor.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts(
            self.samples.iter().map(|s| s * factor).collect(),
            self.sample_rate_hz,
        )
    }

    /// Elementwise difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "sequence subtraction")?;
        Ok(Self::from_parts(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a - b)
                .collect(),
            self.sample_rate_hz,
        ))
    }

    /// Elementwise sum `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "sequence addition")?;
        Ok(Self::from_parts(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
            self.sample_rate_hz,
        ))
    }

    /// First `len` samples.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::Sequence(format!(
                "cannot truncate {} samples to {len}",
                self.len()
            )));
        }
        Ok(Self::from_parts(
            self.samples[..len].to_vec(),
            self.sample_rate_hz,
        ))
    }

    pub(crate) fn check_compatible(&self, other: &Self, what: &'static str) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                what,
                left: self.len(),
                right: other.len(),
            });
        }
        if self.sample_rate_hz != other.sample_rate_hz {
            return Err(Error::Sequence(format!(
                "{what}: sample rates differ ({} vs {})",
                self.sample_rate_hz, other.sample_rate_hz
            )));
        }
        Ok(())
    }
}

/// Convert a linear power to dB; zero maps to negative infinity.
pub fn power_to_db(power: f64) -> f64 {
    10.0 * power.log10()
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Seeded circularly-symmetric complex white Gaussian noise of the given
/// mean power in dB. `f64::NEG_INFINITY` yields exact zeros.
pub fn complex_awgn(len: usize, power_db: f64, seed: u64) -> Vec<Complex64> {
    if power_db == f64::NEG_INFINITY {
        return vec![Complex64::new(0.0, 0.0); len];
    }
    let sigma = (db_to_power(power_db) / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * sigma, im * sigma)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(ComplexSequence::new(vec![], 1.0).is_err());
        assert!(ComplexSequence::new(vec![Complex64::new(f64::NAN, 0.0)], 1.0).is_err());
        assert!(ComplexSequence::new(vec![Complex64::new(1.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn awgn_is_seeded_and_scaled() {
        let a = complex_awgn(50_000, -20.0, 7);
        let b = complex_awgn(50_000, -20.0, 7);
        assert_eq!(a, b);
        let p = a.iter().map(|s| s.norm_sqr()).sum::<f64>() / a.len() as f64;
        assert!((power_to_db(p) + 20.0).abs() < 0.1);
        assert!(complex_awgn(4, f64::NEG_INFINITY, 1)
            .iter()
            .all(|s| s.norm() == 0.0));
    }
}
