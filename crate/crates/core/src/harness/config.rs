//! Experiment configuration files.
//!
//! A config is flat `key = value` text with dotted section keys, e.g.
//! `dsic.lambda = 0.9995`. This is a subset of TOML, so section headers and
//! comments (`#`) are accepted too. Every key is optional and falls back to
//! the defaults below, which reproduce the cancellation-budget setup.
//!
//! Lists of taps are written as `[re, im, delay]` triples and PA terms as
//! `[order, tap, re, im]` quadruples.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analog::{
    circulator_leakage_default, PaModel, PaTerm, ReceiverConfig, SiChannel, Tap,
    VectorModulatorState,
};
use crate::dsic::{BasisConfig, CorrelationUpdate, DcdParams, DsicConfig};
use crate::error::{config_err, Error, Result};
use crate::tuner::TunerConfig;
use crate::waveform::{WaveformConfig, DEFAULT_OCCUPIED_BANDWIDTH_HZ, DEFAULT_SAMPLE_RATE_HZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub tx: u64,
    pub soi: u64,
    pub rfsic_noise: u64,
    pub rx_noise: u64,
    /// Noise seed reused by every tuner probe.
    pub probe: u64,
}

impl Seeds {
    /// Per-source seeds derived from one base seed.
    pub fn from_base(base: u64) -> Self {
        Self {
            tx: base,
            soi: base.wrapping_add(1),
            rfsic_noise: base.wrapping_add(2),
            rx_noise: base.wrapping_add(3),
            probe: base.wrapping_add(4),
        }
    }
}

impl Default for Seeds {
    fn default() -> Self {
        Self::from_base(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformSection {
    pub n_subcarriers: usize,
    pub occupied_bandwidth_hz: f64,
    pub cp_len: usize,
    pub taper_len: usize,
}

impl Default for WaveformSection {
    fn default() -> Self {
        Self {
            n_subcarriers: 1024,
            occupied_bandwidth_hz: DEFAULT_OCCUPIED_BANDWIDTH_HZ,
            cp_len: 72,
            taper_len: 32,
        }
    }
}

impl WaveformSection {
    /// Waveform covering at least `n_samples` at `sample_rate_hz`.
    pub fn build(
        &self,
        bandwidth_hz: f64,
        sample_rate_hz: f64,
        n_samples: usize,
        seed: u64,
    ) -> WaveformConfig {
        let mut wc = WaveformConfig::for_bandwidth(
            self.n_subcarriers,
            bandwidth_hz,
            sample_rate_hz,
            1,
            seed,
        );
        wc.cp_len = self.cp_len;
        wc.taper_len = self.taper_len;
        wc.n_symbols = wc.symbols_for(n_samples).max(1);
        wc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaSection {
    /// `[order, tap, re, im]` per term.
    pub terms: Vec<[f64; 4]>,
}

impl Default for PaSection {
    fn default() -> Self {
        Self::from_model(&PaModel::default())
    }
}

impl PaSection {
    pub fn from_model(pa: &PaModel) -> Self {
        Self {
            terms: pa
                .terms()
                .iter()
                .map(|t| [t.order as f64, t.tap as f64, t.gain.re, t.gain.im])
                .collect(),
        }
    }

    pub fn build(&self) -> Result<PaModel> {
        let terms = self
            .terms
            .iter()
            .map(|&[order, tap, re, im]| {
                Ok(PaTerm {
                    order: as_index(order, "pa.terms order")?,
                    tap: as_index(tap, "pa.terms tap")?,
                    gain: Complex64::new(re, im),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PaModel::new(terms)
    }
}

fn as_index(v: f64, what: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        config_err(format!("{what} must be a nonnegative integer, got {v}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    /// `[re, im, delay]` per forward path.
    pub forward: Vec<[f64; 3]>,
    /// `[re, im, delay]` per feedback path.
    pub feedback: Vec<[f64; 3]>,
    /// If set, forward taps are rescaled to this in-band isolation (dB).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isolation_db: Option<f64>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self::from_channel(&circulator_leakage_default())
    }
}

impl ChannelSection {
    pub fn from_channel(ch: &SiChannel) -> Self {
        let taps = |t: &[Tap]| {
            t.iter()
                .map(|t| [t.gain.re, t.gain.im, t.delay as f64])
                .collect()
        };
        Self {
            forward: taps(ch.forward()),
            feedback: taps(ch.feedback()),
            isolation_db: None,
        }
    }

    pub fn build(&self, bandwidth_hz: f64, sample_rate_hz: f64) -> Result<SiChannel> {
        let taps = |v: &[[f64; 3]], what: &str| -> Result<Vec<Tap>> {
            v.iter()
                .map(|&[re, im, d]| Ok(Tap::new(re, im, as_index(d, what)?)))
                .collect()
        };
        let ch = SiChannel::new(
            taps(&self.forward, "channel.forward delay")?,
            taps(&self.feedback, "channel.feedback delay")?,
        )?;
        Ok(match self.isolation_db {
            Some(iso) if iso.is_finite() => ch.with_isolation(iso, bandwidth_hz, sample_rate_hz),
            Some(iso) => {
                return config_err(format!("channel.isolation_db must be finite, got {iso}"))
            }
            None => ch,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VmSection {
    pub enabled: bool,
    pub delay_samples: usize,
    pub gain_i: f64,
    pub gain_q: f64,
    pub control_step: f64,
    pub noise_power_db: f64,
}

impl Default for VmSection {
    fn default() -> Self {
        Self {
            enabled: true,
            delay_samples: 0,
            gain_i: 0.0,
            gain_q: 0.0,
            control_step: 1.0 / 8192.0,
            noise_power_db: -112.0,
        }
    }
}

impl VmSection {
    pub fn build(&self) -> Result<VectorModulatorState> {
        VectorModulatorState::from_gains(
            self.delay_samples,
            self.gain_i,
            self.gain_q,
            self.control_step,
            self.noise_power_db,
        )
    }
}

/// Receiver section. Its defaults differ from `ReceiverConfig::default`:
/// they place the noise floor and converter range for the budget setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RxSection {
    pub noise_floor_db: f64,
    pub adc_bits: u32,
    pub adc_full_scale: f64,
}

impl Default for RxSection {
    fn default() -> Self {
        Self {
            noise_floor_db: -104.0,
            adc_bits: 12,
            adc_full_scale: 1.6e-3,
        }
    }
}

impl RxSection {
    pub fn build(&self) -> ReceiverConfig {
        ReceiverConfig {
            noise_floor_db: self.noise_floor_db,
            adc_bits: self.adc_bits,
            adc_full_scale: self.adc_full_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DsicSection {
    pub enabled: bool,
    pub order: usize,
    pub memory: usize,
    pub odd_only: bool,
    pub lambda: f64,
    pub alpha: f64,
    pub dcd_amplitude: f64,
    pub dcd_bits: u32,
    pub dcd_updates: usize,
    pub n_cov: usize,
    pub update: CorrelationUpdate,
    /// Attenuation applied in place of the RF canceller by the
    /// DSIC-only experiment.
    pub attenuation_db: f64,
}

impl Default for DsicSection {
    fn default() -> Self {
        let d = DsicConfig::default();
        Self {
            enabled: true,
            order: d.basis.order,
            memory: d.basis.memory,
            odd_only: d.basis.odd_only,
            lambda: d.lambda,
            alpha: d.alpha,
            dcd_amplitude: d.dcd.amplitude,
            dcd_bits: d.dcd.bits,
            dcd_updates: d.dcd.max_updates,
            n_cov: d.n_cov,
            update: d.update,
            attenuation_db: 36.0,
        }
    }
}

impl DsicSection {
    pub fn build(&self) -> DsicConfig {
        DsicConfig {
            basis: BasisConfig {
                order: self.order,
                memory: self.memory,
                odd_only: self.odd_only,
            },
            lambda: self.lambda,
            alpha: self.alpha,
            dcd: DcdParams {
                amplitude: self.dcd_amplitude,
                bits: self.dcd_bits,
                max_updates: self.dcd_updates,
            },
            n_cov: self.n_cov,
            update: self.update,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SoiSection {
    pub enabled: bool,
    pub power_db: f64,
    pub occupied_bandwidth_hz: f64,
}

impl Default for SoiSection {
    fn default() -> Self {
        Self {
            enabled: true,
            power_db: -85.0,
            occupied_bandwidth_hz: 10e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSection {
    pub nfft: usize,
    pub overlap: f64,
    /// Samples excluded from every power measurement; defaults to half the
    /// run so that the digital canceller is in steady state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skip: Option<usize>,
}

impl Default for MeasureSection {
    fn default() -> Self {
        Self {
            nfft: 1024,
            overlap: 0.5,
            skip: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub lambda: Vec<f64>,
    pub order: Vec<usize>,
    pub memory: Vec<usize>,
    pub dcd_updates: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            lambda: vec![0.999, 0.9995],
            order: vec![3, 5],
            memory: vec![4, 8],
            dcd_updates: vec![4, 8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_samples: usize,
    pub sample_rate_hz: f64,
    /// dBm corresponding to 0 dB full scale, for reporting only.
    pub tx_power_dbm_at_fullscale: f64,
    pub seeds: Seeds,
    pub waveform: WaveformSection,
    pub pa: PaSection,
    pub channel: ChannelSection,
    pub vm: VmSection,
    pub tuner: TunerConfig,
    pub rx: RxSection,
    pub dsic: DsicSection,
    pub soi: SoiSection,
    pub measure: MeasureSection,
    pub sweep: SweepSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_samples: 1 << 17,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            tx_power_dbm_at_fullscale: 20.0,
            seeds: Seeds::default(),
            waveform: WaveformSection::default(),
            pa: PaSection::default(),
            channel: ChannelSection::default(),
            vm: VmSection::default(),
            tuner: TunerConfig::default(),
            rx: RxSection::default(),
            dsic: DsicSection::default(),
            soi: SoiSection::default(),
            measure: MeasureSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Flat dotted-key rendering; parses back to an equal config.
    pub fn to_flat_string(&self) -> String {
        let value = toml::Value::try_from(self).expect("config is always representable");
        let mut out = String::new();
        flatten(&value, "", &mut out);
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return config_err("n_samples must be positive");
        }
        let wc = self.tx_waveform();
        wc.validate(self.sample_rate_hz)?;
        self.pa.build()?;
        self.channel
            .build(self.waveform.occupied_bandwidth_hz, self.sample_rate_hz)?;
        self.vm.build()?;
        self.tuner.validate()?;
        self.rx.build().validate()?;
        let dsic = self.dsic.build();
        dsic.validate()?;
        if self.dsic.enabled && self.n_samples < dsic.n_cov {
            return config_err(format!(
                "n_samples ({}) must be at least dsic.n_cov ({})",
                self.n_samples, dsic.n_cov
            ));
        }
        if self.soi.enabled {
            self.soi_waveform().validate(self.sample_rate_hz)?;
            if !self.soi.power_db.is_finite() {
                return config_err("soi.power_db must be finite");
            }
        }
        if self.skip() >= self.n_samples || self.n_samples - self.skip() < self.measure.nfft {
            return config_err(
                "measurement window after measure.skip is shorter than measure.nfft",
            );
        }
        Ok(())
    }

    pub fn tx_waveform(&self) -> WaveformConfig {
        self.waveform.build(
            self.waveform.occupied_bandwidth_hz,
            self.sample_rate_hz,
            self.n_samples,
            self.seeds.tx,
        )
    }

    pub fn soi_waveform(&self) -> WaveformConfig {
        self.waveform.build(
            self.soi.occupied_bandwidth_hz,
            self.sample_rate_hz,
            self.n_samples,
            self.seeds.soi,
        )
    }

    pub fn skip(&self) -> usize {
        self.measure.skip.unwrap_or(self.n_samples / 2)
    }
}

fn flatten(value: &toml::Value, prefix: &str, out: &mut String) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(v, &key, out);
            }
        }
        v => {
            let _ = writeln!(out, "{prefix} = {v}");
        }
    }
}

impl std::str::FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        Self::parse(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(
            ExperimentConfig::parse("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn dotted_keys_override() {
        let cfg = ExperimentConfig::parse(
            "dsic.lambda = 0.999\nchannel.isolation_db = 21\nvm.noise_power_db = -inf\n# comment\nseeds.tx = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.dsic.lambda, 0.999);
        assert_eq!(cfg.channel.isolation_db, Some(21.0));
        assert_eq!(cfg.vm.noise_power_db, f64::NEG_INFINITY);
        assert_eq!(cfg.seeds.tx, 9);
    }

    #[test]
    fn flat_rendering_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.channel.isolation_db = Some(21.0);
        cfg.soi.enabled = false;
        let text = cfg.to_flat_string();
        assert!(text.contains("dsic.lambda = 0.9995"));
        assert!(text.lines().all(|l| !l.starts_with('[')));
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn invalid_values_are_rejected() {
        for bad in [
            "unknown_key = 1",
            "dsic.lambda = 1.5",
            "channel.feedback = [[0.5, 0.0, 0]]",
            "channel.forward = [[0.1, 0.0, 1.5]]",
            "vm.gain_i = 0.00001",
            "rx.adc_bits = 0",
            "n_samples = 100",
        ] {
            assert!(ExperimentConfig::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn missing_file_names_path() {
        let err = ExperimentConfig::load(Path::new("/nonexistent/budget.cfg")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/budget.cfg"));
    }
}
