//! Staged cancellation report, written as `key = value` lines.

use std::fmt;

use crate::dsic::rls::closed_form_per_sample;
use crate::dsic::{DsicConfig, OpCounters};

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub name: &'static str,
    pub power_dbfs: f64,
}

/// Operation counts of a digital cancellation run with the closed-form
/// per-sample costs for comparison. `closed_form_terms` uses the number of
/// generated basis functions; `closed_form_order` uses the nonlinearity
/// order itself.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterSummary {
    pub counters: OpCounters,
    pub closed_form_terms: (u64, u64),
    pub closed_form_order: (u64, u64),
    pub dcd_addition_bound: u64,
}

impl CounterSummary {
    pub fn new(counters: OpCounters, cfg: &DsicConfig) -> Self {
        let terms = closed_form_per_sample(cfg.basis.memory, cfg.basis.terms());
        let order = closed_form_per_sample(cfg.basis.memory, cfg.basis.order);
        Self {
            counters,
            closed_form_terms: (terms.mults, terms.adds),
            closed_form_order: (order.mults, order.adds),
            dcd_addition_bound: cfg.dcd.addition_bound(2 * cfg.basis.dim()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CancellationReport {
    pub experiment: &'static str,
    pub stages: Vec<Stage>,
    /// dBm at 0 dB full scale.
    pub dbm_offset: f64,
    pub clipped: usize,
    pub rfsic: Option<RfsicSummary>,
    pub convergence_sample: Option<usize>,
    pub soi_margin_db: Option<f64>,
    pub counters: Option<CounterSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfsicSummary {
    pub delay_samples: usize,
    pub gain_i: f64,
    pub gain_q: f64,
    pub evaluations: usize,
}

impl CancellationReport {
    pub fn stage(&self, name: &str) -> Option<f64> {
        self.stages
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.power_dbfs)
    }

    /// Cancellation achieved by each stage relative to the previous one,
    /// keyed by the stage name without its `si_after_` prefix.
    pub fn stage_cancellations(&self) -> Vec<(&'static str, f64)> {
        self.stages
            .windows(2)
            .map(|w| {
                let key = w[1].name.trim_start_matches("si_after_");
                (key, w[0].power_dbfs - w[1].power_dbfs)
            })
            .collect()
    }

    pub fn cancellation(&self, key: &str) -> Option<f64> {
        self.stage_cancellations()
            .into_iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }

    /// First stage power minus last stage power.
    pub fn total_cancellation(&self) -> f64 {
        match (self.stages.first(), self.stages.last()) {
            (Some(a), Some(b)) => a.power_dbfs - b.power_dbfs,
            _ => 0.0,
        }
    }
}

impl fmt::Display for CancellationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment = \"{}\"", self.experiment)?;
        for s in &self.stages {
            writeln!(f, "stage.{}.dbfs = {:.4}", s.name, s.power_dbfs)?;
            writeln!(
                f,
                "stage.{}.dbm = {:.4}",
                s.name,
                s.power_dbfs + self.dbm_offset
            )?;
        }
        for (k, v) in self.stage_cancellations() {
            // Adding 0.0 turns a -0.0 into 0.0.
            writeln!(f, "cancellation.{k}_db = {:.4}", v + 0.0)?;
        }
        writeln!(
            f,
            "total_cancellation_db = {:.4}",
            self.total_cancellation()
        )?;
        writeln!(f, "clipped_samples = {}", self.clipped)?;
        if let Some(r) = &self.rfsic {
            writeln!(f, "rfsic.delay_samples = {}", r.delay_samples)?;
            writeln!(f, "rfsic.gain_i = {:.10}", r.gain_i)?;
            writeln!(f, "rfsic.gain_q = {:.10}", r.gain_q)?;
            writeln!(f, "rfsic.evaluations = {}", r.evaluations)?;
        }
        if let Some(n) = self.convergence_sample {
            writeln!(f, "dsic.convergence_sample = {n}")?;
        }
        if let Some(m) = self.soi_margin_db {
            writeln!(f, "soi.margin_db = {m:.4}")?;
        }
        if let Some(c) = &self.counters {
            let k = &c.counters;
            writeln!(f, "counters.samples = {}", k.samples)?;
            for (i, s) in k.steps.iter().enumerate() {
                writeln!(f, "counters.step{}.real_mults = {}", i + 1, s.mults)?;
                writeln!(f, "counters.step{}.real_adds = {}", i + 1, s.adds)?;
            }
            writeln!(f, "counters.total.real_mults = {}", k.real_mults())?;
            writeln!(f, "counters.total.real_adds = {}", k.real_adds())?;
            writeln!(
                f,
                "counters.closed_form_terms.mults_per_sample = {}",
                c.closed_form_terms.0
            )?;
            writeln!(
                f,
                "counters.closed_form_terms.adds_per_sample = {}",
                c.closed_form_terms.1
            )?;
            writeln!(
                f,
                "counters.closed_form_order.mults_per_sample = {}",
                c.closed_form_order.0
            )?;
            writeln!(
                f,
                "counters.closed_form_order.adds_per_sample = {}",
                c.closed_form_order.1
            )?;
            writeln!(
                f,
                "counters.dcd_addition_bound_per_sample = {}",
                c.dcd_addition_bound
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_arithmetic_telescopes() {
        let r = CancellationReport {
            experiment: "combined",
            stages: vec![
                Stage {
                    name: "tx_after_pa",
                    power_dbfs: -10.0,
                },
                Stage {
                    name: "si_after_circulator",
                    power_dbfs: -31.0,
                },
                Stage {
                    name: "si_after_rfsic",
                    power_dbfs: -67.0,
                },
                Stage {
                    name: "si_after_dsic",
                    power_dbfs: -101.0,
                },
            ],
            dbm_offset: 20.0,
            clipped: 0,
            rfsic: None,
            convergence_sample: Some(5000),
            soi_margin_db: None,
            counters: None,
        };
        assert_eq!(r.cancellation("circulator"), Some(21.0));
        assert_eq!(r.cancellation("rfsic"), Some(36.0));
        assert_eq!(r.cancellation("dsic"), Some(34.0));
        let sum: f64 = r.stage_cancellations().iter().map(|(_, v)| v).sum();
        assert!((sum - r.total_cancellation()).abs() < 1e-12);
        let text = r.to_string();
        assert!(text.contains("stage.tx_after_pa.dbm = 10.0000"));
        assert!(text.contains("total_cancellation_db = 91.0000"));
        let parsed: toml::Table = text.parse().unwrap();
        assert!(parsed.contains_key("cancellation"));
    }
}
