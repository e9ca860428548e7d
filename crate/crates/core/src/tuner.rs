//! Tuning of the RF canceller's two quantized control values.
//!
//! The objective is a black box returning residual power at the LNA input
//! in dB; there is no gradient, as on the hardware where the control is two
//! DC voltages. For every candidate delay a quantized coordinate descent
//! probes ±step on each axis, keeps any improvement and halves the step
//! when neither axis improves.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analog::VectorModulatorState;
use crate::error::{config_err, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TunerConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_evaluations: usize,
    /// Samples per power measurement.
    pub probe_len: usize,
    /// Candidate fixed delays, in samples.
    pub delay_grid: Vec<usize>,
}

impl TunerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_step > 0.0
            && self.initial_step >= self.min_step
            && self.initial_step.is_finite())
        {
            return config_err(format!(
                "tuner: need 0 < min_step ({}) <= initial_step ({})",
                self.min_step, self.initial_step
            ));
        }
        if self.max_evaluations == 0 {
            return config_err("tuner: max_evaluations must be at least 1");
        }
        if self.probe_len == 0 {
            return config_err("tuner: probe_len must be positive");
        }
        Ok(())
    }
}

impl Default for TunerConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            min_step: 1.0 / 8192.0,
            max_evaluations: 2000,
            probe_len: 4096,
            delay_grid: (0..=4).collect(),
        }
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub evaluation: usize,
    pub state: VectorModulatorState,
    pub power_db: f64,
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub state: VectorModulatorState,
    pub power_db: f64,
    /// Objective value of the zero-gain state.
    pub baseline_db: f64,
    pub trace: Vec<TraceEntry>,
}

impl TuneOutcome {
    pub fn evaluations(&self) -> usize {
        self.trace.len()
    }

    /// Tuning trace as CSV: `evaluation,delay,gain_i,gain_q,power_db`.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "evaluation,delay,gain_i,gain_q,power_db")?;
        for e in &self.trace {
            writeln!(
                w,
                "{},{},{:.10},{:.10},{:.6}",
                e.evaluation,
                e.state.delay_samples,
                e.state.gain_i(),
                e.state.gain_q(),
                e.power_db
            )?;
        }
        Ok(())
    }
}

struct Evaluator<F> {
    objective: F,
    budget: usize,
    trace: Vec<TraceEntry>,
}

impl<F: FnMut(&VectorModulatorState) -> f64> Evaluator<F> {
    fn exhausted(&self) -> bool {
        self.trace.len() >= self.budget
    }

    // `-inf` (an exactly zero residual) is a legitimate measurement.
    fn eval(&mut self, state: VectorModulatorState) -> Result<f64> {
        let power_db = (self.objective)(&state);
        let evaluation = self.trace.len();
        if power_db.is_nan() || power_db == f64::INFINITY {
            return Err(Error::Tuning {
                evaluation,
                power: power_db,
            });
        }
        self.trace.push(TraceEntry {
            evaluation,
            state,
            power_db,
        });
        Ok(power_db)
    }
}

/// Search the delay grid and the quantized complex gain for the lowest
/// objective. The result never exceeds the start or zero-gain objectives
/// and uses at most `cfg.max_evaluations` objective calls.
pub fn tune<F>(objective: F, cfg: &TunerConfig, start: VectorModulatorState) -> Result<TuneOutcome>
where
    F: FnMut(&VectorModulatorState) -> f64,
{
    cfg.validate()?;
    let control_step = start.control_step();
    let mut ev = Evaluator {
        objective,
        budget: cfg.max_evaluations,
        trace: Vec::new(),
    };

    let zero = start.zero_gain();
    let baseline_db = ev.eval(zero)?;
    let mut best = (zero, baseline_db);
    let mut start_v = None;
    if start != zero && !ev.exhausted() {
        let v = ev.eval(start)?;
        start_v = Some(v);
        if v < best.1 {
            best = (start, v);
        }
    }

    let initial_codes = ((cfg.initial_step / control_step).round() as i64).max(1);
    let min_codes = ((cfg.min_step / control_step).round() as i64).max(1);

    'delays: for &delay in &cfg.delay_grid {
        let (mut cur, mut cur_v) = match start_v {
            Some(v) if delay == start.delay_samples => (start, v),
            _ => (start.with_codes(delay, 0, 0), baseline_db),
        };
        let mut step = initial_codes;
        loop {
            let mut improved = false;
            for axis in 0..2 {
                for sign in [1i64, -1] {
                    let (i, q) = cur.codes();
                    let cand = if axis == 0 {
                        cur.with_codes(delay, i + sign * step, q)
                    } else {
                        cur.with_codes(delay, i, q + sign * step)
                    };
                    if cand.gain().norm() > 1.0 {
                        continue;
                    }
                    if ev.exhausted() {
                        if cur_v < best.1 {
                            best = (cur, cur_v);
                        }
                        break 'delays;
                    }
                    let v = ev.eval(cand)?;
                    if v < cur_v {
                        cur = cand;
                        cur_v = v;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                if step <= min_codes {
                    break;
                }
                step = (step / 2).max(min_codes);
            }
        }
        if cur_v < best.1 {
            best = (cur, cur_v);
        }
    }

    Ok(TuneOutcome {
        state: best.0,
        power_db: best.1,
        baseline_db,
        trace: ev.trace,
    })
}
