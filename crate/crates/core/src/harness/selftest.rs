//! Built-in structural checks run by `fdsic selftest`.

use num_complex::Complex64;

use super::config::ExperimentConfig;
use super::experiments::run_combined_showcase;
use super::measure::measure_power;
use crate::analog::{
    apply_si_channel, circulator_leakage_default, pa_amplify, receive, rfsic_path, PaModel,
    ReceiverConfig, SiChannel, Tap, VectorModulatorState,
};
use crate::dsic::{
    basis_generate, build_regressor, dcd_solve, BasisConfig, BasisVector, DcdParams,
    RegressorBuffer,
};
use crate::error::Result;
use crate::linalg::CMatrix;
use crate::signal::{complex_awgn, ComplexSequence};
use crate::tuner::{tune, TunerConfig};
use crate::waveform::DEFAULT_SAMPLE_RATE_HZ;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from(name: &'static str, r: Result<std::result::Result<String, String>>) -> Self {
        match r {
            Ok(Ok(detail)) => Self {
                name,
                passed: true,
                detail,
            },
            Ok(Err(detail)) => Self {
                name,
                passed: false,
                detail,
            },
            Err(e) => Self {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        }
    }
}

type Check = fn() -> Result<std::result::Result<String, String>>;

const CHECKS: [(&str, Check); 7] = [
    ("zero_in_zero_out", zero_in_zero_out),
    ("si_channel_fir_oracle", fir_oracle),
    ("si_channel_feedback_impulse", feedback_impulse),
    ("regressor_shift", regressor_shift),
    ("dcd_dyadic_updates", dcd_dyadic),
    ("tuner_never_worse_than_zero_gain", tuner_monotone),
    ("byte_identical_reruns", reruns_identical),
];

/// Run every check; none of them stops the others.
pub fn run_selftest() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|&(name, check)| CheckResult::from(name, check()))
        .collect()
}

fn seq(samples: Vec<Complex64>) -> ComplexSequence {
    ComplexSequence::from_parts(samples, DEFAULT_SAMPLE_RATE_HZ)
}

fn verdict(ok: bool, detail: String) -> std::result::Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn zero_in_zero_out() -> Result<std::result::Result<String, String>> {
    let zeros = ComplexSequence::zeros(4096, DEFAULT_SAMPLE_RATE_HZ)?;
    let pa = pa_amplify(&zeros, &PaModel::default());
    let si = apply_si_channel(&pa, &circulator_leakage_default())?;
    let vm = VectorModulatorState::from_codes(2, 100, -50, 1.0 / 8192.0, f64::NEG_INFINITY)?;
    let cancel = rfsic_path(&pa, &vm, 7);
    let rx = ReceiverConfig {
        noise_floor_db: f64::NEG_INFINITY,
        ..ReceiverConfig::default()
    };
    let out = receive(&si.add(&cancel)?, &rx, 9)?;
    let peak = [&pa, &si, &cancel, &out.signal]
        .iter()
        .map(|s| s.peak())
        .fold(0.0, f64::max);
    Ok(verdict(
        peak == 0.0 && out.clipped == 0,
        format!("peak {peak:e}, clipped {}", out.clipped),
    ))
}

fn fir_oracle() -> Result<std::result::Result<String, String>> {
    let x = complex_awgn(2048, 0.0, 11);
    let mut taps = circulator_leakage_default().forward().to_vec();
    taps.push(Tap::new(0.01, -0.02, 0));
    let ch = SiChannel::new(taps.clone(), Vec::new())?;
    let y = apply_si_channel(&seq(x.clone()), &ch)?;
    let mut worst = 0.0f64;
    for n in 0..x.len() {
        let mut direct = Complex64::new(0.0, 0.0);
        for t in &taps {
            if let Some(k) = n.checked_sub(t.delay) {
                direct += t.gain * x[k];
            }
        }
        worst = worst.max((y.samples()[n] - direct).norm());
    }
    Ok(verdict(worst <= 1e-12, format!("max deviation {worst:e}")))
}

fn feedback_impulse() -> Result<std::result::Result<String, String>> {
    let g = Complex64::new(0.3, -0.2);
    let b = Complex64::new(0.1, 0.15);
    let d = 3;
    let ch = SiChannel::new(
        vec![Tap { gain: g, delay: 0 }],
        vec![Tap { gain: b, delay: d }],
    )?;
    let mut impulse = vec![Complex64::new(0.0, 0.0); 64];
    impulse[0] = Complex64::new(1.0, 0.0);
    let h = apply_si_channel(&seq(impulse), &ch)?;
    let mut worst = 0.0f64;
    for (n, v) in h.samples().iter().enumerate() {
        let expected = if n % d == 0 {
            g * b.powu((n / d) as u32)
        } else {
            Complex64::new(0.0, 0.0)
        };
        worst = worst.max((v - expected).norm());
    }
    Ok(verdict(worst <= 1e-15, format!("max deviation {worst:e}")))
}

fn regressor_shift() -> Result<std::result::Result<String, String>> {
    let cfg = BasisConfig::new(5, 6);
    let terms = cfg.terms();
    let x = seq(complex_awgn(256, 0.0, 5));
    let basis = basis_generate(&x, &cfg)?;
    let mut buf = RegressorBuffer::new(&cfg);
    let mut prev = buf.current().to_vec();
    let mut history: Vec<BasisVector> = vec![BasisVector::zeros(terms); cfg.memory];
    for phi in &basis {
        let u = buf.push(phi)?.to_vec();
        if u[terms..] != prev[..prev.len() - terms] {
            return Ok(Err("shifted block differs from previous regressor".into()));
        }
        history.rotate_right(1);
        history[0] = phi.clone();
        if build_regressor(&history)?.0 != u {
            return Ok(Err("buffer differs from stacked history".into()));
        }
        prev = u;
    }
    Ok(Ok(format!("{} samples, dim {}", basis.len(), cfg.dim())))
}

fn dcd_dyadic() -> Result<std::result::Result<String, String>> {
    let n = 8;
    let rows: Vec<Vec<Complex64>> = complex_awgn(n * n, 0.0, 21)
        .chunks(n)
        .map(<[_]>::to_vec)
        .collect();
    let a = CMatrix::from_rows(&rows)?;
    let mut r = a.conj_transpose().matmul(&a)?;
    for i in 0..n {
        r.row_mut(i)[i] += Complex64::new(n as f64, 0.0);
    }
    let beta = complex_awgn(n, 0.0, 22);
    let p = DcdParams {
        amplitude: 2.0,
        bits: 12,
        max_updates: 64,
    };
    let sol = dcd_solve(&r, &beta, &p)?;
    let res = p.resolution();
    let off_grid = sol
        .delta
        .iter()
        .flat_map(|d| [d.re, d.im])
        .filter(|v| (v / res).fract() != 0.0)
        .count();
    Ok(verdict(
        off_grid == 0 && sol.ops.mults == 0,
        format!(
            "{} updates, {off_grid} components off the H/2^Mb grid, {} mults",
            sol.updates, sol.ops.mults
        ),
    ))
}

fn tuner_monotone() -> Result<std::result::Result<String, String>> {
    let n = 4096;
    let y_pa = seq(complex_awgn(n, 0.0, 31));
    let si = apply_si_channel(&y_pa, &circulator_leakage_default())?;
    let cfg = TunerConfig {
        max_evaluations: 300,
        ..TunerConfig::default()
    };
    let start = VectorModulatorState::from_codes(0, 0, 0, 1.0 / 8192.0, -60.0)?;
    let out = tune(
        |s| {
            let c = rfsic_path(&y_pa, s, 32);
            si.add(&c)
                .and_then(|v| measure_power(&v, 16))
                .unwrap_or(f64::NAN)
        },
        &cfg,
        start,
    )?;
    let mut running = f64::INFINITY;
    let mut monotone = true;
    let mut best_seen = f64::INFINITY;
    for t in &out.trace {
        best_seen = best_seen.min(t.power_db);
        if best_seen > running {
            monotone = false;
        }
        running = best_seen;
    }
    Ok(verdict(
        monotone && out.power_db <= out.baseline_db && out.power_db == best_seen,
        format!(
            "baseline {:.2} dB, tuned {:.2} dB after {} evaluations",
            out.baseline_db,
            out.power_db,
            out.evaluations()
        ),
    ))
}

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        n_samples: 1 << 14,
        ..ExperimentConfig::default()
    };
    cfg.tuner.max_evaluations = 200;
    cfg.tuner.probe_len = 2048;
    cfg.dsic.n_cov = 2048;
    cfg
}

fn reruns_identical() -> Result<std::result::Result<String, String>> {
    let cfg = small_config();
    let a = run_combined_showcase(&cfg)?.files();
    let b = run_combined_showcase(&cfg)?.files();
    let bytes: usize = a.iter().map(|(_, v)| v.len()).sum();
    Ok(verdict(a == b, format!("{} files, {bytes} bytes", a.len())))
}
