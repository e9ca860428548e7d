mod common;

use common::db;
use fdsic::analog::{
    apply_si_channel, pa_amplify, rfsic_path, PaModel, SiChannel, Tap, VectorModulatorState,
};
use fdsic::harness::measure_power;
use fdsic::signal::ComplexSequence;
use fdsic::tuner::{tune, TuneOutcome, TunerConfig};
use fdsic::waveform::{generate_tx, WaveformConfig};
use num_complex::Complex64;

const FS: f64 = 61.44e6;
const SKIP: usize = 16;

fn y_pa(n: usize) -> ComplexSequence {
    let mut cfg = WaveformConfig::for_bandwidth(1024, 20e6, FS, 1, 17);
    cfg.n_symbols = cfg.symbols_for(n);
    let x = generate_tx(&cfg, FS).unwrap().truncated(n).unwrap();
    pa_amplify(&x, &PaModel::default())
}

fn tune_against(
    y: &ComplexSequence,
    ch: &SiChannel,
    cfg: &TunerConfig,
    noise_db: f64,
) -> (TuneOutcome, ComplexSequence) {
    let si = apply_si_channel(y, ch).unwrap();
    let start = VectorModulatorState::from_codes(0, 0, 0, 1.0 / 8192.0, noise_db).unwrap();
    let out = tune(
        |s| measure_power(&si.add(&rfsic_path(y, s, 5)).unwrap(), SKIP).unwrap(),
        cfg,
        start,
    )
    .unwrap();
    (out, si)
}

/// Smallest residual reachable with one delayed complex gain: for each
/// delay, project the leakage onto the delayed PA output.
fn projection_bound_db(y: &ComplexSequence, si: &ComplexSequence, delays: &[usize]) -> f64 {
    let s = &si.samples()[SKIP..];
    let n = s.len() as f64;
    let total: f64 = s.iter().map(|v| v.norm_sqr()).sum();
    delays
        .iter()
        .map(|&d| {
            let yd: Vec<Complex64> = (SKIP..si.len()).map(|k| y.samples()[k - d]).collect();
            let cross: Complex64 = s.iter().zip(&yd).map(|(a, b)| a * b.conj()).sum();
            let energy: f64 = yd.iter().map(|v| v.norm_sqr()).sum();
            db((total - cross.norm_sqr() / energy) / n)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn single_aligned_tap_is_suppressed_by_sixty_db() {
    let y = y_pa(4096);
    let g = Complex64::new(0.0713, -0.0391);
    let ch = SiChannel::new(vec![Tap { gain: g, delay: 2 }], vec![]).unwrap();
    let (out, _) = tune_against(&y, &ch, &TunerConfig::default(), f64::NEG_INFINITY);
    assert!(
        out.baseline_db - out.power_db >= 60.0,
        "{} dB",
        out.baseline_db - out.power_db
    );
    assert_eq!(out.state.delay_samples, 2);
    // Nearest code on each axis.
    let step = out.state.control_step();
    assert!((out.state.gain() + g).re.abs() <= step / 2.0 + 1e-15);
    assert!((out.state.gain() + g).im.abs() <= step / 2.0 + 1e-15);
}

#[test]
fn multipath_residual_reaches_projection_bound() {
    let y = y_pa(4096);
    let channels = [
        SiChannel::new(
            vec![
                Tap::new(0.08, -0.05, 1),
                Tap::new(0.01, 0.004, 3),
                Tap::new(-0.003, 0.002, 4),
            ],
            vec![],
        )
        .unwrap(),
        SiChannel::new(
            vec![Tap::new(0.05, 0.02, 2), Tap::new(0.02, -0.01, 3)],
            vec![Tap::new(0.01, 0.01, 2)],
        )
        .unwrap(),
        fdsic::analog::circulator_leakage_default(),
    ];
    for ch in &channels {
        let cfg = TunerConfig::default();
        let (out, si) = tune_against(&y, ch, &cfg, f64::NEG_INFINITY);
        let bound = projection_bound_db(&y, &si, &cfg.delay_grid);
        assert!(
            out.power_db >= bound - 1e-9,
            "{} below bound {bound}",
            out.power_db
        );
        assert!(
            out.power_db - bound <= 1.0,
            "{} vs bound {bound}",
            out.power_db
        );
    }
}

#[test]
fn no_leakage_keeps_zero_gain() {
    let y = y_pa(2048);
    let (out, _) = tune_against(&y, &SiChannel::none(), &TunerConfig::default(), -90.0);
    assert_eq!(out.state.codes(), (0, 0));
    assert_eq!(out.power_db, out.baseline_db);
}

#[test]
fn budget_and_quantization_hold() {
    let y = y_pa(2048);
    let ch = fdsic::analog::circulator_leakage_default();
    for budget in [1, 2, 7, 50, 400] {
        let cfg = TunerConfig {
            max_evaluations: budget,
            ..TunerConfig::default()
        };
        let (out, _) = tune_against(&y, &ch, &cfg, -100.0);
        assert!(out.evaluations() <= budget);
        assert!(out.power_db <= out.baseline_db);
        let (i, q) = out.state.codes();
        assert_eq!(out.state.gain_i(), i as f64 * out.state.control_step());
        assert_eq!(out.state.gain_q(), q as f64 * out.state.control_step());
    }
}

#[test]
fn tuning_trace_csv_has_one_row_per_evaluation() {
    let y = y_pa(2048);
    let cfg = TunerConfig {
        max_evaluations: 30,
        ..TunerConfig::default()
    };
    let (out, _) = tune_against(
        &y,
        &fdsic::analog::circulator_leakage_default(),
        &cfg,
        -100.0,
    );
    let mut buf = Vec::new();
    out.write_trace_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("evaluation,delay,gain_i,gain_q,power_db")
    );
    assert_eq!(lines.count(), out.evaluations());
}
