use fdsic::harness::measure::mean_bin_power_db;
use fdsic::harness::{band_power_db, measure_power, psd_estimate, PsdBin};
use fdsic::signal::{complex_awgn, ComplexSequence};
use fdsic::waveform::{generate_soi, generate_tx, WaveformConfig};
use num_complex::Complex64;

const FS: f64 = 61.44e6;

fn total_db(psd: &[PsdBin]) -> f64 {
    band_power_db(psd, f64::NEG_INFINITY, f64::INFINITY)
}

#[test]
fn white_noise_is_flat_and_parseval_holds() {
    // 100 averages at nfft = 1024 without overlap.
    let x = ComplexSequence::new(complex_awgn(1024 * 100, 0.0, 3), FS).unwrap();
    let psd = psd_estimate(&x, 1024, 0.0).unwrap();
    let mean = mean_bin_power_db(&psd, 0.0, FS);
    for b in &psd {
        assert!(
            (b.power_db - mean).abs() <= 1.5,
            "{} Hz: {} vs {mean}",
            b.freq_hz,
            b.power_db
        );
    }
    let p = measure_power(&x, 0).unwrap();
    assert!((total_db(&psd) - p).abs() <= 0.2);
}

#[test]
fn ofdm_parseval_with_overlap() {
    let cfg = WaveformConfig::for_bandwidth(1024, 20e6, FS, 40, 9);
    let x = generate_tx(&cfg, FS).unwrap();
    let psd = psd_estimate(&x, 1024, 0.5).unwrap();
    assert!((total_db(&psd) - measure_power(&x, 0).unwrap()).abs() <= 0.2);
}

#[test]
fn frequency_axis_is_centred() {
    let x = ComplexSequence::new(complex_awgn(4096, 0.0, 1), FS).unwrap();
    let psd = psd_estimate(&x, 256, 0.5).unwrap();
    assert_eq!(psd.len(), 256);
    assert_eq!(psd[128].freq_hz, 0.0);
    assert_eq!(psd[0].freq_hz, -FS / 2.0);
    assert!(psd.windows(2).all(|w| w[1].freq_hz > w[0].freq_hz));
}

fn containment(bw: f64) -> (f64, f64) {
    let cfg = WaveformConfig::for_bandwidth(1024, bw, FS, 120, 4);
    let x = generate_tx(&cfg, FS).unwrap();
    let psd = psd_estimate(&x, 1024, 0.5).unwrap();
    let in_band = mean_bin_power_db(&psd, 0.0, 0.45 * bw);
    // Leave a guard of 10% of the bandwidth around each edge.
    let out_band = mean_bin_power_db(&psd, 0.6 * bw, FS / 2.0);
    (in_band, out_band)
}

#[test]
fn transmit_spectrum_is_contained() {
    let (inside, outside) = containment(20e6);
    assert!(inside - outside >= 30.0, "{inside} vs {outside}");
}

#[test]
fn ten_megahertz_occupies_a_sixth_of_the_band() {
    let cfg = WaveformConfig::for_bandwidth(1024, 10e6, FS, 120, 5);
    let x = generate_soi(&cfg, FS, -40.0).unwrap();
    let psd = psd_estimate(&x, 1024, 0.5).unwrap();
    let peak = psd
        .iter()
        .map(|b| b.power_db)
        .fold(f64::NEG_INFINITY, f64::max);
    let occupied =
        psd.iter().filter(|b| b.power_db > peak - 10.0).count() as f64 / psd.len() as f64;
    assert!((occupied - 10e6 / FS).abs() < 0.01, "{occupied}");
    let (inside, outside) = containment(10e6);
    assert!(inside - outside >= 30.0);
    let p = measure_power(&x, 0).unwrap();
    assert!((p + 40.0).abs() < 0.1);
}

#[test]
fn single_tone_peak() {
    let f0 = 5.0 * FS / 1024.0 * 17.0;
    let x: Vec<Complex64> = (0..65536)
        .map(|n| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f0 * n as f64 / FS))
        .collect();
    let x = ComplexSequence::new(x, FS).unwrap();
    let psd = psd_estimate(&x, 1024, 0.5).unwrap();
    let (i_peak, peak) = psd
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.power_db.total_cmp(&b.1.power_db))
        .unwrap();
    assert!((peak.freq_hz - f0).abs() < FS / 1024.0);
    let far: f64 = psd
        .iter()
        .enumerate()
        .filter(|(i, _)| i.abs_diff(i_peak) > 20)
        .map(|(_, b)| b.power_db)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(peak.power_db - far >= 50.0);
}

#[test]
fn requested_soi_power_is_met() {
    for &p in &[-85.0, -40.0, -3.0] {
        let cfg = WaveformConfig::for_bandwidth(512, 20e6, FS, 8, 2);
        let x = generate_soi(&cfg, FS, p).unwrap();
        assert!((measure_power(&x, 0).unwrap() - p).abs() < 0.1);
    }
}
