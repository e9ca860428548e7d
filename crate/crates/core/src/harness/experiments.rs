//! The three staged-cancellation experiments and the parameter sweep.

use std::fs;
use std::io::{BufWriter, Write};

use std::path::Path;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::measure::{band_power_db, measure_power, psd_estimate, PsdBin};
use super::report::{CancellationReport, CounterSummary, RfsicSummary, Stage};
use crate::analog::{apply_si_channel, combine_at_lna, pa_amplify, receive, rfsic_path, Received};
use crate::dsic::{cancel_stream, DsicConfig, DsicOutput};
use crate::error::Result;
use crate::signal::ComplexSequence;
use crate::tuner::{tune, TuneOutcome};
use crate::waveform::{generate_soi, generate_tx};

/// Signals shared by every experiment: transmit samples, PA output and the
/// leakage arriving at the LNA.
pub struct FrontEnd {
    pub x: ComplexSequence,
    pub y_pa: ComplexSequence,
    pub si: ComplexSequence,
}

pub fn front_end(cfg: &ExperimentConfig) -> Result<FrontEnd> {
    cfg.validate()?;
    let x = generate_tx(&cfg.tx_waveform(), cfg.sample_rate_hz)?.truncated(cfg.n_samples)?;
    let y_pa = pa_amplify(&x, &cfg.pa.build()?);
    let channel = cfg
        .channel
        .build(cfg.waveform.occupied_bandwidth_hz, cfg.sample_rate_hz)?;
    let si = apply_si_channel(&y_pa, &channel)?;
    Ok(FrontEnd { x, y_pa, si })
}

/// Tune the RF canceller on the first `tuner.probe_len` samples with the
/// probe noise seed held fixed across evaluations.
pub fn tune_rfsic(cfg: &ExperimentConfig, fe: &FrontEnd) -> Result<TuneOutcome> {
    let len = cfg.tuner.probe_len.min(cfg.n_samples);
    let si = fe.si.truncated(len)?;
    let y_pa = fe.y_pa.truncated(len)?;
    // Skip the start-up transient of the delayed paths.
    let settle = cfg.tuner.delay_grid.iter().copied().max().unwrap_or(0) + 16;
    let skip = settle.min(len - 1);
    let seed = cfg.seeds.probe;
    tune(
        |s| {
            let cancel = rfsic_path(&y_pa, s, seed);
            si.add(&cancel)
                .and_then(|sum| measure_power(&sum, skip))
                .unwrap_or(f64::NAN)
        },
        &cfg.tuner,
        cfg.vm.build()?,
    )
}

pub struct ExperimentOutput {
    pub report: CancellationReport,
    /// Stage name and its spectrum over the measurement window.
    pub psd: Vec<(&'static str, Vec<PsdBin>)>,
    pub tuning: Option<TuneOutcome>,
    pub dsic: Option<DsicOutput>,
    pub orders: Vec<usize>,
}

impl ExperimentOutput {
    /// Every output file as (file name, contents).
    pub fn files(&self) -> Vec<(String, Vec<u8>)> {
        let mut files = vec![(
            "report.txt".to_string(),
            self.report.to_string().into_bytes(),
        )];
        let mut csv = |name: String, write: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| {
            let mut buf = Vec::new();
            write(&mut buf).expect("writing to memory cannot fail");
            files.push((name, buf));
        };
        for (name, psd) in &self.psd {
            csv(format!("psd_{name}.csv"), &|w| write_psd_csv(psd, w));
        }
        if let Some(t) = &self.tuning {
            csv("tuning_trace.csv".into(), &|w| t.write_trace_csv(w));
        }
        if let Some(d) = &self.dsic {
            csv("dsic_trace.csv".into(), &|w| d.write_trace_csv(w));
            csv("dsic_coefficients.csv".into(), &|w| {
                d.write_coefficients_csv(&self.orders, w)
            });
            csv("counters.txt".into(), &|w| writeln!(w, "{}", d.counters));
        }
        files
    }

    /// Write `report.txt` and the CSV files into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in self.files() {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

pub fn write_psd_csv<W: Write>(psd: &[PsdBin], mut w: W) -> std::io::Result<()> {
    writeln!(w, "freq_hz,power_db")?;
    for b in psd {
        writeln!(w, "{:.1},{:.6}", b.freq_hz, b.power_db)?;
    }
    w.flush()
}

struct Measurer<'a> {
    cfg: &'a ExperimentConfig,
    skip: usize,
    stages: Vec<Stage>,
    psd: Vec<(&'static str, Vec<PsdBin>)>,
}

impl<'a> Measurer<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Self {
            cfg,
            skip: cfg.skip(),
            stages: Vec::new(),
            psd: Vec::new(),
        }
    }

    fn window(&self, seq: &ComplexSequence) -> ComplexSequence {
        ComplexSequence::from_parts(seq.samples()[self.skip..].to_vec(), seq.sample_rate_hz())
    }

    fn spectrum(&self, seq: &ComplexSequence) -> Result<Vec<PsdBin>> {
        psd_estimate(
            &self.window(seq),
            self.cfg.measure.nfft,
            self.cfg.measure.overlap,
        )
    }

    fn stage(&mut self, name: &'static str, seq: &ComplexSequence) -> Result<()> {
        let power_dbfs = measure_power(seq, self.skip)?;
        self.stages.push(Stage { name, power_dbfs });
        let psd = self.spectrum(seq)?;
        self.psd.push((name, psd));
        Ok(())
    }

    fn report(&self, experiment: &'static str) -> CancellationReport {
        CancellationReport {
            experiment,
            stages: self.stages.clone(),
            dbm_offset: self.cfg.tx_power_dbm_at_fullscale,
            clipped: 0,
            rfsic: None,
            convergence_sample: None,
            soi_margin_db: None,
            counters: None,
        }
    }
}

fn rfsic_summary(t: &TuneOutcome) -> RfsicSummary {
    RfsicSummary {
        delay_samples: t.state.delay_samples,
        gain_i: t.state.gain_i(),
        gain_q: t.state.gain_q(),
        evaluations: t.evaluations(),
    }
}

/// RF canceller alone: powers at the PA output, after the circulator and
/// after the canceller.
pub fn run_rfsic_showcase(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let fe = front_end(cfg)?;
    let tuning = tune_rfsic(cfg, &fe)?;
    let cancel = rfsic_path(&fe.y_pa, &tuning.state, cfg.seeds.rfsic_noise);
    let after = fe.si.add(&cancel)?;

    let mut m = Measurer::new(cfg);
    m.stage("tx_after_pa", &fe.y_pa)?;
    m.stage("si_after_circulator", &fe.si)?;
    m.stage("si_after_rfsic", &after)?;
    let mut report = m.report("rfsic");
    report.rfsic = Some(rfsic_summary(&tuning));
    Ok(ExperimentOutput {
        report,
        psd: m.psd,
        tuning: Some(tuning),
        dsic: None,
        orders: Vec::new(),
    })
}

fn run_dsic(
    cfg: &ExperimentConfig,
    rx: &Received,
    x: &ComplexSequence,
) -> Result<(DsicConfig, DsicOutput)> {
    let dcfg = cfg.dsic.build();
    let out = cancel_stream(&rx.signal, x, &dcfg)?;
    Ok((dcfg, out))
}

/// Digital canceller alone. The leakage is attenuated by
/// `dsic.attenuation_db` in place of the RF canceller so that the receiver
/// is not driven into clipping.
pub fn run_dsic_showcase(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let fe = front_end(cfg)?;
    let attenuated = fe.si.scaled(10f64.powf(-cfg.dsic.attenuation_db / 20.0));
    let rx = receive(&attenuated, &cfg.rx.build(), cfg.seeds.rx_noise)?;
    let (dcfg, dsic) = run_dsic(cfg, &rx, &fe.x)?;

    let mut m = Measurer::new(cfg);
    m.stage("tx_after_pa", &fe.y_pa)?;
    m.stage("si_after_circulator", &fe.si)?;
    m.stage("si_after_attenuator", &attenuated)?;
    m.stage("si_after_dsic", &dsic.residual)?;
    let mut report = m.report("dsic");
    report.clipped = rx.clipped;
    report.convergence_sample = Some(dsic.convergence_sample());
    report.counters = Some(CounterSummary::new(dsic.counters, &dcfg));
    Ok(ExperimentOutput {
        report,
        psd: m.psd,
        tuning: None,
        dsic: Some(dsic),
        orders: dcfg.basis.orders(),
    })
}

/// Everything after the tuned canceller and receiver, shared by the
/// combined experiment and the sweep.
struct CombinedChain {
    fe: FrontEnd,
    tuning: Option<TuneOutcome>,
    after_rfsic: ComplexSequence,
    soi: ComplexSequence,
    rx: Received,
}

fn combined_chain(cfg: &ExperimentConfig) -> Result<CombinedChain> {
    let fe = front_end(cfg)?;
    let (tuning, state) = if cfg.vm.enabled {
        let t = tune_rfsic(cfg, &fe)?;
        let s = t.state;
        (Some(t), s)
    } else {
        (None, cfg.vm.build()?.zero_gain())
    };
    let cancel = rfsic_path(&fe.y_pa, &state, cfg.seeds.rfsic_noise);
    let after_rfsic = fe.si.add(&cancel)?;
    let soi = if cfg.soi.enabled {
        generate_soi(&cfg.soi_waveform(), cfg.sample_rate_hz, cfg.soi.power_db)?
            .truncated(cfg.n_samples)?
    } else {
        ComplexSequence::zeros(cfg.n_samples, cfg.sample_rate_hz)?
    };
    let lna = combine_at_lna(&fe.si, &cancel, &soi)?;
    let rx = receive(&lna, &cfg.rx.build(), cfg.seeds.rx_noise)?;
    Ok(CombinedChain {
        fe,
        tuning,
        after_rfsic,
        soi,
        rx,
    })
}

/// Full chain with the signal of interest: RF canceller, receiver and
/// digital canceller. The post-DSIC stage is the residual with the signal of
/// interest removed; `soi.margin_db` compares the two within the signal's
/// band.
pub fn run_combined_showcase(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let chain = combined_chain(cfg)?;
    let mut m = Measurer::new(cfg);
    m.stage("tx_after_pa", &chain.fe.y_pa)?;
    m.stage("si_after_circulator", &chain.fe.si)?;
    m.stage("si_after_rfsic", &chain.after_rfsic)?;

    let mut dsic = None;
    let mut counters = None;
    let mut convergence = None;
    let mut margin = None;
    let mut orders = Vec::new();
    if cfg.dsic.enabled {
        let (dcfg, out) = run_dsic(cfg, &chain.rx, &chain.fe.x)?;
        let residual_si = out.residual.sub(&chain.soi)?;
        m.stage("si_after_dsic", &residual_si)?;
        if cfg.soi.enabled {
            let half = cfg.soi.occupied_bandwidth_hz / 2.0;
            let soi_band = band_power_db(&m.spectrum(&chain.soi)?, -half, half);
            let resid_band = band_power_db(&m.psd.last().expect("stage recorded").1, -half, half);
            margin = Some(soi_band - resid_band);
            m.psd.push(("soi", m.spectrum(&chain.soi)?));
            m.psd.push(("dsic_output", m.spectrum(&out.residual)?));
        }
        convergence = Some(out.convergence_sample());
        counters = Some(CounterSummary::new(out.counters, &dcfg));
        orders = dcfg.basis.orders();
        dsic = Some(out);
    }

    let mut report = m.report("combined");
    report.clipped = chain.rx.clipped;
    report.rfsic = chain.tuning.as_ref().map(rfsic_summary);
    report.convergence_sample = convergence;
    report.soi_margin_db = margin;
    report.counters = counters;
    Ok(ExperimentOutput {
        report,
        psd: m.psd,
        tuning: chain.tuning,
        dsic,
        orders,
    })
}

/// One cell of the digital-canceller parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub order: usize,
    pub memory: usize,
    pub dcd_updates: usize,
    pub residual_dbfs: f64,
    pub dsic_cancellation_db: f64,
    pub convergence_sample: usize,
    pub mults_per_sample: f64,
    pub adds_per_sample: f64,
}

pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub traces: Vec<Vec<f64>>,
}

impl SweepOutput {
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(fs::File::create(dir.join("sweep.csv"))?);
        writeln!(
            w,
            "cell,lambda,order,memory,dcd_updates,residual_dbfs,dsic_cancellation_db,convergence_sample,mults_per_sample,adds_per_sample"
        )?;
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(
                w,
                "{i},{},{},{},{},{:.4},{:.4},{},{:.2},{:.2}",
                r.lambda,
                r.order,
                r.memory,
                r.dcd_updates,
                r.residual_dbfs,
                r.dsic_cancellation_db,
                r.convergence_sample,
                r.mults_per_sample,
                r.adds_per_sample
            )?;
        }
        w.flush()?;
        for (i, trace) in self.traces.iter().enumerate() {
            let cell = dir.join(format!("cell_{i:03}"));
            fs::create_dir_all(&cell)?;
            let mut w = BufWriter::new(fs::File::create(cell.join("dsic_trace.csv"))?);
            writeln!(w, "sample_index,residual_power_db")?;
            for (n, p) in trace.iter().enumerate() {
                writeln!(w, "{n},{p:.6}")?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

/// Grid over (λ, order, memory, N_u) on the combined chain. The analog front
/// end and RF tuning run once; cells run in parallel.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let chain = combined_chain(cfg)?;
    let skip = cfg.skip();
    let before = measure_power(&chain.after_rfsic, skip)?;
    let s = &cfg.sweep;
    let mut grid = Vec::new();
    for &lambda in &s.lambda {
        for &order in &s.order {
            for &memory in &s.memory {
                for &dcd_updates in &s.dcd_updates {
                    let mut section = cfg.dsic.clone();
                    section.lambda = lambda;
                    section.order = order;
                    section.memory = memory;
                    section.dcd_updates = dcd_updates;
                    grid.push(section.build());
                }
            }
        }
    }
    let results: Vec<Result<(SweepRow, Vec<f64>)>> = grid
        .par_iter()
        .map(|d| {
            let out = cancel_stream(&chain.rx.signal, &chain.fe.x, d)?;
            let residual_si = out.residual.sub(&chain.soi)?;
            let residual_dbfs = measure_power(&residual_si, skip)?;
            let n = out.counters.samples.max(1) as f64;
            let row = SweepRow {
                lambda: d.lambda,
                order: d.basis.order,
                memory: d.basis.memory,
                dcd_updates: d.dcd.max_updates,
                residual_dbfs,
                dsic_cancellation_db: before - residual_dbfs,
                convergence_sample: out.convergence_sample(),
                mults_per_sample: out.counters.real_mults() as f64 / n,
                adds_per_sample: out.counters.real_adds() as f64 / n,
            };
            Ok((row, out.trace_db))
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    for r in results {
        let (row, trace) = r?;
        rows.push(row);
        traces.push(trace);
    }
    Ok(SweepOutput { rows, traces })
}
