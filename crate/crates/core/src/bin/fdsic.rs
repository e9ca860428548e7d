use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fdsic::harness::{
    run_combined_showcase, run_dsic_showcase, run_rfsic_showcase, run_selftest, run_sweep,
    ExperimentConfig,
};

/// Full-duplex self-interference cancellation simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// RF canceller alone.
    Rfsic(Common),
    /// Digital canceller alone, with attenuation in place of the RF stage.
    Dsic(Common),
    /// Full chain with a signal of interest.
    Combined(Common),
    /// Digital-canceller grid over lambda, order, memory and DCD updates.
    Sweep(Common),
    /// Structural invariant checks.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// Experiment config (dotted key = value); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the report and CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Base seed; every noise source derives its seed from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of samples to simulate.
    #[arg(long)]
    samples: Option<usize>,
}

impl Common {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seeds = fdsic::harness::config::Seeds::from_base(seed);
        }
        if let Some(n) = self.samples {
            cfg.n_samples = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (common, which) = match &cli.command {
        Command::Selftest => {
            let results = run_selftest();
            for r in &results {
                println!(
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
            }
            return Ok(results.iter().all(|r| r.passed));
        }
        Command::Rfsic(c) => (c, "rfsic"),
        Command::Dsic(c) => (c, "dsic"),
        Command::Combined(c) => (c, "combined"),
        Command::Sweep(c) => (c, "sweep"),
    };
    let cfg = common.config()?;
    let out_dir = &common.out;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    std::fs::write(out_dir.join("config.cfg"), cfg.to_flat_string())
        .with_context(|| format!("writing to {}", out_dir.display()))?;

    if which == "sweep" {
        let sweep = run_sweep(&cfg)?;
        sweep
            .write_to(out_dir)
            .with_context(|| format!("writing to {}", out_dir.display()))?;
        println!("cells = {}", sweep.rows.len());
        return Ok(true);
    }
    let output = match which {
        "rfsic" => run_rfsic_showcase(&cfg)?,
        "dsic" => run_dsic_showcase(&cfg)?,
        _ => run_combined_showcase(&cfg)?,
    };
    output
        .write_to(out_dir)
        .with_context(|| format!("writing to {}", out_dir.display()))?;
    print!("{}", output.report);
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("fdsic: {e:#}");
            ExitCode::FAILURE
        }
    }
}
