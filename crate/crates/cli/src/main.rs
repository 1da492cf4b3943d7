use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use rpotfs_cli::scenario::parse_method;
use rpotfs_cli::{run_dump_frame, run_simulate, run_sweep, Scenario, Seeds, SweepGrid};

/// RP-OTFS joint sensing and communication simulator.
#[derive(Parser)]
#[command(name = "rpotfs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    scenario: PathBuf,
    /// Output directory, overriding `run.output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Derives every seed from this value.
    #[arg(long)]
    seed: Option<u64>,
    /// caf, pilot or both.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs one scenario and writes maps, peaks and a manifest.
    Simulate(Common),
    /// Evaluates output SNR over a grid of SNR, integration time and speed.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Input SNR points in dB, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        snr: Vec<f64>,
        /// Integration times in seconds; defaults to the scenario value.
        #[arg(long, value_delimiter = ',')]
        ti: Vec<f64>,
        /// Fastest target speed in m/s; defaults to the scenario value.
        #[arg(long, value_delimiter = ',')]
        vmax: Vec<f64>,
        /// Noise and data realizations per point.
        #[arg(long, default_value_t = 1)]
        reps: usize,
    },
    /// Writes the DD grid, time-domain samples and layout of one frame.
    DumpFrame(Common),
}

fn load(common: &Common) -> Result<(Scenario, PathBuf)> {
    let mut scenario = Scenario::from_file(&common.scenario)?;
    if let Some(master) = common.seed {
        scenario.seeds = Seeds::from_master(master);
    }
    if let Some(m) = &common.method {
        let Some(method) = parse_method(m) else {
            bail!("--method must be caf, pilot or both, got `{m}`");
        };
        scenario.method = method;
    }
    scenario.validate()?;
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| scenario.output_dir.clone());
    Ok((scenario, out))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(common) => {
            let (scenario, out) = load(&common)?;
            let summary = run_simulate(&scenario, &out)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{} frames, outputs in {}",
                summary.frames,
                summary.out_dir.display()
            );
            for r in &summary.reports {
                let main = &r.peaks[0];
                println!(
                    "{:>5}: peak at delay bin {} doppler bin {}, floor {:.2} dB, output SNR {:.2} dB, {} peaks",
                    r.method.tag(),
                    main.delay_bin,
                    main.doppler_bin,
                    r.floor_rms_db,
                    r.output_snr_db,
                    r.peaks.len()
                );
            }
        }
        Command::Sweep {
            common,
            snr,
            ti,
            vmax,
            reps,
        } => {
            let (scenario, out) = load(&common)?;
            let grid = SweepGrid {
                snr_db: snr,
                ti_s: if ti.is_empty() {
                    vec![scenario.integration_time_s]
                } else {
                    ti
                },
                vmax_mps: if vmax.is_empty() {
                    vec![scenario.vmax()]
                } else {
                    vmax
                },
                repetitions: reps,
            };
            let rows = run_sweep(&scenario, &grid, &out)?;
            println!(
                "{} rows written to {}",
                rows.len(),
                out.join("curves.csv").display()
            );
        }
        Command::DumpFrame(common) => {
            let (scenario, out) = load(&common)?;
            for f in run_dump_frame(&scenario, &out)? {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}
