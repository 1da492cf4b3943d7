//! Command line front end for the RP-OTFS sensing simulator: scenario files,
//! output formats and the `simulate`, `sweep` and `dump-frame` commands.

pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use rpotfs_core::metrics::sweep_point;
use rpotfs_core::pipeline::{self, MethodOutcome};
use rpotfs_core::PeakReport;

use crate::output::CurveRow;
pub use crate::scenario::{Scenario, ScenarioError, Seeds};

/// What one `simulate` run produced.
#[derive(Debug)]
pub struct SimulateSummary {
    pub out_dir: PathBuf,
    pub frames: usize,
    pub reports: Vec<PeakReport>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

fn manifest(scenario: &Scenario, frames: usize, warnings: &[String]) -> String {
    let mut text = format!(
        "# resolved scenario written by rpotfs {}\n# frames = {frames}\n",
        env!("CARGO_PKG_VERSION")
    );
    for w in warnings {
        text.push_str(&format!("# warning: {w}\n"));
    }
    text.push_str(&scenario.to_text());
    text
}

/// Runs one scenario and writes maps, peak tables and a manifest to `out_dir`.
pub fn run_simulate(scenario: &Scenario, out_dir: &Path) -> Result<SimulateSummary> {
    let setup = scenario.setup()?;
    let outcome = pipeline::run(&setup)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let mut files = Vec::new();
    let mut reports = Vec::new();
    let written: [(&str, &Option<MethodOutcome>); 2] =
        [("caf", &outcome.caf), ("pilot", &outcome.pilot)];
    for (tag, result) in written {
        let Some(result) = result else { continue };
        let map = if scenario.output_max_doppler_hz > 0.0 {
            result.map.crop_doppler(scenario.output_max_doppler_hz)
        } else {
            result.map.clone()
        };
        for (name, text) in [
            (format!("map_{tag}.csv"), output::map_csv(&map)),
            (format!("map_{tag}.pgm"), output::map_pgm(&map)),
            (
                format!("peaks_{tag}.csv"),
                output::peaks_csv(&result.map, &result.report, scenario.fc_hz),
            ),
        ] {
            output::write(out_dir, &name, &text).with_context(|| format!("cannot write {name}"))?;
            files.push(out_dir.join(name));
        }
        reports.push(result.report.clone());
    }
    let mut resolved = scenario.clone();
    resolved.output_dir = out_dir.to_path_buf();
    output::write(
        out_dir,
        "manifest.txt",
        &manifest(&resolved, setup.frames, &outcome.warnings),
    )
    .context("cannot write manifest.txt")?;
    files.push(out_dir.join("manifest.txt"));
    Ok(SimulateSummary {
        out_dir: out_dir.to_path_buf(),
        frames: setup.frames,
        reports,
        warnings: outcome.warnings,
        files,
    })
}

/// Grid of operating points for [`run_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub snr_db: Vec<f64>,
    pub ti_s: Vec<f64>,
    pub vmax_mps: Vec<f64>,
    pub repetitions: usize,
}

/// Evaluates every (integration time, vmax, SNR) cell in parallel. Rows come
/// back in that nesting order with one row per method.
pub fn sweep_rows(scenario: &Scenario, grid: &SweepGrid) -> Result<Vec<CurveRow>> {
    let mut cells = Vec::new();
    for &ti in &grid.ti_s {
        for &vmax in &grid.vmax_mps {
            for &snr in &grid.snr_db {
                cells.push((ti, vmax, snr));
            }
        }
    }
    let results: Vec<Result<Vec<CurveRow>>> = cells
        .par_iter()
        .map(|&(ti, vmax, snr)| {
            let mut cell = scenario.with_vmax(vmax);
            cell.integration_time_s = ti;
            cell.validate()?;
            let setup = cell.setup()?;
            let points = sweep_point(&setup, snr, grid.repetitions)
                .with_context(|| format!("sweep cell snr={snr} ti={ti} vmax={vmax}"))?;
            Ok(points
                .into_iter()
                .map(|point| CurveRow {
                    ti_s: ti,
                    vmax_mps: vmax,
                    frames: setup.frames,
                    point,
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Runs [`sweep_rows`] and writes `curves.csv` plus the base manifest.
pub fn run_sweep(scenario: &Scenario, grid: &SweepGrid, out_dir: &Path) -> Result<Vec<CurveRow>> {
    let rows = sweep_rows(scenario, grid)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    output::write(out_dir, "curves.csv", &output::curves_csv(&rows))
        .context("cannot write curves.csv")?;
    let mut resolved = scenario.clone();
    resolved.output_dir = out_dir.to_path_buf();
    output::write(
        out_dir,
        "manifest.txt",
        &manifest(&resolved, scenario.frames()?, &[]),
    )
    .context("cannot write manifest.txt")?;
    Ok(rows)
}

/// Writes the DD grid, time-domain frame and zone layout of frame 0.
pub fn run_dump_frame(scenario: &Scenario, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let setup = scenario.setup()?;
    let capture =
        rpotfs_core::modem::build_capture(&setup.grid, &setup.scheme, 1, setup.data_seed)?;
    let frame = capture.record.frame(0)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let mut files = Vec::new();
    for (name, text) in [
        ("dd.csv", output::matrix_csv(frame.dd.values())),
        ("tt.csv", output::matrix_csv(frame.tt.values())),
        ("layout.csv", output::layout_csv(&frame.layout)),
    ] {
        output::write(out_dir, name, &text).with_context(|| format!("cannot write {name}"))?;
        files.push(out_dir.join(name));
    }
    Ok(files)
}
