//! File formats written by the command line tool.
//!
//! Every float is written with Rust's shortest round-trip formatting, so a
//! rerun with the same inputs produces byte-identical files.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rpotfs_core::grid::{delay_to_range, doppler_to_velocity};
use rpotfs_core::metrics::{PeakReport, SweepPoint};
use rpotfs_core::{CMatrix, Complex64, FrameLayout, RadarMap};

/// Lowest level drawn in grey-scale images, in dB below the map peak.
pub const PGM_FLOOR_DB: f64 = -60.0;

/// Magnitude map in dB. The first row holds the Doppler axis in Hz, every
/// following row starts with its delay bin.
pub fn map_csv(map: &RadarMap) -> String {
    let mut s = String::from("delay_bin\\doppler_hz");
    for c in 0..map.cols() {
        let _ = write!(s, ",{}", map.doppler_hz(c));
    }
    s.push('\n');
    for r in 0..map.rows() {
        let _ = write!(s, "{}", map.delay_bin(r));
        for c in 0..map.cols() {
            let _ = write!(s, ",{}", map.magnitude_db(r, c));
        }
        s.push('\n');
    }
    s
}

/// Plain (P2) grey-scale image: rows are delay bins, columns Doppler bins,
/// `[PGM_FLOOR_DB, 0]` dB mapped onto 0..=255.
pub fn map_pgm(map: &RadarMap) -> String {
    let mut s = format!(
        "P2\n# {} map, {} dB to 0 dB\n{} {}\n255\n",
        map.method.tag(),
        PGM_FLOOR_DB,
        map.cols(),
        map.rows()
    );
    for r in 0..map.rows() {
        let mut line_len = 0;
        for c in 0..map.cols() {
            let db = map.magnitude_db(r, c).clamp(PGM_FLOOR_DB, 0.0);
            let level = ((db - PGM_FLOOR_DB) / -PGM_FLOOR_DB * 255.0).round() as u8;
            let cell = level.to_string();
            // Plain PGM lines should stay under 70 characters.
            if line_len > 0 && line_len + cell.len() + 1 > 70 {
                s.push('\n');
                line_len = 0;
            }
            if line_len > 0 {
                s.push(' ');
                line_len += 1;
            }
            s.push_str(&cell);
            line_len += cell.len();
        }
        s.push('\n');
    }
    s
}

pub fn peaks_csv(map: &RadarMap, report: &PeakReport, fc_hz: f64) -> String {
    let mut s = String::from(
        "rank,delay_bin,doppler_bin,range_m,doppler_hz,velocity_mps,level_db,floor_rms_db,output_snr_db\n",
    );
    for (rank, p) in report.peaks.iter().enumerate() {
        let delay_s = p.delay_bin as f64 * map.delay_step_s;
        let doppler_hz = p.doppler_bin as f64 * map.doppler_step_hz;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            rank,
            p.delay_bin,
            p.doppler_bin,
            delay_to_range(delay_s),
            doppler_hz,
            doppler_to_velocity(doppler_hz, fc_hz),
            p.level_db,
            report.floor_rms_db,
            report.output_snr_db
        );
    }
    s
}

pub const CURVES_HEADER: &str =
    "method,snr_db,ti_s,vmax_mps,frames,repetitions,mean_floor_db,std_floor_db,mean_output_snr_db,std_output_snr_db\n";

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub ti_s: f64,
    pub vmax_mps: f64,
    pub frames: usize,
    pub point: SweepPoint,
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from(CURVES_HEADER);
    for row in rows {
        let p = &row.point;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            p.method.tag(),
            p.snr_db,
            row.ti_s,
            row.vmax_mps,
            row.frames,
            p.repetitions,
            p.mean_floor_db,
            p.std_floor_db,
            p.mean_output_snr_db,
            p.std_output_snr_db
        );
    }
    s
}

/// Long-format complex matrix: one `row,col,re,im` line per cell.
pub fn matrix_csv(m: &CMatrix) -> String {
    let mut s = String::from("row,col,re,im\n");
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let v = m.get(r, c);
            let _ = writeln!(s, "{r},{c},{},{}", v.re, v.im);
        }
    }
    s
}

/// Reads back a [`matrix_csv`] file.
pub fn parse_matrix_csv(text: &str) -> Result<CMatrix, String> {
    let mut cells = Vec::new();
    let (mut rows, mut cols) = (0, 0);
    for (i, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(format!("line {}: expected 4 fields", i + 1));
        }
        let bad = |_| format!("line {}: malformed number", i + 1);
        let r: usize = f[0]
            .parse()
            .map_err(|_| format!("line {}: bad row", i + 1))?;
        let c: usize = f[1]
            .parse()
            .map_err(|_| format!("line {}: bad column", i + 1))?;
        let v = Complex64::new(f[2].parse().map_err(bad)?, f[3].parse().map_err(bad)?);
        rows = rows.max(r + 1);
        cols = cols.max(c + 1);
        cells.push((r, c, v));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (r, c, v) in cells {
        m.set(r, c, v);
    }
    Ok(m)
}

pub fn layout_csv(layout: &FrameLayout) -> String {
    format!(
        "zone,first_row,end_row\npilot,{},{}\ndata,{},{}\n",
        layout.pilot_rows.start,
        layout.pilot_rows.end,
        layout.data_rows.start,
        layout.data_rows.end
    )
}

pub fn write(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    std::fs::write(dir.join(name), contents)
}
