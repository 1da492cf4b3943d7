//! Pilot-based radar.
//!
//! Targets are treated as channel paths. For RP-OTFS every slow-time column
//! carries the same OFDM pilot symbol behind a full-length cyclic prefix, so a
//! least-squares division of spectra yields one `P`-tap channel impulse
//! response (CIR) per column. Stacking the columns over the whole capture and
//! taking a DFT along each tap row gives the delay-Doppler map. The prefix
//! samples never enter the estimate.
//!
//! The ZP-OTFS estimator is single-frame: it divides the received pilot zone
//! by the known pulse after the Zak transform.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{fft_shift, Fft};
use crate::grid::{zak, GridConfig, SampleStream, TTMatrix};
use crate::matrix::CMatrix;
use crate::modem::{gen_rp_pilot, PilotScheme, TransmitRecord};
use crate::radar_caf::{MapAxes, MapMethod, RadarMap, Window};

/// CIR snapshots: one row per tap, one column per slow-time column.
#[derive(Debug, Clone, PartialEq)]
pub struct CirMatrix {
    pub taps: CMatrix,
    /// Time between consecutive snapshots, `M / fs`.
    pub column_period_s: f64,
    /// Time between consecutive taps, `1 / fs`.
    pub tap_spacing_s: f64,
}

pub fn estimate_cir_rp(rx: &SampleStream, record: &TransmitRecord) -> Result<CirMatrix> {
    let PilotScheme::Rp {
        sym_len,
        pilot_seed,
        ..
    } = record.scheme
    else {
        return Err(Error::InvalidPilot("RP estimator needs an RP scheme"));
    };
    let cfg = &record.grid;
    let columns = cfg.n() * record.frames;
    let need = columns * cfg.m();
    if rx.len() < need {
        return Err(Error::StreamTooShort {
            need,
            got: rx.len(),
        });
    }

    let fft = Fft::new(sym_len)?;
    let pilot = gen_rp_pilot(sym_len, pilot_seed)?;
    let mut spectrum = pilot[sym_len..].to_vec();
    fft.forward(&mut spectrum);
    let inverse_spectrum = spectrum
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if s.norm_sqr() == 0.0 {
                Err(Error::PilotSpectrumZero(i))
            } else {
                Ok(s.inv())
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut taps = CMatrix::zeros(sym_len, columns);
    let mut buf = vec![Complex64::new(0.0, 0.0); sym_len];
    for col in 0..columns {
        let start = col * cfg.m() + sym_len;
        buf.copy_from_slice(&rx.samples[start..start + sym_len]);
        fft.forward(&mut buf);
        for (v, inv) in buf.iter_mut().zip(&inverse_spectrum) {
            *v *= inv;
        }
        fft.inverse(&mut buf);
        for (tap, v) in buf.iter().enumerate() {
            taps.set(tap, col, *v);
        }
    }
    Ok(CirMatrix {
        taps,
        column_period_s: cfg.column_period(),
        tap_spacing_s: 1.0 / cfg.fs(),
    })
}

/// DFT along every tap row, zero-padded to the next power of two of
/// `columns + zero_pad`, with zero Doppler in the middle column.
pub fn cir_to_dd_map(cir: &CirMatrix, zero_pad: usize, window: Window) -> Result<RadarMap> {
    let (rows, cols) = cir.taps.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Empty("CIR matrix"));
    }
    if cir.column_period_s.is_nan() || cir.column_period_s <= 0.0 {
        return Err(Error::InvalidParameter("column period must be positive"));
    }
    let len = (cols + zero_pad).next_power_of_two();
    let fft = Fft::new(len)?;
    let w = window.coefficients(cols);
    let mut magnitude = Vec::with_capacity(rows * len);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for r in 0..rows {
        buf.fill(Complex64::new(0.0, 0.0));
        for (c, (slot, wc)) in buf.iter_mut().zip(&w).enumerate() {
            *slot = cir.taps.get(r, c) * wc;
        }
        fft.forward(&mut buf);
        fft_shift(&mut buf);
        magnitude.extend(buf.iter().map(|v| v.norm()));
    }
    RadarMap::from_magnitudes(
        rows,
        len,
        magnitude,
        MapAxes {
            first_delay_bin: 0,
            first_doppler_bin: -((len / 2) as i64),
            delay_step_s: cir.tap_spacing_s,
            doppler_step_hz: 1.0 / (cir.column_period_s * len as f64),
        },
        MapMethod::Pilot,
    )
}

/// ZP channel estimate in the delay-Doppler domain. Row `i` is the path at
/// `i` samples of delay, column `k` the Doppler bin `k` (mod `N`).
#[derive(Debug, Clone, PartialEq)]
pub struct ZpEstimate {
    pub cells: CMatrix,
    pub grid: GridConfig,
}

/// Divides the received pilot zone, from the pulse row to the end of the
/// zone, by the pulse amplitude. Cells whose received magnitude is more than
/// `threshold_db` below the strongest zone cell are zeroed;
/// `f64::NEG_INFINITY` keeps everything.
pub fn estimate_cir_zp(
    rx_frame: &TTMatrix,
    cfg: &GridConfig,
    scheme: &PilotScheme,
    threshold_db: f64,
) -> Result<ZpEstimate> {
    let PilotScheme::Zp {
        zone_rows,
        pulse_row,
        pulse_amplitude,
    } = *scheme
    else {
        return Err(Error::InvalidPilot("ZP estimator needs a ZP scheme"));
    };
    scheme.validate(cfg)?;
    if pulse_amplitude.norm_sqr() == 0.0 {
        return Err(Error::InvalidPilot("ZP pulse amplitude is zero"));
    }
    let received = zak(cfg, rx_frame)?.into_values();
    let rows = zone_rows - pulse_row;
    let zone = CMatrix::from_fn(rows, cfg.n(), |r, k| received.get(pulse_row + r, k));
    let peak = zone.as_slice().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cutoff = peak * libm::pow(10.0, threshold_db / 20.0);
    let cells = CMatrix::from_fn(rows, cfg.n(), |r, k| {
        let v = zone.get(r, k);
        if v.norm() < cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            v / pulse_amplitude
        }
    });
    Ok(ZpEstimate { cells, grid: *cfg })
}

/// Magnitude map of a ZP estimate with zero Doppler centered.
pub fn zp_to_dd_map(est: &ZpEstimate) -> Result<RadarMap> {
    let (rows, cols) = est.cells.shape();
    let mut magnitude = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let mut row: Vec<f64> = est.cells.row(r).iter().map(|v| v.norm()).collect();
        fft_shift(&mut row);
        magnitude.extend(row);
    }
    RadarMap::from_magnitudes(
        rows,
        cols,
        magnitude,
        MapAxes {
            first_delay_bin: 0,
            first_doppler_bin: -((cols / 2) as i64),
            delay_step_s: 1.0 / est.grid.fs(),
            doppler_step_hz: est.grid.doppler_resolution(1)?,
        },
        MapMethod::ZpPilot,
    )
}
