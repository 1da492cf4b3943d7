//! Correlation radar: the cross-ambiguity function (CAF) between the known
//! transmitted stream and the received stream.
//!
//! For a delay `d` and Doppler bin `k` the map holds
//! `|sum_t srv[t] conj(ref[t - d]) w[t] exp(-j 2 pi k t / T')|`, where `T'` is
//! the capture length rounded up to a power-of-two number of blocks. The sum is
//! evaluated exactly by splitting time as `t = b * block + m`: one FFT over the
//! block index `b` per phase `m`, followed by a twiddle-weighted sum over `m`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::grid::SampleStream;

/// Magnitudes below this are reported as this many dB.
pub const MIN_DB: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapMethod {
    Caf,
    Pilot,
    ZpPilot,
}

impl MapMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            MapMethod::Caf => "caf",
            MapMethod::Pilot => "pilot",
            MapMethod::ZpPilot => "zp_pilot",
        }
    }
}

/// Slow-time taper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    None,
    Hann,
}

impl Window {
    pub fn coefficients(&self, len: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|i| {
                    let s = libm::sin(PI * (i as f64 + 0.5) / len as f64);
                    s * s
                })
                .collect(),
        }
    }
}

/// Delay-Doppler magnitude map normalized to a unit (0 dB) peak.
///
/// Rows are delay bins starting at `first_delay_bin`, columns are Doppler bins
/// starting at `first_doppler_bin` (negative, so zero Doppler sits in the
/// middle column).
#[derive(Debug, Clone, PartialEq)]
pub struct RadarMap {
    rows: usize,
    cols: usize,
    magnitude: Vec<f64>,
    pub first_delay_bin: i64,
    pub first_doppler_bin: i64,
    pub delay_step_s: f64,
    pub doppler_step_hz: f64,
    /// Linear magnitude of the peak before normalization.
    pub peak_scale: f64,
    pub method: MapMethod,
}

/// Axis description used to assemble a [`RadarMap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapAxes {
    pub first_delay_bin: i64,
    pub first_doppler_bin: i64,
    pub delay_step_s: f64,
    pub doppler_step_hz: f64,
}

impl RadarMap {
    /// Normalizes raw magnitudes (row-major) to a unit peak.
    pub fn from_magnitudes(
        rows: usize,
        cols: usize,
        mut magnitude: Vec<f64>,
        axes: MapAxes,
        method: MapMethod,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || magnitude.len() != rows * cols {
            return Err(Error::Empty("radar map"));
        }
        if magnitude.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "map magnitudes must be finite and non-negative",
            ));
        }
        let peak = magnitude.iter().copied().fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(Error::ZeroPower);
        }
        for v in magnitude.iter_mut() {
            *v /= peak;
        }
        Ok(Self {
            rows,
            cols,
            magnitude,
            first_delay_bin: axes.first_delay_bin,
            first_doppler_bin: axes.first_doppler_bin,
            delay_step_s: axes.delay_step_s,
            doppler_step_hz: axes.doppler_step_hz,
            peak_scale: peak,
            method,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn axes(&self) -> MapAxes {
        MapAxes {
            first_delay_bin: self.first_delay_bin,
            first_doppler_bin: self.first_doppler_bin,
            delay_step_s: self.delay_step_s,
            doppler_step_hz: self.doppler_step_hz,
        }
    }

    /// Normalized linear magnitude, peak = 1.
    pub fn magnitude(&self, row: usize, col: usize) -> f64 {
        self.magnitude[row * self.cols + col]
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitude
    }

    /// `20 log10` of the normalized magnitude, floored at [`MIN_DB`].
    pub fn magnitude_db(&self, row: usize, col: usize) -> f64 {
        to_db(self.magnitude(row, col))
    }

    pub fn delay_bin(&self, row: usize) -> i64 {
        self.first_delay_bin + row as i64
    }

    pub fn doppler_bin(&self, col: usize) -> i64 {
        self.first_doppler_bin + col as i64
    }

    pub fn doppler_hz(&self, col: usize) -> f64 {
        self.doppler_bin(col) as f64 * self.doppler_step_hz
    }

    pub fn row_of_delay(&self, delay_bin: i64) -> Option<usize> {
        let r = delay_bin - self.first_delay_bin;
        (0..self.rows as i64).contains(&r).then_some(r as usize)
    }

    /// Column whose Doppler frequency is closest to `hz`, if inside the map.
    pub fn col_of_doppler_hz(&self, hz: f64) -> Option<usize> {
        let bin = libm::round(hz / self.doppler_step_hz) as i64;
        let c = bin - self.first_doppler_bin;
        (0..self.cols as i64).contains(&c).then_some(c as usize)
    }

    /// Keeps only the columns with `|f| <= max_hz`. The cropped map keeps the
    /// original normalization.
    pub fn crop_doppler(&self, max_hz: f64) -> RadarMap {
        let keep: Vec<usize> = (0..self.cols)
            .filter(|&c| libm::fabs(self.doppler_hz(c)) <= max_hz)
            .collect();
        if keep.is_empty() {
            return self.clone();
        }
        let first = keep[0];
        let cols = keep.len();
        let mut magnitude = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            magnitude.extend_from_slice(
                &self.magnitude[r * self.cols + first..r * self.cols + first + cols],
            );
        }
        RadarMap {
            rows: self.rows,
            cols,
            magnitude,
            first_doppler_bin: self.doppler_bin(first),
            ..self.clone()
        }
    }
}

pub fn to_db(magnitude: f64) -> f64 {
    if magnitude <= 0.0 {
        return MIN_DB;
    }
    (20.0 * libm::log10(magnitude)).max(MIN_DB)
}

/// CAF evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CafConfig {
    /// Delay of the first map row, in samples (may be negative).
    pub first_delay: i64,
    pub n_delay: usize,
    /// Number of Doppler bins, centered on zero.
    pub n_doppler: usize,
    /// Segment length used for the slow-time decomposition, normally `M`.
    pub block_len: usize,
    /// Doppler zero-padding factor (power of two, 1 = none).
    pub oversample: usize,
    pub window: Window,
}

impl CafConfig {
    /// Geometry of the Doppler grid for a capture of `len` samples:
    /// `(blocks rounded up to a power of two times the oversampling,
    /// padded length T')`.
    pub fn padded_len(&self, len: usize) -> (usize, usize) {
        let blocks = len.div_ceil(self.block_len).next_power_of_two() * self.oversample.max(1);
        (blocks, blocks * self.block_len)
    }

    /// Largest `n_doppler` a capture of `len` samples supports.
    pub fn max_doppler_bins(&self, len: usize) -> usize {
        self.padded_len(len).0
    }
}

/// Doppler bin indices `-n/2 .. n - n/2`.
fn doppler_bins(n_doppler: usize) -> impl Iterator<Item = i64> {
    let half = (n_doppler / 2) as i64;
    (0..n_doppler as i64).map(move |i| i - half)
}

pub fn compute_caf(
    reference: &SampleStream,
    surveillance: &SampleStream,
    cfg: &CafConfig,
) -> Result<RadarMap> {
    let len = reference.len();
    if len != surveillance.len() {
        return Err(Error::LengthMismatch {
            reference: len,
            surveillance: surveillance.len(),
        });
    }
    if len == 0 {
        return Err(Error::Empty("CAF input"));
    }
    if cfg.block_len == 0 || cfg.n_delay == 0 || cfg.n_doppler == 0 {
        return Err(Error::InvalidParameter("CAF dimensions must be positive"));
    }
    if !cfg.oversample.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(cfg.oversample));
    }
    if cfg.n_delay > cfg.block_len {
        return Err(Error::InvalidParameter("CAF delay span exceeds one block"));
    }
    let (blocks, padded) = cfg.padded_len(len);
    if cfg.n_doppler > blocks {
        return Err(Error::DopplerSpan {
            requested: cfg.n_doppler,
            supported: blocks,
        });
    }

    let fft = Fft::new(blocks)?;
    let window = cfg.window.coefficients(len);
    let bins: Vec<i64> = doppler_bins(cfg.n_doppler).collect();
    let wrapped: Vec<usize> = bins
        .iter()
        .map(|&k| k.rem_euclid(blocks as i64) as usize)
        .collect();
    let step: Vec<Complex64> = bins
        .iter()
        .map(|&k| {
            let theta = -2.0 * PI * k as f64 / padded as f64;
            Complex64::new(libm::cos(theta), libm::sin(theta))
        })
        .collect();

    let block = cfg.block_len;
    let mut magnitude = Vec::with_capacity(cfg.n_delay * cfg.n_doppler);
    let mut segment = vec![Complex64::new(0.0, 0.0); blocks];
    let mut acc = vec![Complex64::new(0.0, 0.0); cfg.n_doppler];
    let mut twiddle = vec![Complex64::new(0.0, 0.0); cfg.n_doppler];

    for row in 0..cfg.n_delay {
        let delay = cfg.first_delay + row as i64;
        acc.fill(Complex64::new(0.0, 0.0));
        twiddle.fill(Complex64::new(1.0, 0.0));
        for m in 0..block {
            segment.fill(Complex64::new(0.0, 0.0));
            for (b, slot) in segment.iter_mut().enumerate() {
                let t = b * block + m;
                if t >= len {
                    break;
                }
                let src = t as i64 - delay;
                if src < 0 || src >= len as i64 {
                    continue;
                }
                *slot =
                    surveillance.samples[t] * reference.samples[src as usize].conj() * window[t];
            }
            fft.forward(&mut segment);
            for i in 0..cfg.n_doppler {
                acc[i] += twiddle[i] * segment[wrapped[i]];
                twiddle[i] *= step[i];
            }
        }
        magnitude.extend(acc.iter().map(|v| v.norm()));
    }

    RadarMap::from_magnitudes(
        cfg.n_delay,
        cfg.n_doppler,
        magnitude,
        MapAxes {
            first_delay_bin: cfg.first_delay,
            first_doppler_bin: -((cfg.n_doppler / 2) as i64),
            delay_step_s: 1.0 / reference.fs,
            doppler_step_hz: reference.fs / padded as f64,
        },
        MapMethod::Caf,
    )
}
