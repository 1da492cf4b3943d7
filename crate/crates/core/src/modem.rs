//! ZP-OTFS and RP-OTFS frame construction.
//!
//! Data symbols always live in the delay-Doppler domain. A zero-padded (ZP)
//! frame reserves a band of delay rows that stays empty except for a single
//! pilot pulse. A random-padded (RP) frame instead writes a short OFDM symbol
//! with a full-length cyclic prefix straight into the first `2P` fast-time
//! rows of every slow-time column, after the inverse Zak transform.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;
use core::ops::Range;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::grid::{append_frame, inverse_zak, DDMatrix, GridConfig, SampleStream, TTMatrix};

/// Pilot arrangement of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PilotScheme {
    /// Zero-padded: rows `0..zone_rows` of the DD grid are empty except for
    /// one pulse at `(pulse_row, 0)`.
    Zp {
        zone_rows: usize,
        pulse_row: usize,
        pulse_amplitude: Complex64,
    },
    /// Random-padded: an OFDM pilot of `sym_len` samples preceded by a cyclic
    /// prefix of `cp_len` samples occupies fast-time rows `0..cp_len + sym_len`.
    Rp {
        sym_len: usize,
        cp_len: usize,
        pilot_seed: u64,
    },
}

impl PilotScheme {
    /// RP scheme with the prefix as long as the symbol.
    pub fn rp(sym_len: usize, pilot_seed: u64) -> Self {
        PilotScheme::Rp {
            sym_len,
            cp_len: sym_len,
            pilot_seed,
        }
    }

    /// ZP scheme with the pulse in the middle row of the zone.
    pub fn zp(zone_rows: usize, pulse_amplitude: Complex64) -> Self {
        PilotScheme::Zp {
            zone_rows,
            pulse_row: zone_rows / 2,
            pulse_amplitude,
        }
    }

    /// Number of delay rows reserved for pilots (`L`).
    pub fn pilot_rows(&self) -> usize {
        match *self {
            PilotScheme::Zp { zone_rows, .. } => zone_rows,
            PilotScheme::Rp {
                sym_len, cp_len, ..
            } => sym_len + cp_len,
        }
    }

    pub fn validate(&self, cfg: &GridConfig) -> Result<()> {
        match *self {
            PilotScheme::Zp {
                zone_rows,
                pulse_row,
                ..
            } => {
                if zone_rows == 0 || zone_rows >= cfg.m() {
                    return Err(Error::InvalidPilot("ZP zone must leave room for data"));
                }
                if pulse_row >= zone_rows {
                    return Err(Error::InvalidPilot("ZP pulse must sit inside the zone"));
                }
            }
            PilotScheme::Rp {
                sym_len, cp_len, ..
            } => {
                if !sym_len.is_power_of_two() {
                    return Err(Error::NotPowerOfTwo(sym_len));
                }
                if cp_len != sym_len {
                    return Err(Error::InvalidPilot(
                        "RP cyclic prefix must equal the symbol length",
                    ));
                }
                if 2 * sym_len >= cfg.m() {
                    return Err(Error::InvalidPilot(
                        "RP pilot rows must leave room for data",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn layout(&self, cfg: &GridConfig) -> Result<FrameLayout> {
        self.validate(cfg)?;
        let l = self.pilot_rows();
        Ok(FrameLayout {
            pilot_rows: 0..l,
            data_rows: l..cfg.m(),
        })
    }

    /// Data symbols carried by one frame.
    pub fn data_len(&self, cfg: &GridConfig) -> usize {
        cfg.m().saturating_sub(self.pilot_rows()) * cfg.n()
    }
}

/// Partition of the delay rows into pilot and data zones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLayout {
    pub pilot_rows: Range<usize>,
    pub data_rows: Range<usize>,
}

/// Unit-energy 4-QAM symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct QamStream {
    pub symbols: Vec<Complex64>,
    pub seed: Option<u64>,
}

/// Gray-mapped 4-QAM: the first bit selects the in-phase sign, the second the
/// quadrature sign (0 is positive).
pub fn map_bits_to_qam(bits: &[bool]) -> Result<QamStream> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::OddBitCount(bits.len()));
    }
    let sign = |b: bool| if b { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    let symbols = bits
        .chunks_exact(2)
        .map(|pair| Complex64::new(sign(pair[0]), sign(pair[1])))
        .collect();
    Ok(QamStream {
        symbols,
        seed: None,
    })
}

/// `count` uniformly random 4-QAM symbols from sub-stream `stream` of `seed`.
pub fn random_qam(count: usize, seed: u64, stream: u64) -> QamStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let bits: Vec<bool> = (0..2 * count).map(|_| rng.random()).collect();
    let mut qam = map_bits_to_qam(&bits).expect("bit count is even");
    qam.seed = Some(seed);
    qam
}

/// Frequency-domain 4-QAM values carried by the RP pilot symbol.
pub fn rp_pilot_spectrum(sym_len: usize, pilot_seed: u64) -> Result<Vec<Complex64>> {
    if !sym_len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(sym_len));
    }
    Ok(random_qam(sym_len, pilot_seed, 0).symbols)
}

/// Time-domain RP pilot of `2 * sym_len` samples: cyclic prefix followed by
/// the OFDM symbol, the prefix being a full copy of the symbol.
pub fn gen_rp_pilot(sym_len: usize, pilot_seed: u64) -> Result<Vec<Complex64>> {
    let mut symbol = rp_pilot_spectrum(sym_len, pilot_seed)?;
    Fft::new(sym_len)?.inverse(&mut symbol);
    let mut pilot = Vec::with_capacity(2 * sym_len);
    pilot.extend_from_slice(&symbol);
    pilot.extend_from_slice(&symbol);
    Ok(pilot)
}

/// One frame in both domains.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub dd: DDMatrix,
    pub tt: TTMatrix,
    pub layout: FrameLayout,
}

fn fill_data_zone(cfg: &GridConfig, data: &QamStream, first_row: usize) -> Result<DDMatrix> {
    let zone_rows = cfg.m() - first_row;
    let expected = zone_rows * cfg.n();
    if data.symbols.len() != expected {
        return Err(Error::DataLength {
            expected,
            got: data.symbols.len(),
        });
    }
    let mut dd = DDMatrix::zeros(cfg);
    let values = dd.values_mut();
    for (i, &s) in data.symbols.iter().enumerate() {
        values.set(first_row + i % zone_rows, i / zone_rows, s);
    }
    Ok(dd)
}

pub fn build_rp_frame(data: &QamStream, cfg: &GridConfig, scheme: &PilotScheme) -> Result<Frame> {
    let PilotScheme::Rp {
        sym_len,
        pilot_seed,
        ..
    } = *scheme
    else {
        return Err(Error::InvalidPilot("expected an RP scheme"));
    };
    let layout = scheme.layout(cfg)?;
    let pilot = gen_rp_pilot(sym_len, pilot_seed)?;
    let dd = fill_data_zone(cfg, data, layout.data_rows.start)?;
    let mut tt = inverse_zak(cfg, &dd)?;
    write_pilot_rows(tt.values_mut(), &pilot);
    Ok(Frame { dd, tt, layout })
}

fn write_pilot_rows(tt: &mut crate::matrix::CMatrix, pilot: &[Complex64]) {
    for col in 0..tt.cols() {
        for (row, &p) in pilot.iter().enumerate() {
            tt.set(row, col, p);
        }
    }
}

pub fn build_zp_frame(data: &QamStream, cfg: &GridConfig, scheme: &PilotScheme) -> Result<Frame> {
    let PilotScheme::Zp {
        pulse_row,
        pulse_amplitude,
        ..
    } = *scheme
    else {
        return Err(Error::InvalidPilot("expected a ZP scheme"));
    };
    let layout = scheme.layout(cfg)?;
    let mut dd = fill_data_zone(cfg, data, layout.data_rows.start)?;
    dd.values_mut().set(pulse_row, 0, pulse_amplitude);
    let tt = inverse_zak(cfg, &dd)?;
    Ok(Frame { dd, tt, layout })
}

pub fn build_frame(data: &QamStream, cfg: &GridConfig, scheme: &PilotScheme) -> Result<Frame> {
    match scheme {
        PilotScheme::Zp { .. } => build_zp_frame(data, cfg, scheme),
        PilotScheme::Rp { .. } => build_rp_frame(data, cfg, scheme),
    }
}

/// What the receiver knows about a transmitted capture.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitRecord {
    pub grid: GridConfig,
    pub scheme: PilotScheme,
    pub frames: usize,
    pub data_seed: u64,
    pub layout: FrameLayout,
}

impl TransmitRecord {
    /// Data symbols of frame `index`.
    pub fn frame_data(&self, index: usize) -> QamStream {
        random_qam(
            self.scheme.data_len(&self.grid),
            self.data_seed,
            index as u64,
        )
    }

    /// Rebuilds frame `index` exactly as it was transmitted.
    pub fn frame(&self, index: usize) -> Result<Frame> {
        build_frame(&self.frame_data(index), &self.grid, &self.scheme)
    }
}

/// A serialized multi-frame transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    pub stream: SampleStream,
    pub record: TransmitRecord,
}

/// Builds `frames` consecutive frames. Every frame draws its data from its own
/// sub-stream of `data_seed`; the pilot is the same in all of them.
pub fn build_capture(
    cfg: &GridConfig,
    scheme: &PilotScheme,
    frames: usize,
    data_seed: u64,
) -> Result<Capture> {
    if frames == 0 {
        return Err(Error::InvalidParameter(
            "a capture needs at least one frame",
        ));
    }
    let record = TransmitRecord {
        grid: *cfg,
        scheme: *scheme,
        frames,
        data_seed,
        layout: scheme.layout(cfg)?,
    };
    let mut samples = Vec::with_capacity(frames * cfg.frame_len());
    for k in 0..frames {
        append_frame(record.frame(k)?.tt.values(), &mut samples);
    }
    Ok(Capture {
        stream: SampleStream::new(samples, cfg.fs()),
        record,
    })
}

/// Zero-valued data for a scheme, handy for inspecting pilots alone.
pub fn zero_data(cfg: &GridConfig, scheme: &PilotScheme) -> QamStream {
    QamStream {
        symbols: vec![Complex64::new(0.0, 0.0); scheme.data_len(cfg)],
        seed: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{serialize, zak};
    use crate::matrix::CMatrix;

    fn paper_grid() -> GridConfig {
        GridConfig::new(64, 256, 20e6, 4e9).unwrap()
    }

    #[test]
    fn gray_table() {
        let h = FRAC_1_SQRT_2;
        let q = map_bits_to_qam(&[false, false, false, true, true, true, true, false]).unwrap();
        assert_eq!(
            q.symbols,
            vec![
                Complex64::new(h, h),
                Complex64::new(h, -h),
                Complex64::new(-h, -h),
                Complex64::new(-h, h)
            ]
        );
        assert!((q.symbols[0].re - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(map_bits_to_qam(&[true]).unwrap_err(), Error::OddBitCount(1));
    }

    #[test]
    fn random_qam_symbols_have_unit_energy() {
        let q = random_qam(4, 1, 0);
        assert_eq!(q.symbols.len(), 4);
        for s in &q.symbols {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn random_qam_mean_energy_and_balance() {
        // Monte Carlo over 1e5 symbols; mean energy is exactly 1 for this
        // constellation, the quadrant balance is the non-trivial part.
        let q = random_qam(100_000, 42, 0);
        let energy: f64 = q.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / 1e5;
        assert!((energy - 1.0).abs() < 0.01);
        let mean: Complex64 = q.symbols.iter().sum::<Complex64>() / 1e5;
        assert!(mean.norm() < 0.01);
    }

    #[test]
    fn pilot_prefix_is_full_copy() {
        let p = gen_rp_pilot(8, 3).unwrap();
        assert_eq!(p.len(), 16);
        assert_eq!(p[..8], p[8..]);
    }

    #[test]
    fn pilot_is_deterministic() {
        assert_eq!(gen_rp_pilot(8, 77).unwrap(), gen_rp_pilot(8, 77).unwrap());
        assert_ne!(gen_rp_pilot(8, 77).unwrap(), gen_rp_pilot(8, 78).unwrap());
        assert_eq!(gen_rp_pilot(6, 1).unwrap_err(), Error::NotPowerOfTwo(6));
    }

    #[test]
    fn pilot_symbol_spectrum_is_the_seeded_qam() {
        let p = gen_rp_pilot(8, 5).unwrap();
        let mut sym = p[8..].to_vec();
        Fft::new(8).unwrap().forward(&mut sym);
        let qam = rp_pilot_spectrum(8, 5).unwrap();
        for (a, b) in sym.iter().zip(&qam) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn rp_scheme_validation() {
        let cfg = paper_grid();
        assert!(PilotScheme::rp(8, 0).validate(&cfg).is_ok());
        assert!(PilotScheme::rp(32, 0).validate(&cfg).is_err());
        let bad_cp = PilotScheme::Rp {
            sym_len: 8,
            cp_len: 4,
            pilot_seed: 0,
        };
        assert!(bad_cp.validate(&cfg).is_err());
        assert_eq!(PilotScheme::rp(8, 0).pilot_rows(), 16);
    }

    #[test]
    fn rp_frame_data_length() {
        let cfg = paper_grid();
        let scheme = PilotScheme::rp(8, 1);
        assert_eq!(scheme.data_len(&cfg), 12288);
        let short = random_qam(12287, 0, 0);
        assert_eq!(
            build_rp_frame(&short, &cfg, &scheme).unwrap_err(),
            Error::DataLength {
                expected: 12288,
                got: 12287
            }
        );
        assert!(build_rp_frame(&random_qam(12288, 0, 0), &cfg, &scheme).is_ok());
    }

    #[test]
    fn rp_frame_with_zero_data_only_has_pilot_rows() {
        let cfg = paper_grid();
        let scheme = PilotScheme::rp(8, 1);
        let frame = build_rp_frame(&zero_data(&cfg, &scheme), &cfg, &scheme).unwrap();
        let pilot = gen_rp_pilot(8, 1).unwrap();
        for c in 0..cfg.n() {
            for r in 0..cfg.m() {
                let v = frame.tt.values().get(r, c);
                if let Some(&p) = pilot.get(r) {
                    assert_eq!(v, p);
                } else {
                    assert_eq!(v, Complex64::new(0.0, 0.0));
                }
            }
        }
        assert_eq!(frame.layout.pilot_rows, 0..16);
        assert_eq!(frame.layout.data_rows, 16..64);
    }

    #[test]
    fn rp_frame_data_survives_pilot_overwrite() {
        let cfg = paper_grid();
        let scheme = PilotScheme::rp(8, 9);
        let frame = build_rp_frame(&random_qam(12288, 4, 0), &cfg, &scheme).unwrap();
        let mut tt = frame.tt.clone();
        for r in 0..16 {
            tt.values_mut().row_mut(r).fill(Complex64::new(0.0, 0.0));
        }
        let dd = zak(&cfg, &tt).unwrap();
        assert!(dd.values().max_abs_diff(frame.dd.values()) < 1e-12);
    }

    #[test]
    fn zp_frame_has_single_pilot_cell() {
        let cfg = paper_grid();
        let amp = Complex64::new(0.5, -2.0);
        let scheme = PilotScheme::zp(16, amp);
        let frame = build_zp_frame(&random_qam(48 * 256, 2, 0), &cfg, &scheme).unwrap();
        let mut nonzero = Vec::new();
        for r in 0..16 {
            for k in 0..256 {
                if frame.dd.values().get(r, k) != Complex64::new(0.0, 0.0) {
                    nonzero.push((r, k));
                }
            }
        }
        assert_eq!(nonzero, vec![(8, 0)]);
        assert_eq!(frame.dd.values().get(8, 0), amp);
        let zone_energy: f64 = (0..16)
            .map(|r| {
                frame
                    .tt
                    .values()
                    .row(r)
                    .iter()
                    .map(|v| v.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        assert!((zone_energy - amp.norm_sqr() / 256.0).abs() < 1e-14);
    }

    #[test]
    fn zp_frame_pulse_row_is_flat_in_time() {
        let cfg = paper_grid();
        let scheme = PilotScheme::zp(16, Complex64::new(1.0, 0.0));
        let frame = build_zp_frame(&zero_data(&cfg, &scheme), &cfg, &scheme).unwrap();
        for r in 0..64 {
            for c in 0..256 {
                let expected = if r == 8 { 1.0 / 256.0 } else { 0.0 };
                assert!(
                    (frame.tt.values().get(r, c) - Complex64::new(expected, 0.0)).norm() < 1e-15
                );
            }
        }
    }

    #[test]
    fn wrong_scheme_is_rejected() {
        let cfg = paper_grid();
        let zp = PilotScheme::zp(16, Complex64::new(1.0, 0.0));
        assert!(build_rp_frame(&zero_data(&cfg, &zp), &cfg, &zp).is_err());
    }

    #[test]
    fn capture_length_and_duration() {
        let cfg = paper_grid();
        let cap = build_capture(&cfg, &PilotScheme::rp(8, 1), 122, 7).unwrap();
        assert_eq!(cap.stream.len(), 1_998_848);
        assert!((cap.stream.duration() - 0.0999424).abs() < 1e-12);
        assert!(build_capture(&cfg, &PilotScheme::rp(8, 1), 0, 7).is_err());
    }

    #[test]
    fn single_frame_capture_matches_frame_serialization() {
        let cfg = paper_grid();
        let scheme = PilotScheme::rp(8, 1);
        let cap = build_capture(&cfg, &scheme, 1, 7).unwrap();
        let frame = build_rp_frame(&random_qam(12288, 7, 0), &cfg, &scheme).unwrap();
        assert_eq!(cap.stream, serialize(&cfg, &[frame.tt]).unwrap());
    }

    #[test]
    fn capture_is_reproducible_and_frames_differ() {
        let cfg = GridConfig::new(16, 16, 1e6, 1e9).unwrap();
        let scheme = PilotScheme::rp(4, 3);
        let a = build_capture(&cfg, &scheme, 3, 11).unwrap();
        let b = build_capture(&cfg, &scheme, 3, 11).unwrap();
        assert_eq!(a, b);
        let frames = crate::grid::deserialize(&cfg, &a.stream).unwrap();
        assert_ne!(frames[0], frames[1]);
        let pilot = gen_rp_pilot(4, 3).unwrap();
        for f in &frames {
            for c in 0..16 {
                for (r, p) in pilot.iter().enumerate() {
                    assert_eq!(f.values().get(r, c), *p);
                }
            }
        }
    }

    #[test]
    fn data_zone_mean_power_is_one() {
        let cfg = paper_grid();
        let scheme = PilotScheme::rp(8, 1);
        let frame = build_rp_frame(&random_qam(12288, 3, 0), &cfg, &scheme).unwrap();
        let zone: CMatrix = CMatrix::from_fn(48, 256, |r, c| frame.dd.values().get(r + 16, c));
        assert!((zone.energy() / (48.0 * 256.0) - 1.0).abs() < 1e-12);
    }
}
