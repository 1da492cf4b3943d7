//! Delay-Doppler grid geometry, the Zak transform pair and frame
//! serialization.
//!
//! A frame is an `M x N` matrix. Rows index delay (fast time) and columns
//! index Doppler (slow time). The Zak transform is a length-`N` DFT along each
//! row; the inverse is the matching IDFT with the `1/N` factor. Rows never mix,
//! which is what lets pilots be written straight into fast-time rows without
//! touching the data rows.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::matrix::CMatrix;
use crate::SPEED_OF_LIGHT;

/// Grid geometry and radio constants shared by every stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    m: usize,
    n: usize,
    fs: f64,
    fc: f64,
}

impl GridConfig {
    /// `m` delay bins, `n` Doppler bins, sampling rate `fs` and carrier `fc`
    /// in Hz. Both dimensions must be powers of two and at least 2.
    pub fn new(m: usize, n: usize, fs: f64, fc: f64) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::InvalidGrid("M and N must be at least 2"));
        }
        if !m.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m));
        }
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::InvalidGrid("sampling rate must be positive"));
        }
        if !(fc > 0.0 && fc.is_finite()) {
            return Err(Error::InvalidGrid("carrier frequency must be positive"));
        }
        Ok(Self { m, n, fs, fc })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn fc(&self) -> f64 {
        self.fc
    }

    /// Samples per frame, `M * N`.
    pub fn frame_len(&self) -> usize {
        self.m * self.n
    }

    pub fn frame_duration(&self) -> f64 {
        self.frame_len() as f64 / self.fs
    }

    /// Time between two slow-time columns, `M / fs`.
    pub fn column_period(&self) -> f64 {
        self.m as f64 / self.fs
    }

    /// Largest unambiguous Doppler shift, `fs / (2 M)`.
    pub fn max_doppler(&self) -> f64 {
        self.fs / (2.0 * self.m as f64)
    }

    /// Doppler bin width after coherently processing `frames` frames:
    /// `fs / (M N frames)`.
    pub fn doppler_resolution(&self, frames: usize) -> Result<f64> {
        if frames == 0 {
            return Err(Error::InvalidParameter("frame count must be at least 1"));
        }
        Ok(self.fs / (self.m as f64 * self.n as f64 * frames as f64))
    }

    /// Whole frames that best fill `seconds` of observation time.
    pub fn frames_for_duration(&self, seconds: f64) -> usize {
        libm::round(seconds / self.frame_duration()) as usize
    }

    /// Converts a delay bin (`0..M`) and a signed Doppler bin on the
    /// `frames`-frame grid into monostatic range and radial velocity.
    pub fn bin_to_physical(
        &self,
        delay_bin: usize,
        doppler_bin: i64,
        frames: usize,
    ) -> Result<(f64, f64)> {
        let span = (self.n * frames.max(1)) as i64;
        if delay_bin >= self.m || doppler_bin < -span / 2 || doppler_bin >= span - span / 2 {
            return Err(Error::BinOutOfRange {
                delay: delay_bin as i64,
                doppler: doppler_bin,
            });
        }
        let doppler_hz = doppler_bin as f64 * self.doppler_resolution(frames)?;
        Ok((
            delay_to_range(delay_bin as f64 / self.fs),
            doppler_to_velocity(doppler_hz, self.fc),
        ))
    }
}

/// `fs / (2 m)` for arbitrary `m >= 2`; does not require a power of two.
pub fn max_doppler(fs: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidGrid("M must be at least 2"));
    }
    if fs.is_nan() || fs <= 0.0 {
        return Err(Error::InvalidGrid("sampling rate must be positive"));
    }
    Ok(fs / (2.0 * m as f64))
}

/// Two-way range for a round-trip delay in seconds.
pub fn delay_to_range(delay_s: f64) -> f64 {
    delay_s * SPEED_OF_LIGHT / 2.0
}

/// Radial velocity for a two-way Doppler shift.
pub fn doppler_to_velocity(doppler_hz: f64, fc: f64) -> f64 {
    doppler_hz * SPEED_OF_LIGHT / (2.0 * fc)
}

/// Two-way Doppler shift of a reflector moving at `velocity_mps`.
pub fn velocity_to_doppler(velocity_mps: f64, fc: f64) -> f64 {
    2.0 * velocity_mps * fc / SPEED_OF_LIGHT
}

fn check_shape(cfg: &GridConfig, values: &CMatrix) -> Result<()> {
    if values.shape() != (cfg.m, cfg.n) {
        return Err(Error::ShapeMismatch {
            expected_rows: cfg.m,
            expected_cols: cfg.n,
            rows: values.rows(),
            cols: values.cols(),
        });
    }
    Ok(())
}

macro_rules! grid_matrix {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(CMatrix);

        impl $name {
            pub fn new(cfg: &GridConfig, values: CMatrix) -> Result<Self> {
                check_shape(cfg, &values)?;
                Ok(Self(values))
            }

            pub fn zeros(cfg: &GridConfig) -> Self {
                Self(CMatrix::zeros(cfg.m, cfg.n))
            }

            pub fn values(&self) -> &CMatrix {
                &self.0
            }

            pub fn values_mut(&mut self) -> &mut CMatrix {
                &mut self.0
            }

            pub fn into_values(self) -> CMatrix {
                self.0
            }
        }
    };
}

grid_matrix!(
    /// Delay (rows) by Doppler (columns) matrix.
    DDMatrix
);
grid_matrix!(
    /// Fast-time (rows) by slow-time (columns) matrix.
    TTMatrix
);

fn transform_rows(cfg: &GridConfig, values: &CMatrix, inverse: bool) -> Result<CMatrix> {
    check_shape(cfg, values)?;
    let fft = Fft::new(cfg.n)?;
    let mut out = values.clone();
    for r in 0..cfg.m {
        let row = out.row_mut(r);
        if inverse {
            fft.inverse(row);
        } else {
            fft.forward(row);
        }
    }
    Ok(out)
}

/// Row-wise length-`N` IDFT (with `1/N`): delay-Doppler to fast/slow time.
pub fn inverse_zak(cfg: &GridConfig, dd: &DDMatrix) -> Result<TTMatrix> {
    transform_rows(cfg, &dd.0, true).map(TTMatrix)
}

/// Row-wise unnormalized length-`N` DFT: fast/slow time to delay-Doppler.
pub fn zak(cfg: &GridConfig, tt: &TTMatrix) -> Result<DDMatrix> {
    transform_rows(cfg, &tt.0, false).map(DDMatrix)
}

/// Contiguous complex baseband samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    pub samples: Vec<Complex64>,
    pub fs: f64,
}

impl SampleStream {
    pub fn new(samples: Vec<Complex64>, fs: f64) -> Self {
        Self { samples, fs }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    /// Mean of `|x|^2`, zero for an empty stream.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

/// Emits frames in order, each column by column: the `M` fast-time samples of
/// slow-time column 0, then column 1, and so on.
pub fn serialize(cfg: &GridConfig, frames: &[TTMatrix]) -> Result<SampleStream> {
    if frames.is_empty() {
        return Err(Error::Empty("no frames to serialize"));
    }
    let mut samples = Vec::with_capacity(frames.len() * cfg.frame_len());
    for frame in frames {
        check_shape(cfg, &frame.0)?;
        append_frame(&frame.0, &mut samples);
    }
    Ok(SampleStream::new(samples, cfg.fs))
}

pub(crate) fn append_frame(values: &CMatrix, out: &mut Vec<Complex64>) {
    for c in 0..values.cols() {
        for r in 0..values.rows() {
            out.push(values.get(r, c));
        }
    }
}

/// Inverse of [`serialize`]. The stream length must be a whole number of
/// frames.
pub fn deserialize(cfg: &GridConfig, stream: &SampleStream) -> Result<Vec<TTMatrix>> {
    let frame_len = cfg.frame_len();
    if stream.is_empty() {
        return Err(Error::Empty("empty sample stream"));
    }
    if !stream.len().is_multiple_of(frame_len) {
        return Err(Error::StreamTooShort {
            need: (stream.len() / frame_len + 1) * frame_len,
            got: stream.len(),
        });
    }
    Ok(stream
        .samples
        .chunks_exact(frame_len)
        .map(|chunk| TTMatrix(frame_from_columns(cfg, chunk)))
        .collect())
}

pub(crate) fn frame_from_columns(cfg: &GridConfig, chunk: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(cfg.m, cfg.n, |r, c| chunk[c * cfg.m + r])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_validation() {
        assert!(GridConfig::new(64, 256, 20e6, 4e9).is_ok());
        assert!(matches!(
            GridConfig::new(1, 256, 20e6, 4e9),
            Err(Error::InvalidGrid(_))
        ));
        assert_eq!(
            GridConfig::new(48, 256, 20e6, 4e9),
            Err(Error::NotPowerOfTwo(48))
        );
        assert!(GridConfig::new(64, 256, 0.0, 4e9).is_err());
        assert!(GridConfig::new(64, 256, 20e6, -1.0).is_err());
    }

    #[test]
    fn inverse_zak_of_zero_is_zero() {
        let cfg = GridConfig::new(8, 16, 1e6, 1e9).unwrap();
        let tt = inverse_zak(&cfg, &DDMatrix::zeros(&cfg)).unwrap();
        assert_eq!(tt.values().energy(), 0.0);
    }

    #[test]
    fn inverse_zak_of_impulse_is_a_single_row_tone() {
        let cfg = GridConfig::new(8, 16, 1e6, 1e9).unwrap();
        let mut dd = DDMatrix::zeros(&cfg);
        dd.values_mut().set(3, 5, c(1.0, 0.0));
        let tt = inverse_zak(&cfg, &dd).unwrap();
        for r in 0..8 {
            for n in 0..16 {
                let expected = if r == 3 {
                    let theta = 2.0 * PI * 5.0 * n as f64 / 16.0;
                    c(theta.cos(), theta.sin()) / 16.0
                } else {
                    c(0.0, 0.0)
                };
                assert!((tt.values().get(r, n) - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn inverse_zak_matches_direct_idft() {
        let cfg = GridConfig::new(8, 8, 1e6, 1e9).unwrap();
        let x = random_matrix(8, 8, 11);
        let tt = inverse_zak(&cfg, &DDMatrix::new(&cfg, x.clone()).unwrap()).unwrap();
        // Brute-force O(M N^2) evaluation.
        for l in 0..8 {
            for n in 0..8 {
                let mut acc = c(0.0, 0.0);
                for k in 0..8 {
                    let theta = 2.0 * PI * (k * n) as f64 / 8.0;
                    acc += x.get(l, k) * c(theta.cos(), theta.sin());
                }
                acc /= 8.0;
                let got = tt.values().get(l, n);
                assert!((got - acc).norm() <= 1e-10 * acc.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn zak_of_constant_row_is_dc_impulse() {
        let cfg = GridConfig::new(2, 16, 1e6, 1e9).unwrap();
        let mut tt = TTMatrix::zeros(&cfg);
        tt.values_mut().row_mut(0).fill(c(1.0, 0.0));
        let dd = zak(&cfg, &tt).unwrap();
        assert!((dd.values().get(0, 0) - c(16.0, 0.0)).norm() < 1e-12);
        for k in 1..16 {
            assert!(dd.values().get(0, k).norm() < 1e-12);
        }
    }

    #[test]
    fn zak_parseval() {
        let cfg = GridConfig::new(16, 32, 1e6, 1e9).unwrap();
        let x = random_matrix(16, 32, 5);
        let dd = zak(&cfg, &TTMatrix::new(&cfg, x.clone()).unwrap()).unwrap();
        let direct: f64 = x.as_slice().iter().map(|v| v.re * v.re + v.im * v.im).sum();
        let rel = (dd.values().energy() - 32.0 * direct).abs() / (32.0 * direct);
        assert!(rel < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let cfg = GridConfig::new(8, 16, 1e6, 1e9).unwrap();
        let err = DDMatrix::new(&cfg, CMatrix::zeros(8, 8)).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { cols: 8, .. }));
    }

    #[test]
    fn max_doppler_values() {
        let hz = max_doppler(50e6, 1190).unwrap();
        assert!((hz - 21008.403361344).abs() < 1e-9);
        assert_eq!(max_doppler(20e6, 64).unwrap(), 156_250.0);
        assert!(max_doppler(2.0, 1).is_err());
        let cfg = GridConfig::new(64, 256, 20e6, 4e9).unwrap();
        assert_eq!(cfg.max_doppler(), 156_250.0);
    }

    #[test]
    fn doppler_resolution_values() {
        let cfg = GridConfig::new(64, 256, 20e6, 4e9).unwrap();
        assert!((cfg.doppler_resolution(1).unwrap() - 1220.703125).abs() < 1e-9);
        assert!((cfg.doppler_resolution(122).unwrap() - 10.005763319672).abs() < 1e-9);
        assert_eq!(
            cfg.doppler_resolution(10).unwrap(),
            2.0 * cfg.doppler_resolution(20).unwrap()
        );
        assert!(cfg.doppler_resolution(0).is_err());
        assert_eq!(cfg.frames_for_duration(0.1), 122);
    }

    #[test]
    fn serialize_is_column_major() {
        let cfg = GridConfig::new(2, 2, 1.0, 1.0).unwrap();
        let (a, b, cc, d) = (c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0));
        let frame =
            TTMatrix::new(&cfg, CMatrix::from_vec(2, 2, vec![a, cc, b, d]).unwrap()).unwrap();
        let stream = serialize(&cfg, core::slice::from_ref(&frame)).unwrap();
        assert_eq!(stream.samples, vec![a, b, cc, d]);
        let two = serialize(&cfg, &[frame.clone(), frame]).unwrap();
        assert_eq!(two.len(), 8);
        assert!(serialize(&cfg, &[]).is_err());
    }

    #[test]
    fn deserialize_rejects_partial_frames() {
        let cfg = GridConfig::new(2, 2, 1.0, 1.0).unwrap();
        let stream = SampleStream::new(vec![c(0.0, 0.0); 6], 1.0);
        assert!(matches!(
            deserialize(&cfg, &stream),
            Err(Error::StreamTooShort { .. })
        ));
    }

    #[test]
    fn serialize_round_trip_full_size() {
        let cfg = GridConfig::new(64, 256, 20e6, 4e9).unwrap();
        let frame = TTMatrix::new(&cfg, random_matrix(64, 256, 3)).unwrap();
        let stream = serialize(&cfg, core::slice::from_ref(&frame)).unwrap();
        assert_eq!(deserialize(&cfg, &stream).unwrap(), vec![frame]);
    }

    #[test]
    fn bin_to_physical_values() {
        let cfg = GridConfig::new(64, 256, 20e6, 4e9).unwrap();
        assert_eq!(cfg.bin_to_physical(0, 0, 1).unwrap(), (0.0, 0.0));
        let (range, _) = cfg.bin_to_physical(10, 0, 1).unwrap();
        assert!((range - 74.9481145).abs() < 1e-6);
        assert!((doppler_to_velocity(3707.0, 4e9) - 138.91633).abs() < 1e-4);
        assert!(cfg.bin_to_physical(64, 0, 1).is_err());
        assert!(cfg.bin_to_physical(0, 128, 1).is_err());
        assert!(cfg.bin_to_physical(0, -128, 1).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn zak_round_trip(log_m in 1u32..=8, log_n in 1u32..=8, seed in any::<u64>()) {
            let (m, n) = (1usize << log_m, 1usize << log_n);
            let cfg = GridConfig::new(m, n, 1e6, 1e9).unwrap();
            let x = DDMatrix::new(&cfg, random_matrix(m, n, seed)).unwrap();
            let back = zak(&cfg, &inverse_zak(&cfg, &x).unwrap()).unwrap();
            prop_assert!(back.values().max_abs_diff(x.values()) < 1e-10);
        }

        #[test]
        fn zak_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let cfg = GridConfig::new(8, 32, 1e6, 1e9).unwrap();
            let x = random_matrix(8, 32, seed);
            let y = random_matrix(8, 32, seed ^ 0x5555);
            let combo = CMatrix::from_fn(8, 32, |r, k| x.get(r, k) * a + y.get(r, k) * c(0.0, b));
            let t = |m: &CMatrix| zak(&cfg, &TTMatrix::new(&cfg, m.clone()).unwrap()).unwrap().into_values();
            let (tx, ty, tc) = (t(&x), t(&y), t(&combo));
            let expected = CMatrix::from_fn(8, 32, |r, k| tx.get(r, k) * a + ty.get(r, k) * c(0.0, b));
            prop_assert!(tc.max_abs_diff(&expected) < 1e-10);
        }

        #[test]
        fn impulse_stays_in_its_row(l in 0usize..16, k in 0usize..16) {
            let cfg = GridConfig::new(16, 16, 1e6, 1e9).unwrap();
            let mut dd = DDMatrix::zeros(&cfg);
            dd.values_mut().set(l, k, c(1.0, 0.0));
            let tt = inverse_zak(&cfg, &dd).unwrap();
            for r in 0..16 {
                let row_energy: f64 = tt.values().row(r).iter().map(|v| v.norm_sqr()).sum();
                if r == l {
                    prop_assert!((row_energy - 1.0 / 16.0).abs() < 1e-14);
                } else {
                    prop_assert_eq!(row_energy, 0.0);
                }
            }
        }

        #[test]
        fn serialize_bijection(frames in 1usize..4, seed in any::<u64>()) {
            let cfg = GridConfig::new(4, 8, 1e3, 1e9).unwrap();
            let tts: Vec<_> = (0..frames)
                .map(|i| TTMatrix::new(&cfg, random_matrix(4, 8, seed.wrapping_add(i as u64))).unwrap())
                .collect();
            let stream = serialize(&cfg, &tts).unwrap();
            prop_assert_eq!(stream.len(), frames * 32);
            prop_assert_eq!(deserialize(&cfg, &stream).unwrap(), tts);
        }
    }
}
