//! Radix-2 FFT over `Complex64`.
//!
//! Every grid dimension in this crate is a power of two, so a plain iterative
//! decimation-in-time kernel covers all transforms. The forward transform is
//! unnormalized and the inverse carries the `1/n` factor.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    /// `exp(-j 2 pi k / len)` for `k < len / 2`.
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<u32>,
}

impl Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let twiddles = (0..len / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / len as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len as u32)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (32 - bits)
                }
            })
            .collect();
        Ok(Self {
            len,
            twiddles,
            bit_reverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unnormalized forward DFT.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, false);
    }

    /// In-place inverse DFT including the `1/n` scale.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, true);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len, "buffer length must match the FFT size");
        let n = self.len;
        for i in 0..n {
            let j = self.bit_reverse[i] as usize;
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                let (lo, hi) = buf[start..start + size].split_at_mut(half);
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = lo[k];
                    let b = hi[k] * w;
                    lo[k] = a + b;
                    hi[k] = a - b;
                }
            }
            size *= 2;
        }
    }
}

/// Swaps the two halves so that bin 0 lands at index `len / 2`.
pub fn fft_shift<T: Copy>(values: &mut [T]) {
    let half = values.len() / 2;
    values.rotate_left(values.len() - half);
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (t, v)| {
                        let theta = sign * 2.0 * PI * ((k * t) % n) as f64 / n as f64;
                        acc + v * Complex64::new(theta.cos(), theta.sin())
                    })
            })
            .collect()
    }

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(Fft::new(12).unwrap_err(), Error::NotPowerOfTwo(12));
        assert!(Fft::new(0).is_err());
    }

    #[test]
    fn matches_naive_dft() {
        for &n in &[1usize, 2, 4, 8, 64, 256] {
            let x = random_vec(n, n as u64);
            let fft = Fft::new(n).unwrap();
            let mut fwd = x.clone();
            fft.forward(&mut fwd);
            let expected = naive_dft(&x, -1.0);
            for (a, b) in fwd.iter().zip(&expected) {
                assert!((a - b).norm() < 1e-9 * n as f64, "n={n}");
            }
            let mut inv = x.clone();
            fft.inverse(&mut inv);
            let expected: Vec<_> = naive_dft(&x, 1.0).iter().map(|v| v / n as f64).collect();
            for (a, b) in inv.iter().zip(&expected) {
                assert!((a - b).norm() < 1e-12 * n as f64, "n={n}");
            }
        }
    }

    #[test]
    fn shift_centres_dc() {
        let mut v = vec![0, 1, 2, 3, 4, 5, 6, 7];
        fft_shift(&mut v);
        assert_eq!(v, vec![4, 5, 6, 7, 0, 1, 2, 3]);
    }
}
