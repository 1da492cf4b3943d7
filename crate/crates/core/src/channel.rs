//! Multi-target delay-Doppler channel with additive white Gaussian noise.
//!
//! Each target is a point reflector: an integer-sample delay, a narrowband
//! Doppler rotation and a complex gain. The Doppler phase is referenced to the
//! start of the capture, so it runs on continuously across frame boundaries.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{velocity_to_doppler, SampleStream};

/// A point reflector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// Round-trip delay in samples.
    pub delay_samples: usize,
    /// Radial velocity, positive when approaching.
    pub velocity_mps: f64,
    pub amplitude: Complex64,
}

impl Target {
    pub fn new(delay_samples: usize, velocity_mps: f64, amplitude: Complex64) -> Self {
        Self {
            delay_samples,
            velocity_mps,
            amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub targets: Vec<Target>,
    /// Output SNR in dB; `f64::INFINITY` disables the noise.
    pub snr_db: f64,
    pub noise_seed: u64,
    pub fc: f64,
    pub fs: f64,
}

/// Two-way Doppler shift of `target` at carrier `fc`.
pub fn doppler_of(target: &Target, fc: f64) -> f64 {
    velocity_to_doppler(target.velocity_mps, fc)
}

/// `exp(j 2 pi f t / fs)` with the phase reduced to one cycle first.
fn rotation(doppler_hz: f64, t: usize, fs: f64) -> Complex64 {
    let cycles = doppler_hz * t as f64 / fs;
    let theta = 2.0 * PI * (cycles - libm::floor(cycles));
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

/// Noiseless sum of delayed, Doppler-rotated and scaled copies of `x`.
pub fn propagate(x: &SampleStream, targets: &[Target], fc: f64) -> Result<SampleStream> {
    if x.is_empty() {
        return Err(Error::Empty("channel input stream"));
    }
    let len = x.len();
    let mut y = vec![Complex64::new(0.0, 0.0); len];
    for target in targets {
        if target.delay_samples >= len {
            return Err(Error::DelayOutOfRange {
                delay: target.delay_samples,
                limit: len,
            });
        }
        let f = doppler_of(target, fc);
        for (t, (out, &v)) in y[target.delay_samples..]
            .iter_mut()
            .zip(&x.samples)
            .enumerate()
        {
            let t = t + target.delay_samples;
            *out += target.amplitude * v * rotation(f, t, x.fs);
        }
    }
    Ok(SampleStream::new(y, x.fs))
}

/// Adds circularly-symmetric complex Gaussian noise of total power
/// `noise_power` (split evenly over I and Q).
pub fn add_noise(x: &SampleStream, noise_power: f64, seed: u64) -> SampleStream {
    let sigma = libm::sqrt(noise_power / 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = x
        .samples
        .iter()
        .map(|&v| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            v + Complex64::new(re, im) * sigma
        })
        .collect();
    SampleStream::new(samples, x.fs)
}

/// Adds noise so that the measured mean power of `x` over the noise power
/// equals `snr_db`. An infinite SNR returns `x` unchanged.
pub fn add_awgn(x: &SampleStream, snr_db: f64, seed: u64) -> Result<SampleStream> {
    if snr_db == f64::INFINITY {
        return Ok(x.clone());
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidParameter("SNR is NaN"));
    }
    let power = x.mean_power();
    if power == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(add_noise(x, power / libm::pow(10.0, snr_db / 10.0), seed))
}

/// Full channel: [`propagate`] followed by [`add_awgn`] at `ch.snr_db`
/// relative to the composite noiseless return.
pub fn apply_channel(x: &SampleStream, ch: &ChannelConfig) -> Result<SampleStream> {
    let y = propagate(x, &ch.targets, ch.fc)?;
    add_awgn(&y, ch.snr_db, ch.noise_seed)
}
