//! Baseband simulator core for OTFS-based integrated sensing and communication.
//!
//! Everything here is pure computation over in-memory buffers and builds
//! without `std`: frames are assembled on a delay-Doppler grid, moved to the
//! fast-time/slow-time domain with the inverse Zak transform, pushed through a
//! synthetic multi-target channel and finally turned into delay-Doppler radar
//! maps either by cross-ambiguity correlation or by pilot-based channel
//! impulse response estimation.
//!
//! File formats, scenario parsing and the command line live in the
//! `rpotfs-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod channel;
pub mod error;
pub mod fft;
pub mod grid;
pub mod matrix;
pub mod metrics;
pub mod modem;
pub mod pipeline;
pub mod radar_caf;
pub mod radar_pilot;
pub mod seed;

pub use num_complex::Complex64;

pub use channel::{ChannelConfig, Target};
pub use error::{Error, Result};
pub use grid::{DDMatrix, GridConfig, SampleStream, TTMatrix};
pub use matrix::CMatrix;
pub use metrics::{Peak, PeakReport, PeakSearch};
pub use modem::{Frame, FrameLayout, PilotScheme, QamStream};
pub use radar_caf::{MapMethod, RadarMap, Window};
pub use radar_pilot::CirMatrix;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
