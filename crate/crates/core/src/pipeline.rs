//! End-to-end run: capture, channel, both radars and their reports.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::channel::{add_awgn, add_noise, propagate, Target};
use crate::error::{Error, Result};
use crate::grid::{deserialize, GridConfig, SampleStream};
use crate::metrics::{analyze, PeakReport, PeakSearch};
use crate::modem::{build_capture, Capture, PilotScheme};
use crate::radar_caf::{compute_caf, CafConfig, RadarMap, Window};
use crate::radar_pilot::{cir_to_dd_map, estimate_cir_rp, estimate_cir_zp, zp_to_dd_map};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Methods {
    Caf,
    Pilot,
    #[default]
    Both,
}

impl Methods {
    pub fn caf(&self) -> bool {
        matches!(self, Methods::Caf | Methods::Both)
    }

    pub fn pilot(&self) -> bool {
        matches!(self, Methods::Pilot | Methods::Both)
    }

    pub fn count(&self) -> usize {
        self.caf() as usize + self.pilot() as usize
    }
}

/// Delay span and taper of the CAF; the Doppler span is always the full
/// `+-fs / 2M` supported by the capture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CafSettings {
    pub first_delay: i64,
    pub n_delay: usize,
    pub window: Window,
}

impl Default for CafSettings {
    fn default() -> Self {
        Self {
            first_delay: -16,
            n_delay: 32,
            window: Window::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSetup {
    pub grid: GridConfig,
    pub scheme: PilotScheme,
    pub targets: Vec<Target>,
    /// Input SNR in dB, `f64::INFINITY` for a noiseless run.
    pub snr_db: f64,
    pub frames: usize,
    pub data_seed: u64,
    pub noise_seed: u64,
    pub methods: Methods,
    pub caf: CafSettings,
    pub pilot_window: Window,
    /// Doppler zero-padding factor applied to both maps (power of two).
    pub doppler_oversample: usize,
    /// Threshold of the ZP estimator, dB below the zone peak.
    pub zp_threshold_db: f64,
    pub search: PeakSearch,
}

impl SimulationSetup {
    /// The same scenario with data and noise drawn from repetition `rep`.
    /// Repetition 0 is the setup itself.
    pub fn with_repetition(&self, rep: usize) -> Self {
        let mut out = self.clone();
        if rep > 0 {
            out.data_seed = seed::derive(self.data_seed, rep as u64);
            out.noise_seed = seed::derive(self.noise_seed, rep as u64);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate(&self.grid)?;
        if self.frames == 0 {
            return Err(Error::InvalidParameter(
                "a capture needs at least one frame",
            ));
        }
        for t in &self.targets {
            if t.delay_samples >= self.grid.m() {
                return Err(Error::DelayOutOfRange {
                    delay: t.delay_samples,
                    limit: self.grid.m(),
                });
            }
        }
        if !self.doppler_oversample.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.doppler_oversample));
        }
        if self.methods.caf() && self.caf.n_delay > self.grid.m() {
            return Err(Error::InvalidParameter("CAF delay span exceeds M"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub map: RadarMap,
    pub report: PeakReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub caf: Option<MethodOutcome>,
    pub pilot: Option<MethodOutcome>,
    pub warnings: Vec<String>,
}

/// Transmitted capture and received stream for a setup.
pub fn simulate_link(
    setup: &SimulationSetup,
    warnings: &mut Vec<String>,
) -> Result<(Capture, SampleStream)> {
    setup.validate()?;
    let capture = build_capture(&setup.grid, &setup.scheme, setup.frames, setup.data_seed)?;
    let echo = propagate(&capture.stream, &setup.targets, setup.grid.fc())?;
    let rx = if echo.mean_power() > 0.0 || setup.snr_db == f64::INFINITY {
        add_awgn(&echo, setup.snr_db, setup.noise_seed)?
    } else {
        warnings.push(String::from(
            "no target return: noise power referenced to the transmitted signal power",
        ));
        let power = capture.stream.mean_power() / libm::pow(10.0, setup.snr_db / 10.0);
        add_noise(&echo, power, setup.noise_seed)
    };
    Ok((capture, rx))
}

pub fn run(setup: &SimulationSetup) -> Result<SimulationOutcome> {
    let mut warnings = Vec::new();
    let (capture, rx) = simulate_link(setup, &mut warnings)?;

    let caf = if setup.methods.caf() {
        let cfg = CafConfig {
            first_delay: setup.caf.first_delay,
            n_delay: setup.caf.n_delay,
            n_doppler: 0,
            block_len: setup.grid.m(),
            oversample: setup.doppler_oversample,
            window: setup.caf.window,
        };
        let cfg = CafConfig {
            n_doppler: cfg.max_doppler_bins(rx.len()),
            ..cfg
        };
        let map = compute_caf(&capture.stream, &rx, &cfg)?;
        let report = analyze(&map, &setup.search)?;
        Some(MethodOutcome { map, report })
    } else {
        None
    };

    let pilot = if setup.methods.pilot() {
        let map = match setup.scheme {
            PilotScheme::Rp { sym_len, .. } => {
                if let Some(t) = setup.targets.iter().find(|t| t.delay_samples >= sym_len) {
                    warnings.push(format!(
                        "target delay {} exceeds the {}-tap pilot CIR span",
                        t.delay_samples, sym_len
                    ));
                }
                let cir = estimate_cir_rp(&rx, &capture.record)?;
                let columns = cir.taps.cols();
                let padded = columns.next_power_of_two() * setup.doppler_oversample;
                cir_to_dd_map(&cir, padded - columns, setup.pilot_window)?
            }
            PilotScheme::Zp { .. } => {
                let first = deserialize(
                    &setup.grid,
                    &SampleStream::new(rx.samples[..setup.grid.frame_len()].to_vec(), rx.fs),
                )?
                .remove(0);
                let est =
                    estimate_cir_zp(&first, &setup.grid, &setup.scheme, setup.zp_threshold_db)?;
                zp_to_dd_map(&est)?
            }
        };
        let report = analyze(&map, &setup.search)?;
        Some(MethodOutcome { map, report })
    } else {
        None
    };

    Ok(SimulationOutcome {
        caf,
        pilot,
        warnings,
    })
}
