//! Scenario files: flat `key = value` text with dotted section names.
//!
//! One value per line, `#` starts a comment. Targets are numbered:
//! `target.0.delay_samples`, `target.0.velocity_mps`, ... and must be
//! contiguous from 0. The canonical writer in [`Scenario::to_text`] emits every
//! resolved key, so a run manifest is itself a valid scenario.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rpotfs_core::channel::Target;
use rpotfs_core::metrics::PeakSearch;
use rpotfs_core::pipeline::{CafSettings, Methods, SimulationSetup};
use rpotfs_core::seed;
use rpotfs_core::{Complex64, GridConfig, PilotScheme, Window};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotKind {
    Rp,
    Zp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seeds {
    pub data: u64,
    pub pilot: u64,
    pub noise: u64,
}

impl Seeds {
    /// Replaces every seed with one derived from `master`.
    pub fn from_master(master: u64) -> Self {
        Self {
            data: seed::derive(master, 1),
            pilot: seed::derive(master, 2),
            noise: seed::derive(master, 3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub fs_hz: f64,
    pub fc_hz: f64,
    pub pilot_kind: PilotKind,
    pub sym_len: usize,
    pub cp_len: usize,
    pub zone_rows: usize,
    pub pulse_row: usize,
    pub pulse: Complex64,
    pub targets: Vec<Target>,
    pub snr_db: f64,
    pub integration_time_s: f64,
    pub seeds: Seeds,
    pub method: Methods,
    pub output_dir: PathBuf,
    pub caf_first_delay: i64,
    pub caf_n_delay: usize,
    pub caf_window: Window,
    pub pilot_window: Window,
    pub zp_threshold_db: f64,
    pub doppler_oversample: usize,
    pub search: PeakSearch,
    /// Doppler half-span kept in written maps; 0 keeps the full span.
    pub output_max_doppler_hz: f64,
}

const KEYS: &[&str] = &[
    "name",
    "grid.m",
    "grid.n",
    "grid.fs_hz",
    "grid.fc_hz",
    "pilot.scheme",
    "pilot.sym_len",
    "pilot.cp_len",
    "pilot.zone_rows",
    "pilot.pulse_row",
    "pilot.pulse_re",
    "pilot.pulse_im",
    "channel.snr_db",
    "capture.integration_time_s",
    "seed.data",
    "seed.pilot",
    "seed.noise",
    "run.method",
    "run.output_dir",
    "caf.first_delay",
    "caf.n_delay",
    "caf.window",
    "pilot_radar.window",
    "pilot_radar.zp_threshold_db",
    "map.doppler_oversample",
    "peaks.guard_delay",
    "peaks.guard_doppler",
    "peaks.max_peaks",
    "peaks.min_separation_db",
    "output.max_doppler_hz",
];

const TARGET_FIELDS: &[&str] = &[
    "delay_samples",
    "velocity_mps",
    "amplitude_re",
    "amplitude_im",
];

struct Entry {
    line: usize,
    value: String,
}

struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ScenarioError>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|err| ScenarioError::Value {
                    line: e.line,
                    key: key.to_string(),
                    message: err.to_string(),
                }),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T, ScenarioError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| ScenarioError::Missing(key.to_string()))
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ScenarioError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn invalid(&self, key: &str, message: &str) -> ScenarioError {
        ScenarioError::Value {
            line: self.0.get(key).map_or(0, |e| e.line),
            key: key.to_string(),
            message: message.to_string(),
        }
    }
}

/// SNR values accept `inf` for a noiseless run.
fn parse_snr(text: &str) -> Result<f64, String> {
    match text {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        other => other.parse::<f64>().map_err(|e| e.to_string()),
    }
}

fn format_snr(snr: f64) -> String {
    if snr == f64::INFINITY {
        "inf".to_string()
    } else {
        snr.to_string()
    }
}

fn parse_window(text: &str) -> Option<Window> {
    match text {
        "none" => Some(Window::None),
        "hann" => Some(Window::Hann),
        _ => None,
    }
}

fn window_name(w: Window) -> &'static str {
    match w {
        Window::None => "none",
        Window::Hann => "hann",
    }
}

pub fn parse_method(text: &str) -> Option<Methods> {
    match text {
        "caf" => Some(Methods::Caf),
        "pilot" => Some(Methods::Pilot),
        "both" => Some(Methods::Both),
        _ => None,
    }
}

fn method_name(m: Methods) -> &'static str {
    match m {
        Methods::Caf => "caf",
        Methods::Pilot => "pilot",
        Methods::Both => "both",
    }
}

fn is_known_key(key: &str) -> bool {
    if KEYS.contains(&key) {
        return true;
    }
    let mut parts = key.split('.');
    matches!(
        (parts.next(), parts.next().map(str::parse::<usize>), parts.next(), parts.next()),
        (Some("target"), Some(Ok(_)), Some(field), None) if TARGET_FIELDS.contains(&field)
    )
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or(ScenarioError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ScenarioError::Syntax { line });
            }
            if !is_known_key(key) {
                return Err(ScenarioError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if map.contains_key(key) {
                return Err(ScenarioError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            map.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Self::from_entries(&Entries(map))
    }

    fn from_entries(e: &Entries) -> Result<Self, ScenarioError> {
        let pilot_kind = match e.require::<String>("pilot.scheme")?.as_str() {
            "rp" => PilotKind::Rp,
            "zp" => PilotKind::Zp,
            _ => return Err(e.invalid("pilot.scheme", "expected `rp` or `zp`")),
        };
        let sym_len = e.or("pilot.sym_len", 8usize)?;
        let zone_rows = e.or("pilot.zone_rows", 16usize)?;

        let mut targets = Vec::new();
        while e
            .0
            .keys()
            .any(|k| k.starts_with(&format!("target.{}.", targets.len())))
        {
            let i = targets.len();
            targets.push(Target::new(
                e.require(&format!("target.{i}.delay_samples"))?,
                e.require(&format!("target.{i}.velocity_mps"))?,
                Complex64::new(
                    e.or(&format!("target.{i}.amplitude_re"), 1.0)?,
                    e.or(&format!("target.{i}.amplitude_im"), 0.0)?,
                ),
            ));
        }
        let target_keys = e.0.keys().filter(|k| k.starts_with("target.")).count();
        let expected_keys: usize = (0..targets.len())
            .map(|i| {
                TARGET_FIELDS
                    .iter()
                    .filter(|f| e.0.contains_key(&format!("target.{i}.{f}")))
                    .count()
            })
            .sum();
        if target_keys != expected_keys {
            return Err(ScenarioError::Invalid(
                "target indices must be contiguous from 0".into(),
            ));
        }

        let snr_db = match e.0.get("channel.snr_db") {
            None => return Err(ScenarioError::Missing("channel.snr_db".into())),
            Some(entry) => parse_snr(&entry.value).map_err(|message| ScenarioError::Value {
                line: entry.line,
                key: "channel.snr_db".into(),
                message,
            })?,
        };
        let window = |key: &str| -> Result<Window, ScenarioError> {
            match e.get::<String>(key)? {
                None => Ok(Window::None),
                Some(w) => {
                    parse_window(&w).ok_or_else(|| e.invalid(key, "expected `none` or `hann`"))
                }
            }
        };
        let method = match e.get::<String>("run.method")? {
            None => Methods::Both,
            Some(m) => parse_method(&m)
                .ok_or_else(|| e.invalid("run.method", "expected caf, pilot or both"))?,
        };
        let defaults = PeakSearch::default();
        let caf_defaults = CafSettings::default();
        let scenario = Scenario {
            name: e.or("name", "scenario".to_string())?,
            m: e.require("grid.m")?,
            n: e.require("grid.n")?,
            fs_hz: e.require("grid.fs_hz")?,
            fc_hz: e.require("grid.fc_hz")?,
            pilot_kind,
            sym_len,
            cp_len: e.or("pilot.cp_len", sym_len)?,
            zone_rows,
            pulse_row: e.or("pilot.pulse_row", zone_rows / 2)?,
            pulse: Complex64::new(e.or("pilot.pulse_re", 1.0)?, e.or("pilot.pulse_im", 0.0)?),
            targets,
            snr_db,
            integration_time_s: e.require("capture.integration_time_s")?,
            seeds: Seeds {
                data: e.require("seed.data")?,
                pilot: match pilot_kind {
                    PilotKind::Rp => e.require("seed.pilot")?,
                    PilotKind::Zp => e.or("seed.pilot", 0)?,
                },
                noise: e.require("seed.noise")?,
            },
            method,
            output_dir: PathBuf::from(e.or("run.output_dir", "out".to_string())?),
            caf_first_delay: e.or("caf.first_delay", caf_defaults.first_delay)?,
            caf_n_delay: e.or("caf.n_delay", caf_defaults.n_delay)?,
            caf_window: window("caf.window")?,
            pilot_window: window("pilot_radar.window")?,
            zp_threshold_db: e.or("pilot_radar.zp_threshold_db", -30.0)?,
            doppler_oversample: e.or("map.doppler_oversample", 1)?,
            search: PeakSearch {
                guard_delay: e.or("peaks.guard_delay", defaults.guard_delay)?,
                guard_doppler: e.or("peaks.guard_doppler", defaults.guard_doppler)?,
                max_peaks: e.or("peaks.max_peaks", defaults.max_peaks)?,
                min_separation_db: e.or("peaks.min_separation_db", defaults.min_separation_db)?,
            },
            output_max_doppler_hz: e.or("output.max_doppler_hz", 0.0)?,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_file(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| anyhow::anyhow!("cannot read scenario {}: {err}", path.display()))?;
        Scenario::parse(&text).map_err(|err| anyhow::anyhow!("{}: {err}", path.display()))
    }

    pub fn grid(&self) -> Result<GridConfig, ScenarioError> {
        GridConfig::new(self.m, self.n, self.fs_hz, self.fc_hz)
            .map_err(|e| ScenarioError::Invalid(e.to_string()))
    }

    pub fn scheme(&self) -> PilotScheme {
        match self.pilot_kind {
            PilotKind::Rp => PilotScheme::Rp {
                sym_len: self.sym_len,
                cp_len: self.cp_len,
                pilot_seed: self.seeds.pilot,
            },
            PilotKind::Zp => PilotScheme::Zp {
                zone_rows: self.zone_rows,
                pulse_row: self.pulse_row,
                pulse_amplitude: self.pulse,
            },
        }
    }

    /// Whole frames covering the integration time.
    pub fn frames(&self) -> Result<usize, ScenarioError> {
        Ok(self.grid()?.frames_for_duration(self.integration_time_s))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let grid = self.grid()?;
        self.scheme()
            .validate(&grid)
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if self.integration_time_s.is_nan() || self.integration_time_s <= 0.0 || self.frames()? < 1
        {
            return Err(ScenarioError::Invalid(
                "integration time must cover at least one frame".into(),
            ));
        }
        self.setup()?
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))
    }

    pub fn setup(&self) -> Result<SimulationSetup, ScenarioError> {
        Ok(SimulationSetup {
            grid: self.grid()?,
            scheme: self.scheme(),
            targets: self.targets.clone(),
            snr_db: self.snr_db,
            frames: self.frames()?,
            data_seed: self.seeds.data,
            noise_seed: self.seeds.noise,
            methods: self.method,
            caf: CafSettings {
                first_delay: self.caf_first_delay,
                n_delay: self.caf_n_delay,
                window: self.caf_window,
            },
            pilot_window: self.pilot_window,
            doppler_oversample: self.doppler_oversample,
            zp_threshold_db: self.zp_threshold_db,
            search: self.search,
        })
    }

    /// Canonical text with every key resolved.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("name", self.name.clone());
        kv("grid.m", self.m.to_string());
        kv("grid.n", self.n.to_string());
        kv("grid.fs_hz", self.fs_hz.to_string());
        kv("grid.fc_hz", self.fc_hz.to_string());
        match self.pilot_kind {
            PilotKind::Rp => {
                kv("pilot.scheme", "rp".into());
                kv("pilot.sym_len", self.sym_len.to_string());
                kv("pilot.cp_len", self.cp_len.to_string());
            }
            PilotKind::Zp => {
                kv("pilot.scheme", "zp".into());
                kv("pilot.zone_rows", self.zone_rows.to_string());
                kv("pilot.pulse_row", self.pulse_row.to_string());
                kv("pilot.pulse_re", self.pulse.re.to_string());
                kv("pilot.pulse_im", self.pulse.im.to_string());
            }
        }
        for (i, t) in self.targets.iter().enumerate() {
            kv(
                &format!("target.{i}.delay_samples"),
                t.delay_samples.to_string(),
            );
            kv(
                &format!("target.{i}.velocity_mps"),
                t.velocity_mps.to_string(),
            );
            kv(
                &format!("target.{i}.amplitude_re"),
                t.amplitude.re.to_string(),
            );
            kv(
                &format!("target.{i}.amplitude_im"),
                t.amplitude.im.to_string(),
            );
        }
        kv("channel.snr_db", format_snr(self.snr_db));
        kv(
            "capture.integration_time_s",
            self.integration_time_s.to_string(),
        );
        kv("seed.data", self.seeds.data.to_string());
        kv("seed.pilot", self.seeds.pilot.to_string());
        kv("seed.noise", self.seeds.noise.to_string());
        kv("run.method", method_name(self.method).into());
        kv("run.output_dir", self.output_dir.display().to_string());
        kv("caf.first_delay", self.caf_first_delay.to_string());
        kv("caf.n_delay", self.caf_n_delay.to_string());
        kv("caf.window", window_name(self.caf_window).into());
        kv("pilot_radar.window", window_name(self.pilot_window).into());
        kv(
            "pilot_radar.zp_threshold_db",
            self.zp_threshold_db.to_string(),
        );
        kv(
            "map.doppler_oversample",
            self.doppler_oversample.to_string(),
        );
        kv("peaks.guard_delay", self.search.guard_delay.to_string());
        kv("peaks.guard_doppler", self.search.guard_doppler.to_string());
        kv("peaks.max_peaks", self.search.max_peaks.to_string());
        kv(
            "peaks.min_separation_db",
            self.search.min_separation_db.to_string(),
        );
        kv(
            "output.max_doppler_hz",
            self.output_max_doppler_hz.to_string(),
        );
        s
    }

    /// Sets every target's speed so that the fastest one moves at `vmax`,
    /// keeping directions and ratios. Stationary scenes get `vmax` everywhere.
    pub fn with_vmax(&self, vmax: f64) -> Self {
        let mut out = self.clone();
        let fastest = self
            .targets
            .iter()
            .map(|t| t.velocity_mps.abs())
            .fold(0.0, f64::max);
        for t in &mut out.targets {
            t.velocity_mps = if fastest == 0.0 {
                vmax
            } else {
                t.velocity_mps * (vmax / fastest)
            };
        }
        out
    }

    /// Largest target speed, 0 without targets.
    pub fn vmax(&self) -> f64 {
        self.targets
            .iter()
            .map(|t| t.velocity_mps.abs())
            .fold(0.0, f64::max)
    }
}
