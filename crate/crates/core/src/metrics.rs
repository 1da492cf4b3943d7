//! Peak extraction, noise-floor measurement and SNR sweeps over radar maps.
//!
//! Levels are relative to the map peak, so the floor of a map is a negative
//! dB figure and the output SNR is simply its negation.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::pipeline::{self, SimulationSetup};
use crate::radar_caf::{to_db, MapMethod, RadarMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub row: usize,
    pub col: usize,
    pub delay_bin: i64,
    pub doppler_bin: i64,
    pub level_db: f64,
}

/// Greedy peak search settings. Guards are half-widths: a guard of
/// `(1, 2)` blanks a 3 x 5 rectangle around each peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSearch {
    pub guard_delay: usize,
    pub guard_doppler: usize,
    pub max_peaks: usize,
    /// Peaks further than this below the strongest one are not reported.
    pub min_separation_db: f64,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self {
            guard_delay: 1,
            guard_doppler: 2,
            max_peaks: 8,
            min_separation_db: 20.0,
        }
    }
}

/// Rectangle of cells excluded from the floor measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GuardRect {
    pub row: usize,
    pub col: usize,
    pub half_rows: usize,
    pub half_cols: usize,
}

impl GuardRect {
    pub fn around(peak: &Peak, search: &PeakSearch) -> Self {
        Self {
            row: peak.row,
            col: peak.col,
            half_rows: search.guard_delay,
            half_cols: search.guard_doppler,
        }
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row.abs_diff(self.row) <= self.half_rows && col.abs_diff(self.col) <= self.half_cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport {
    pub method: MapMethod,
    pub peaks: Vec<Peak>,
    pub floor_rms_db: f64,
    pub output_snr_db: f64,
}

/// Takes the global maximum, blanks its guard rectangle and repeats. Ties go
/// to the lower delay bin, then the lower Doppler bin.
pub fn find_peaks(map: &RadarMap, search: &PeakSearch) -> Result<Vec<Peak>> {
    if search.guard_delay >= map.rows() || search.guard_doppler >= map.cols() {
        return Err(Error::InvalidParameter("peak guard does not fit the map"));
    }
    let cols = map.cols();
    let mut blanked = alloc::vec![false; map.rows() * cols];
    let mut peaks: Vec<Peak> = Vec::new();
    while peaks.len() < search.max_peaks {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in map.magnitudes().iter().enumerate() {
            if !blanked[i] && best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        let Some((index, _)) = best else { break };
        let (row, col) = (index / cols, index % cols);
        let level_db = map.magnitude_db(row, col);
        if let Some(first) = peaks.first() {
            if first.level_db - level_db > search.min_separation_db {
                break;
            }
        }
        let peak = Peak {
            row,
            col,
            delay_bin: map.delay_bin(row),
            doppler_bin: map.doppler_bin(col),
            level_db,
        };
        let guard = GuardRect::around(&peak, search);
        for r in row.saturating_sub(guard.half_rows)..(row + guard.half_rows + 1).min(map.rows()) {
            for c in col.saturating_sub(guard.half_cols)..(col + guard.half_cols + 1).min(cols) {
                blanked[r * cols + c] = true;
            }
        }
        peaks.push(peak);
    }
    Ok(peaks)
}

/// RMS of the normalized linear magnitudes outside `exclusions`, in dB
/// relative to the peak. An exactly empty floor gives `f64::NEG_INFINITY`.
pub fn noise_floor_rms_db(map: &RadarMap, exclusions: &[GuardRect]) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in 0..map.rows() {
        for c in 0..map.cols() {
            if exclusions.iter().any(|g| g.contains(r, c)) {
                continue;
            }
            let v = map.magnitude(r, c);
            sum += v * v;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::AllExcluded);
    }
    let rms = libm::sqrt(sum / count as f64);
    if rms == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(20.0 * libm::log10(rms))
}

/// Peaks plus the floor measured outside their guard rectangles.
pub fn analyze(map: &RadarMap, search: &PeakSearch) -> Result<PeakReport> {
    let peaks = find_peaks(map, search)?;
    let guards: Vec<GuardRect> = peaks.iter().map(|p| GuardRect::around(p, search)).collect();
    let floor_rms_db = noise_floor_rms_db(map, &guards)?;
    Ok(PeakReport {
        method: map.method,
        peaks,
        floor_rms_db,
        output_snr_db: -floor_rms_db,
    })
}

/// Level in dB of the strongest cell inside `guard`.
pub fn max_in(map: &RadarMap, guard: &GuardRect) -> f64 {
    let mut best = 0.0f64;
    for r in
        guard.row.saturating_sub(guard.half_rows)..(guard.row + guard.half_rows + 1).min(map.rows())
    {
        for c in guard.col.saturating_sub(guard.half_cols)
            ..(guard.col + guard.half_cols + 1).min(map.cols())
        {
            best = best.max(map.magnitude(r, c));
        }
    }
    to_db(best)
}

/// Mean and (population) standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Aggregated metrics of one method at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub method: MapMethod,
    pub snr_db: f64,
    pub repetitions: usize,
    pub mean_floor_db: f64,
    pub std_floor_db: f64,
    pub mean_output_snr_db: f64,
    pub std_output_snr_db: f64,
}

/// Runs `setup` at `snr_db` for `repetitions` seed sets and aggregates per
/// method. Repetition 0 uses the setup's own seeds.
pub fn sweep_point(
    setup: &SimulationSetup,
    snr_db: f64,
    repetitions: usize,
) -> Result<Vec<SweepPoint>> {
    if repetitions == 0 {
        return Err(Error::InvalidParameter(
            "at least one repetition is required",
        ));
    }
    let mut floors: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut methods = [None, None];
    for rep in 0..repetitions {
        let mut run = setup.with_repetition(rep);
        run.snr_db = snr_db;
        let outcome = pipeline::run(&run)?;
        for (slot, result) in [outcome.caf, outcome.pilot].into_iter().enumerate() {
            if let Some(result) = result {
                methods[slot] = Some(result.report.method);
                floors[slot].push(result.report.floor_rms_db);
            }
        }
    }
    Ok(methods
        .iter()
        .zip(&floors)
        .filter_map(|(method, floor)| {
            let method = (*method)?;
            let (mean_floor_db, std_floor_db) = mean_std(floor);
            Some(SweepPoint {
                method,
                snr_db,
                repetitions,
                mean_floor_db,
                std_floor_db,
                mean_output_snr_db: -mean_floor_db,
                std_output_snr_db: std_floor_db,
            })
        })
        .collect())
}

/// [`sweep_point`] over every SNR in `snr_points`.
pub fn snr_sweep(
    setup: &SimulationSetup,
    snr_points: &[f64],
    repetitions: usize,
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::new();
    for &snr in snr_points {
        out.extend(sweep_point(setup, snr, repetitions)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar_caf::MapAxes;
    use alloc::vec;
    use proptest::prelude::*;

    fn axes() -> MapAxes {
        MapAxes {
            first_delay_bin: 0,
            first_doppler_bin: -8,
            delay_step_s: 1.0,
            doppler_step_hz: 1.0,
        }
    }

    fn map_from(rows: usize, cols: usize, values: Vec<f64>) -> RadarMap {
        RadarMap::from_magnitudes(rows, cols, values, axes(), MapMethod::Caf).unwrap()
    }

    #[test]
    fn single_impulse_gives_single_peak() {
        let mut v = vec![0.0; 8 * 16];
        v[3 * 16 + 11] = 5.0;
        let map = map_from(8, 16, v);
        let peaks = find_peaks(&map, &PeakSearch::default()).unwrap();
        assert_eq!(peaks.len(), 1);
        assert_eq!(
            (peaks[0].row, peaks[0].col, peaks[0].doppler_bin),
            (3, 11, 3)
        );
        assert_eq!(peaks[0].level_db, 0.0);
    }

    #[test]
    fn ties_break_to_lower_delay() {
        let mut v = vec![0.0; 8 * 16];
        v[6 * 16 + 2] = 1.0;
        v[2 * 16 + 9] = 1.0;
        let map = map_from(8, 16, v);
        let peaks = find_peaks(&map, &PeakSearch::default()).unwrap();
        assert_eq!((peaks[0].row, peaks[1].row), (2, 6));
    }

    #[test]
    fn guard_must_fit() {
        let map = map_from(2, 16, vec![1.0; 32]);
        let search = PeakSearch {
            guard_delay: 2,
            ..PeakSearch::default()
        };
        assert!(find_peaks(&map, &search).is_err());
    }

    #[test]
    fn floor_of_isolated_peak_is_negative_infinity() {
        let mut v = vec![0.0; 8 * 16];
        v[20] = 1.0;
        let map = map_from(8, 16, v);
        let report = analyze(&map, &PeakSearch::default()).unwrap();
        assert_eq!(report.floor_rms_db, f64::NEG_INFINITY);
    }

    #[test]
    fn floor_of_flat_background() {
        let mut v = vec![0.01; 8 * 16];
        v[40] = 1.0;
        let map = map_from(8, 16, v);
        let report = analyze(&map, &PeakSearch::default()).unwrap();
        assert!((report.floor_rms_db + 40.0).abs() < 1e-9);
        assert_eq!(report.output_snr_db, -report.floor_rms_db);
    }

    #[test]
    fn everything_excluded_is_an_error() {
        let map = map_from(2, 2, vec![1.0, 0.5, 0.5, 0.5]);
        let all = GuardRect {
            row: 0,
            col: 0,
            half_rows: 4,
            half_cols: 4,
        };
        assert_eq!(
            noise_floor_rms_db(&map, &[all]).unwrap_err(),
            Error::AllExcluded
        );
    }

    #[test]
    fn separation_limits_reported_peaks() {
        let mut v = vec![0.0; 8 * 16];
        v[5] = 1.0;
        v[5 * 16 + 5] = 0.5; // -6 dB
        v[7 * 16 + 12] = 0.001; // -60 dB
        let map = map_from(8, 16, v);
        let peaks = find_peaks(&map, &PeakSearch::default()).unwrap();
        assert_eq!(peaks.len(), 2);
    }

    #[test]
    fn mean_std_values() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert!(mean_std(&[]).0.is_nan());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn report_is_deterministic_and_scale_free(values in proptest::collection::vec(0.0f64..1.0, 8 * 16),
                                                 scale in 1e-3f64..1e3) {
            prop_assume!(values.iter().any(|v| *v > 0.0));
            let a = map_from(8, 16, values.clone());
            let b = map_from(8, 16, values.iter().map(|v| v * scale).collect());
            let search = PeakSearch::default();
            let ra = analyze(&a, &search).unwrap();
            prop_assert_eq!(&ra, &analyze(&a, &search).unwrap());
            let rb = analyze(&b, &search).unwrap();
            prop_assert_eq!(ra.peaks.len(), rb.peaks.len());
            prop_assert!((ra.floor_rms_db - rb.floor_rms_db).abs() < 1e-9);
            prop_assert_eq!(ra.output_snr_db, -ra.floor_rms_db);
            for w in ra.peaks.windows(2) {
                prop_assert!(w[0].level_db >= w[1].level_db);
            }
        }
    }
}
