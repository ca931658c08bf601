//! Echo peak detection on correlator output.
//!
//! The line-of-sight path is the global maximum of `|m|`. Echo candidates
//! are local maxima of `|m|` inside the lag window that corresponds to
//! `[d_min, d_max]`. Candidates are thinned greedily (largest first, drop
//! anything closer than the minimum arrival separation to a kept peak),
//! then filtered by prominence and capped. Lags are refined with a
//! three-point parabola.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acoustic::Correlogram;
use crate::forward::{EchoSet, ForwardError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeakError {
    #[error("correlator output is identically zero")]
    AllZero,
    #[error("invalid peak configuration: {0}")]
    Config(&'static str),
}

/// Detection parameters. Distances are one-way (half round trip);
/// `min_separation` is the minimum round-trip path difference between
/// two reported arrivals, i.e. a lag separation of `min_separation / c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakConfig {
    pub d_min: f64,
    pub d_max: f64,
    pub min_separation: f64,
    pub c: f64,
    pub prominence_ratio: f64,
    pub max_peaks: usize,
    /// Magnitude floor relative to the line-of-sight peak.
    pub floor_ratio: f64,
    /// When set, the floor decays linearly to this ratio at the far end of the window.
    pub taper_end_ratio: Option<f64>,
}

/// Window 0.6 to 6.5 m, 0.5 m minimum separation, 346 m/s.
impl Default for PeakConfig {
    fn default() -> Self {
        Self {
            d_min: 0.6,
            d_max: 6.5,
            min_separation: 0.5,
            c: 346.0,
            prominence_ratio: 0.3,
            max_peaks: 16,
            floor_ratio: 0.05,
            taper_end_ratio: None,
        }
    }
}

impl PeakConfig {
    pub fn validate(&self) -> Result<(), PeakError> {
        if !(self.d_min > 0.0 && self.d_min < self.d_max && self.d_max.is_finite()) {
            return Err(PeakError::Config("need 0 < d_min < d_max"));
        }
        if !(self.min_separation > 0.0) {
            return Err(PeakError::Config("min_separation must be positive"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(PeakError::Config("speed of sound must be positive"));
        }
        if !(self.prominence_ratio > 0.0 && self.prominence_ratio < 1.0) {
            return Err(PeakError::Config("prominence_ratio must lie in (0, 1)"));
        }
        if !(self.floor_ratio >= 0.0) || self.taper_end_ratio.is_some_and(|r| !(r >= 0.0)) {
            return Err(PeakError::Config("magnitude floor must be nonnegative"));
        }
        Ok(())
    }

    /// Search window `(t_min, t_max)` relative to the line-of-sight lag, seconds.
    pub fn lag_window(&self) -> (f64, f64) {
        (2.0 * self.d_min / self.c, 2.0 * self.d_max / self.c)
    }

    pub fn min_lag_separation(&self) -> f64 {
        self.min_separation / self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectedPeak {
    /// Seconds, refined to sub-sample precision.
    pub lag: f64,
    pub magnitude: f64,
    /// `(lag - lag_los) c / 2`, meters.
    pub distance: f64,
}

/// A local maximum that passed the magnitude floor, with its fate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakCandidate {
    pub index: usize,
    pub lag: f64,
    pub magnitude: f64,
    pub prominence: f64,
    pub distance: f64,
    pub selected: bool,
}

/// Everything the detector looked at, for debugging dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakScan {
    pub los: DetectedPeak,
    pub window: (usize, usize),
    pub candidates: Vec<PeakCandidate>,
    pub peaks: Vec<DetectedPeak>,
}

fn magnitudes(m: &Correlogram) -> Vec<f64> {
    m.values.samples().iter().map(|x| x.abs()).collect()
}

fn argmax(v: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in v.iter().enumerate() {
        if best.is_none_or(|b| x > v[b]) {
            best = Some(i);
        }
    }
    best
}

/// Vertex offset of the parabola through three samples, in `[-0.5, 0.5]`.
fn parabolic_offset(v: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= v.len() {
        return 0.0;
    }
    let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom.abs() < f64::EPSILON * b.abs().max(1.0) {
        return 0.0;
    }
    (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

/// The line-of-sight peak: global maximum of `|m|`.
pub fn find_los(m: &Correlogram) -> Result<DetectedPeak, PeakError> {
    let v = magnitudes(m);
    let i = argmax(&v).ok_or(PeakError::AllZero)?;
    if v[i] <= 0.0 {
        return Err(PeakError::AllZero);
    }
    let offset = parabolic_offset(&v, i);
    Ok(DetectedPeak { lag: m.lag_seconds(i as f64 + offset), magnitude: v[i], distance: 0.0 })
}

/// The flanking minima of a local maximum: walk downhill on each side.
fn prominence(v: &[f64], i: usize) -> f64 {
    let mut l = i;
    while l > 0 && v[l - 1] <= v[l] {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < v.len() && v[r + 1] <= v[r] {
        r += 1;
    }
    v[i] - v[l].max(v[r])
}

pub fn scan_peaks(m: &Correlogram, cfg: &PeakConfig) -> Result<PeakScan, PeakError> {
    cfg.validate()?;
    let v = magnitudes(m);
    let los = find_los(m)?;
    let los_index = argmax(&v).expect("find_los succeeded");
    let fs = m.sample_rate();
    let (t_min, t_max) = cfg.lag_window();
    let start = los_index + (t_min * fs).ceil() as usize;
    let end = (los_index + (t_max * fs).floor() as usize).min(v.len().saturating_sub(2));
    let window = (start, end);
    let floor_at = |i: usize| {
        let base = cfg.floor_ratio * los.magnitude;
        match cfg.taper_end_ratio {
            Some(end_ratio) if end > start => {
                let t = (i - start) as f64 / (end - start) as f64;
                base + t * (end_ratio * los.magnitude - base)
            }
            _ => base,
        }
    };

    let mut candidates: Vec<PeakCandidate> = Vec::new();
    for i in start.max(1)..=end {
        if v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] >= floor_at(i) {
            let lag = m.lag_seconds(i as f64 + parabolic_offset(&v, i));
            candidates.push(PeakCandidate {
                index: i,
                lag,
                magnitude: v[i],
                prominence: prominence(&v, i),
                distance: (lag - los.lag) * cfg.c / 2.0,
                selected: false,
            });
        }
    }

    // greedy thinning: largest first, suppress close arrivals
    let sep_samples = cfg.min_lag_separation() * fs;
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        candidates[b].magnitude.total_cmp(&candidates[a].magnitude).then(candidates[a].index.cmp(&candidates[b].index))
    });
    let mut kept: Vec<usize> = Vec::new();
    for &c in &order {
        let idx = candidates[c].index as f64;
        if kept.iter().all(|&k| (candidates[k].index as f64 - idx).abs() >= sep_samples) {
            kept.push(c);
        }
    }
    let mut selected: Vec<usize> = kept
        .into_iter()
        .filter(|&c| {
            let cand = &candidates[c];
            cand.prominence >= cfg.prominence_ratio * cand.magnitude && (cfg.d_min..=cfg.d_max).contains(&cand.distance)
        })
        .take(cfg.max_peaks)
        .collect();
    selected.sort_by_key(|&c| candidates[c].index);
    for &c in &selected {
        candidates[c].selected = true;
    }
    let peaks = selected
        .iter()
        .map(|&c| DetectedPeak {
            lag: candidates[c].lag,
            magnitude: candidates[c].magnitude,
            distance: candidates[c].distance,
        })
        .collect();
    Ok(PeakScan { los, window, candidates, peaks })
}

/// Echo arrivals after the line-of-sight peak, sorted by lag.
pub fn detect_peaks(m: &Correlogram, cfg: &PeakConfig) -> Result<Vec<DetectedPeak>, PeakError> {
    match scan_peaks(m, cfg) {
        Ok(scan) => Ok(scan.peaks),
        Err(PeakError::AllZero) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// Candidate distances of one measurement point.
pub fn to_candidate_distances(peaks: &[DetectedPeak]) -> Result<EchoSet, ForwardError> {
    EchoSet::new(peaks.iter().map(|p| p.distance).collect())
}

/// Converts time differences of arrival (seconds) to one-way distances.
pub fn tdoa_to_distance(tdoa: f64, c: f64) -> f64 {
    tdoa * c / 2.0
}
