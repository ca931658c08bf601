//! Scenario files describing a room, a trajectory and the measurement model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acoustic::CorrelationWindow;
use crate::formats::RoomSpec;
use crate::geometry::{ConvexRoom, Point2};
use crate::peaks::PeakConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Field { field: &'static str, message: String },
}

fn field(field: &'static str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Field { field, message: message.into() }
}

/// Points given by path lengths and turn angle, starting at `origin`
/// heading along `heading_deg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub d12: f64,
    pub d23: f64,
    pub phi_deg: f64,
    #[serde(default)]
    pub origin: [f64; 2],
    #[serde(default)]
    pub heading_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EchoSpec {
    /// Highest reflection order simulated.
    pub max_order: usize,
    /// Farthest echo distance kept, meters.
    pub d_max: f64,
    /// Merge echoes closer than this before reconstruction.
    pub dedup_tol: Option<f64>,
}

impl Default for EchoSpec {
    fn default() -> Self {
        Self { max_order: 1, d_max: 10.0, dedup_tol: None }
    }
}

/// Direct corruption of the echo distances.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub sigma_m: f64,
    pub n_spurious: usize,
    /// Range of spurious distances; defaults to `[0.05, d_max]`.
    pub spurious_range_m: Option<[f64; 2]>,
    /// Extra echoes present at every point, e.g. floor and ceiling.
    pub constant_m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcousticSpec {
    pub f0_hz: f64,
    pub f1_hz: f64,
    pub duration_s: f64,
    pub fs_hz: f64,
    pub c: f64,
    pub los_delay_s: f64,
    pub los_gain: f64,
    pub reflection_coeff: f64,
    /// Signal-to-noise ratio of the direct path; absent means noiseless.
    pub snr_db: Option<f64>,
    pub window: CorrelationWindow,
    pub peaks: PeakConfig,
}

impl Default for AcousticSpec {
    fn default() -> Self {
        Self {
            f0_hz: 30.0,
            f1_hz: 8000.0,
            duration_s: 0.05,
            fs_hz: 96_000.0,
            c: 346.0,
            los_delay_s: 1e-3,
            los_gain: 4.0,
            reflection_coeff: 0.9,
            snr_db: None,
            window: CorrelationWindow::Triangular,
            peaks: PeakConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub room: RoomSpec,
    #[serde(default)]
    pub points: Option<[[f64; 2]; 3]>,
    #[serde(default)]
    pub trajectory: Option<TrajectorySpec>,
    #[serde(default)]
    pub echoes: EchoSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Present: simulate waveforms and detect peaks instead of using the
    /// echo distances directly.
    #[serde(default)]
    pub acoustics: Option<AcousticSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let spec: ScenarioSpec = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn needs_seed(&self) -> bool {
        self.noise.sigma_m > 0.0
            || self.noise.n_spurious > 0
            || self.acoustics.as_ref().is_some_and(|a| a.snr_db.is_some_and(f64::is_finite))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.room()?;
        match (&self.points, &self.trajectory) {
            (Some(_), Some(_)) => return Err(field("points", "give either points or trajectory, not both")),
            (None, None) => return Err(field("points", "missing: give points or trajectory")),
            (Some(p), None) if p.iter().flatten().any(|x| !x.is_finite()) => {
                return Err(field("points", "coordinates must be finite"))
            }
            (None, Some(t)) if !(t.d12 > 0.0 && t.d23 > 0.0 && t.d12.is_finite() && t.d23.is_finite()) => {
                return Err(field("trajectory", "d12 and d23 must be positive"))
            }
            _ => {}
        }
        if self.echoes.max_order == 0 {
            return Err(field("echoes.max_order", "must be at least 1"));
        }
        if !(self.echoes.d_max > 0.0) {
            return Err(field("echoes.d_max", "must be positive"));
        }
        if !(self.noise.sigma_m >= 0.0 && self.noise.sigma_m.is_finite()) {
            return Err(field("noise.sigma_m", "must be non-negative"));
        }
        if let Some([lo, hi]) = self.noise.spurious_range_m {
            if !(lo > 0.0 && hi > lo) {
                return Err(field("noise.spurious_range_m", "need 0 < lo < hi"));
            }
        }
        if self.noise.constant_m.iter().any(|d| !(*d > 0.0)) {
            return Err(field("noise.constant_m", "distances must be positive"));
        }
        if let Some(a) = &self.acoustics {
            if self.noise.sigma_m > 0.0 || self.noise.n_spurious > 0 {
                return Err(field(
                    "noise",
                    "distance corruption does not apply to the acoustic path; use acoustics.snr_db",
                ));
            }
            if !(a.f0_hz > 0.0 && a.f1_hz > a.f0_hz && a.f1_hz < a.fs_hz / 2.0) {
                return Err(field("acoustics", "need 0 < f0 < f1 < fs/2"));
            }
            if !(a.duration_s > 0.0 && a.c > 0.0 && a.los_delay_s > 0.0 && a.los_gain > 0.0) {
                return Err(field("acoustics", "duration, c, los_delay_s and los_gain must be positive"));
            }
            a.peaks.validate().map_err(|e| field("acoustics.peaks", e.to_string()))?;
        }
        if self.needs_seed() && self.seed.is_none() {
            return Err(field("seed", "required when the scenario has noise"));
        }
        Ok(())
    }

    pub fn room(&self) -> Result<ConvexRoom, ScenarioError> {
        self.room.to_room().map_err(|e| field("room", e.to_string()))
    }

    /// Measurement points in world coordinates.
    pub fn points(&self) -> Result<[Point2; 3], ScenarioError> {
        if let Some(p) = &self.points {
            return Ok(p.map(Point2::from));
        }
        let t = self.trajectory.as_ref().ok_or_else(|| field("points", "missing"))?;
        let o1 = Point2::from(t.origin);
        let heading = t.heading_deg.to_radians();
        let o2 = o1 + Point2::unit(heading) * t.d12;
        let o3 = o2 + Point2::unit(heading + t.phi_deg.to_radians()) * t.d23;
        Ok([o1, o2, o3])
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
