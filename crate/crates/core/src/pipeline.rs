//! End-to-end runs: simulate a scenario, recover echoes, reconstruct, and
//! score the result against the ground truth.

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::acoustic::{
    correlate_windowed, make_chirp, rir_from_room, simulate_received, AcousticError, CorrelationWindow, GainModel,
    RirOptions, Waveform,
};
use crate::formats::SolutionJson;
use crate::forward::{corrupt_echo_set, echo_set, Corruption, EchoSet, ForwardError};
use crate::geometry::{hausdorff, wrap_angle, ConvexRoom, GeometryError, Point2};
use crate::peaks::{scan_peaks, to_candidate_distances, PeakConfig, PeakError, PeakScan};
use crate::reconstruct::{
    slam_with_stats, CandidateSolution, Frame, MeasurementGeometry, ReconstructError, SlamConfig,
};
use crate::scenario::{AcousticSpec, ScenarioError, ScenarioSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Acoustic(#[from] AcousticError),
    #[error(transparent)]
    Peaks(#[from] PeakError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
}

type Result<T> = std::result::Result<T, PipelineError>;

/// Independent stream for point `j` derived from a scenario seed.
pub fn point_seed(seed: u64, j: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(j as u64 + 1)
}

/// The scenario's room and trajectory, in world and `O1` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub world_room: ConvexRoom,
    pub world_points: [Point2; 3],
    pub frame: Frame,
    /// Room in the `O1` frame, the frame reconstructions are expressed in.
    pub room: ConvexRoom,
    pub geometry: MeasurementGeometry,
}

pub fn ground_truth(spec: &ScenarioSpec) -> Result<Truth> {
    let world_room = spec.room()?;
    let world_points = spec.points()?;
    let (geometry, frame) = MeasurementGeometry::from_points(world_points[0], world_points[1], world_points[2])?;
    let room = frame.room_to_local(&world_room)?;
    Ok(Truth { world_room, world_points, frame, room, geometry })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recordings {
    pub chirp: Waveform,
    pub received: [Waveform; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub truth: Truth,
    /// Echo sets as the reconstruction would see them when no waveforms
    /// are simulated: forward echoes plus the configured corruption.
    pub echoes: [EchoSet; 3],
    pub recordings: Option<Recordings>,
}

pub fn chirp_for(a: &AcousticSpec) -> Result<Waveform> {
    Ok(make_chirp(a.f0_hz, a.f1_hz, a.duration_s, a.fs_hz)?)
}

fn rir_options(spec: &ScenarioSpec, a: &AcousticSpec) -> RirOptions {
    RirOptions {
        max_order: spec.echoes.max_order,
        d_max: spec.echoes.d_max,
        c: a.c,
        los_delay: a.los_delay_s,
        los_gain: a.los_gain,
        gain_model: GainModel { reflection_coeff: a.reflection_coeff },
    }
}

pub fn simulate(spec: &ScenarioSpec) -> Result<Simulation> {
    spec.validate()?;
    let truth = ground_truth(spec)?;
    let seed = spec.seed();
    let corruption = Corruption {
        sigma: spec.noise.sigma_m,
        n_spurious: spec.noise.n_spurious,
        spurious_range: spec.noise.spurious_range_m.map_or((0.05, spec.echoes.d_max), |[lo, hi]| (lo, hi)),
        drop: Vec::new(),
        constant: spec.noise.constant_m.clone(),
    };
    let mut echoes: [EchoSet; 3] = Default::default();
    for (j, &p) in truth.world_points.iter().enumerate() {
        let clean = echo_set(&truth.world_room, p, spec.echoes.max_order, spec.echoes.d_max)?;
        let untouched = corruption.sigma == 0.0 && corruption.n_spurious == 0 && corruption.constant.is_empty();
        echoes[j] = if untouched { clean } else { corrupt_echo_set(&clean, &corruption, point_seed(seed, j)) };
    }
    let recordings = match &spec.acoustics {
        None => None,
        Some(a) => {
            let chirp = chirp_for(a)?;
            let opts = rir_options(spec, a);
            let snr = a.snr_db.unwrap_or(f64::INFINITY);
            let mut received: Vec<Waveform> = Vec::with_capacity(3);
            for (j, &p) in truth.world_points.iter().enumerate() {
                let rir = rir_from_room(&truth.world_room, p, &opts)?;
                received.push(simulate_received(&chirp, &rir, snr, point_seed(seed, j)));
            }
            let received: [Waveform; 3] = received.try_into().expect("three recordings");
            Some(Recordings { chirp, received })
        }
    };
    Ok(Simulation { truth, echoes, recordings })
}

/// Correlates each recording with the chirp and detects its echoes.
pub fn detect_echoes(
    received: &[Waveform],
    chirp: &Waveform,
    window: CorrelationWindow,
    peaks: &PeakConfig,
) -> Result<(Vec<EchoSet>, Vec<Option<PeakScan>>)> {
    let mut sets = Vec::with_capacity(received.len());
    let mut scans = Vec::with_capacity(received.len());
    for r in received {
        let m = correlate_windowed(r, chirp, window)?;
        match scan_peaks(&m, peaks) {
            Ok(scan) => {
                sets.push(to_candidate_distances(&scan.peaks)?);
                scans.push(Some(scan));
            }
            Err(PeakError::AllZero) => {
                sets.push(EchoSet::default());
                scans.push(None);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((sets, scans))
}

/// Largest absolute normal-angle error per wall under the best cyclic
/// alignment of the two sorted wall lists, or `None` when the wall counts
/// differ.
pub fn match_walls(truth: &ConvexRoom, estimate: &ConvexRoom) -> Option<Vec<f64>> {
    let (t, e) = (truth.walls(), estimate.walls());
    if t.len() != e.len() {
        return None;
    }
    let k = t.len();
    (0..k)
        .map(|shift| {
            (0..k).map(|i| wrap_angle(e[(i + shift) % k].normal_angle - t[i].normal_angle).abs()).collect::<Vec<f64>>()
        })
        .min_by(|a, b| {
            let ma = a.iter().copied().fold(0.0, f64::max);
            let mb = b.iter().copied().fold(0.0, f64::max);
            ma.total_cmp(&mb)
        })
}

/// Errors of a reconstruction against the truth, all in the `O1` frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Score {
    pub k: usize,
    pub k_true: usize,
    /// Per-wall normal-angle errors, degrees; empty when the counts differ.
    pub wall_angle_errors_deg: Vec<f64>,
    /// Vertex-set Hausdorff distance, meters.
    pub vertex_error_m: f64,
    pub phi_error_rad: f64,
    pub o3_error_m: f64,
}

impl Score {
    pub fn max_wall_angle_error_deg(&self) -> Option<f64> {
        (self.k == self.k_true).then(|| self.wall_angle_errors_deg.iter().copied().fold(0.0, f64::max))
    }

    /// Same wall count and every wall within `tol_deg` of its match.
    pub fn topology_matches(&self, tol_deg: f64) -> bool {
        self.max_wall_angle_error_deg().is_some_and(|e| e <= tol_deg)
    }
}

pub fn score(truth: &Truth, sol: &CandidateSolution) -> Score {
    let wall_angle_errors_deg =
        match_walls(&truth.room, &sol.room).map(|v| v.into_iter().map(f64::to_degrees).collect()).unwrap_or_default();
    Score {
        k: sol.k(),
        k_true: truth.room.len(),
        wall_angle_errors_deg,
        vertex_error_m: hausdorff(truth.room.vertices(), sol.room.vertices()),
        phi_error_rad: wrap_angle(sol.phi - truth.geometry.phi).abs().min(PI),
        o3_error_m: truth.geometry.o3().distance(sol.o3()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    /// `"echoes"` or `"waveforms"`.
    pub source: &'static str,
    pub echoes: [Vec<f64>; 3],
    pub score: Score,
    pub combinations_examined: u64,
    pub solution: SolutionJson,
    /// Wall-clock seconds; left out of the JSON so reports are reproducible.
    #[serde(skip)]
    pub runtime_s: f64,
}

/// Echo sets a reconstruction of `sim` would consume.
pub fn observed_echoes(spec: &ScenarioSpec, sim: &Simulation) -> Result<[EchoSet; 3]> {
    let sets: [EchoSet; 3] = match (&sim.recordings, &spec.acoustics) {
        (Some(rec), Some(a)) => {
            let (sets, _) = detect_echoes(&rec.received, &rec.chirp, a.window, &a.peaks)?;
            sets.try_into().expect("three sets")
        }
        _ => sim.echoes.clone(),
    };
    Ok(match spec.echoes.dedup_tol {
        Some(tol) => sets.map(|s| s.dedup(tol)),
        None => sets,
    })
}

/// Simulates, reconstructs with the scenario's true path lengths, and scores.
pub fn run_pipeline(spec: &ScenarioSpec, cfg: &SlamConfig) -> Result<PipelineReport> {
    let start = Instant::now();
    let sim = simulate(spec)?;
    let sets = observed_echoes(spec, &sim)?;
    let g = sim.truth.geometry;
    let (sol, stats) = slam_with_stats(&sets[0], &sets[1], &sets[2], g.d12, g.d23, cfg)?;
    Ok(PipelineReport {
        source: if sim.recordings.is_some() { "waveforms" } else { "echoes" },
        echoes: sets.map(|s| s.distances().to_vec()),
        score: score(&sim.truth, &sol),
        combinations_examined: stats.examined,
        solution: SolutionJson::from_solution(&sol),
        runtime_s: start.elapsed().as_secs_f64(),
    })
}
