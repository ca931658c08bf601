//! Image-source forward model.
//!
//! Echo distances are half round-trip path lengths: for a co-located
//! loudspeaker and microphone at `p`, the echo through a wall sequence is
//! half the distance from `p` to its image source.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConvexRoom, GeometryError, Point2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForwardError {
    #[error("measurement point {0:?} cannot receive every first-order echo")]
    Infeasible(Point2),
    #[error("reflection order must be at least 1")]
    ZeroOrder,
    #[error("wall sequence must be nonempty without repeated consecutive walls")]
    InvalidSequence,
    #[error("echo distances must be finite and positive, got {0}")]
    InvalidDistance(f64),
    #[error("{labels} labels for {distances} distances")]
    LabelMismatch { distances: usize, labels: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Ordered wall indices of a specular reflection path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WallSequence(Vec<usize>);

impl WallSequence {
    pub fn new(indices: Vec<usize>) -> Result<Self, ForwardError> {
        if indices.is_empty() || indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(ForwardError::InvalidSequence);
        }
        Ok(Self(indices))
    }

    pub fn single(wall: usize) -> Self {
        Self(vec![wall])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }
}

impl std::fmt::Display for WallSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("-"))
    }
}

impl std::str::FromStr for WallSequence {
    type Err = ForwardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let indices = s
            .split('-')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ForwardError::InvalidSequence)?;
        Self::new(indices)
    }
}

/// Echo distances at one measurement point, sorted ascending.
///
/// Kept as a multiset: equal distances (symmetric rooms) stay separate
/// entries because the labeling search selects echoes by index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EchoSet {
    distances: Vec<f64>,
    labels: Vec<WallSequence>,
}

impl EchoSet {
    pub fn new(mut distances: Vec<f64>) -> Result<Self, ForwardError> {
        if let Some(&d) = distances.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(ForwardError::InvalidDistance(d));
        }
        distances.sort_by(f64::total_cmp);
        Ok(Self { distances, labels: Vec::new() })
    }

    pub fn with_labels(distances: Vec<f64>, labels: Vec<WallSequence>) -> Result<Self, ForwardError> {
        if labels.is_empty() {
            return Self::new(distances);
        }
        if labels.len() != distances.len() {
            return Err(ForwardError::LabelMismatch { distances: distances.len(), labels: labels.len() });
        }
        if let Some(&d) = distances.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(ForwardError::InvalidDistance(d));
        }
        let mut pairs: Vec<(f64, WallSequence)> = distances.into_iter().zip(labels).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let (distances, labels) = pairs.into_iter().unzip();
        Ok(Self { distances, labels })
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn labels(&self) -> &[WallSequence] {
        &self.labels
    }

    pub fn is_labeled(&self) -> bool {
        !self.labels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn unlabeled(&self) -> Self {
        Self { distances: self.distances.clone(), labels: Vec::new() }
    }

    /// Collapses entries closer than `tol` to the previous kept entry.
    pub fn dedup(&self, tol: f64) -> Self {
        let mut out = Self::default();
        for (i, &d) in self.distances.iter().enumerate() {
            if out.distances.last().is_some_and(|&last| d - last <= tol) {
                continue;
            }
            out.distances.push(d);
            if self.is_labeled() {
                out.labels.push(self.labels[i].clone());
            }
        }
        out
    }

    /// Adds unlabeled entries, e.g. ceiling and floor echoes.
    pub fn extended(&self, extra: &[f64]) -> Result<Self, ForwardError> {
        let mut d = self.distances.clone();
        d.extend_from_slice(extra);
        Self::new(d)
    }
}

/// Reflects `p` across the wall lines of `seq` in order.
///
/// # Panics
/// If `seq` names a wall index the room does not have.
pub fn image_source(room: &ConvexRoom, p: Point2, seq: &WallSequence) -> Point2 {
    seq.indices().iter().fold(p, |q, &i| room.walls()[i].reflect(q))
}

/// Half the distance from `p` to its image source through `seq`.
pub fn image_distance(room: &ConvexRoom, p: Point2, seq: &WallSequence) -> f64 {
    0.5 * image_source(room, p, seq).distance(p)
}

/// First-order echo distances indexed by wall.
pub fn first_order_distances(room: &ConvexRoom, p: Point2) -> Result<Vec<f64>, ForwardError> {
    if !room.is_feasible_point(p)? {
        return Err(ForwardError::Infeasible(p));
    }
    Ok(room.wall_distances(p)?)
}

/// Every geometric image source up to `max_order` with half-distance at most `d_max`.
pub fn echo_set(room: &ConvexRoom, p: Point2, max_order: usize, d_max: f64) -> Result<EchoSet, ForwardError> {
    if max_order == 0 {
        return Err(ForwardError::ZeroOrder);
    }
    if !room.is_feasible_point(p)? {
        return Err(ForwardError::Infeasible(p));
    }
    let k = room.len();
    let branch = |first: usize| {
        let mut out = Vec::new();
        let mut path = vec![first];
        collect_images(room, p, room.walls()[first].reflect(p), &mut path, max_order, d_max, &mut out);
        out
    };
    #[cfg(feature = "parallel")]
    let pairs: Vec<(f64, WallSequence)> = {
        use rayon::prelude::*;
        (0..k).into_par_iter().flat_map_iter(branch).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let pairs: Vec<(f64, WallSequence)> = (0..k).flat_map(branch).collect();

    let (distances, labels) = pairs.into_iter().unzip();
    EchoSet::with_labels(distances, labels)
}

fn collect_images(
    room: &ConvexRoom,
    p: Point2,
    image: Point2,
    path: &mut Vec<usize>,
    max_order: usize,
    d_max: f64,
    out: &mut Vec<(f64, WallSequence)>,
) {
    let half = 0.5 * image.distance(p);
    if half <= d_max {
        out.push((half, WallSequence(path.clone())));
    }
    if path.len() == max_order {
        return;
    }
    let last = *path.last().expect("path is never empty");
    for next in (0..room.len()).filter(|&i| i != last) {
        path.push(next);
        collect_images(room, p, room.walls()[next].reflect(image), path, max_order, d_max, out);
        path.pop();
    }
}

/// Measurement corruption applied by [`corrupt_echo_set`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corruption {
    /// Standard deviation of the Gaussian perturbation, meters.
    pub sigma: f64,
    /// Number of spurious echoes drawn uniformly from `spurious_range`.
    pub n_spurious: usize,
    pub spurious_range: (f64, f64),
    /// Indices (into the input set) of echoes to remove.
    #[serde(default)]
    pub drop: Vec<usize>,
    /// Entries added verbatim, identical at every measurement point.
    #[serde(default)]
    pub constant: Vec<f64>,
}

impl Corruption {
    pub fn noise(sigma: f64) -> Self {
        Self { sigma, spurious_range: (0.0, 0.0), ..Self::default() }
    }

    /// Floor and ceiling echoes for a trajectory in a horizontal plane:
    /// their distances do not depend on the position in the plane.
    pub fn ceiling_floor(floor_distance: f64, ceiling_distance: f64) -> Self {
        Self { constant: vec![floor_distance, ceiling_distance], spurious_range: (0.0, 0.0), ..Self::default() }
    }
}

/// Applies drop, noise, spurious insertion and constant entries, in that
/// order. Labels are stripped. Deterministic given `seed`.
pub fn corrupt_echo_set(e: &EchoSet, corruption: &Corruption, seed: u64) -> EchoSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<f64> =
        e.distances().iter().enumerate().filter(|(i, _)| !corruption.drop.contains(i)).map(|(_, &d)| d).collect();
    if corruption.sigma > 0.0 {
        let normal = Normal::new(0.0, corruption.sigma).expect("sigma is finite and positive");
        for d in &mut out {
            *d = (*d + normal.sample(&mut rng)).abs().max(f64::MIN_POSITIVE);
        }
    }
    let (lo, hi) = corruption.spurious_range;
    for _ in 0..corruption.n_spurious {
        let d = if hi > lo { rng.random_range(lo..hi) } else { lo };
        out.push(d.max(f64::MIN_POSITIVE));
    }
    out.extend(corruption.constant.iter().copied());
    EchoSet::new(out).expect("corrupted distances stay positive")
}
