//! Room reconstruction and localization from three unlabeled echo sets and
//! the two path lengths between consecutive measurement points.
//!
//! The frame is fixed by the first two points: `O1` at the origin and `O2`
//! at `(d12, 0)`. The turn angle `φ` places `O3` at
//! `O2 + d23 (cos φ, sin φ)`. For wall `i` with normal angle `θ_i` and
//! echo distances `r_{1,i}, r_{2,i}, r_{3,i}`:
//!
//! ```text
//! (r2 - r1) + d12 cos θ       = 0
//! d23 cos(θ - φ) + (r3 - r2)  = 0
//! ```
//!
//! so `cos θ = α = -(r2 - r1) / d12` and `cos(θ - φ) = β = -(r3 - r2) / d23`.
//! Each wall yields four `(θ, φ)` pairs depending on the signs taken for the
//! two arc cosines. The correct echo labeling and sign choice make every
//! wall agree on `φ`; [`slam`] searches labelings for the one whose
//! per-wall `φ` estimates have the smallest variance.

mod search;
pub mod signs;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::EchoSet;
use crate::geometry::{normalize_angle, wrap_angle, ConvexRoom, GeometryError, Point2, Wall, GEOMETRY_TOL};

pub use search::SlamStats;
pub use signs::{circular_mean_var, resolve_signs, sign_families, SignFamily};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error("echo combination is infeasible: |cosine| exceeds 1 + eps")]
    Infeasible,
    #[error("no sign combination satisfies the wall equations")]
    NoFeasibleSigns,
    #[error("candidate room is invalid: {0}")]
    InvalidRoom(#[from] GeometryError),
    #[error("adjacent walls meet at {angle_deg:.1} deg, outside the allowed range")]
    AngleConstraint { angle_deg: f64 },
    #[error("a measurement point falls outside the candidate room")]
    PointsOutside,
    #[error("no wall count K yields a candidate with Var[phi] below the threshold")]
    NoSolution,
    #[error("search examined more than {budget} combinations (raw count for K={k}: {raw})")]
    BudgetExceeded { budget: u64, k: usize, raw: String },
    #[error("combination count overflows 128 bits")]
    Overflow,
    #[error("K = {k} exceeds the number of available echoes {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("invalid input: {0}")]
    Input(&'static str),
}

pub type Result<T, E = ReconstructError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match String::deserialize(d)?.as_str() {
            "+" => Ok(Sign::Plus),
            "-" => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!("invalid sign {other:?}"))),
        }
    }
}

/// Signs of the two arc cosines for one wall: `θ = σ acos α` and
/// `θ - φ = ρ acos β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignPair {
    pub theta: Sign,
    pub turn: Sign,
}

impl SignPair {
    pub const ALL: [SignPair; 4] = [
        SignPair::new(Sign::Plus, Sign::Plus),
        SignPair::new(Sign::Plus, Sign::Minus),
        SignPair::new(Sign::Minus, Sign::Plus),
        SignPair::new(Sign::Minus, Sign::Minus),
    ];

    pub const fn new(theta: Sign, turn: Sign) -> Self {
        Self { theta, turn }
    }

    pub fn flipped(self) -> Self {
        Self::new(self.theta.flipped(), self.turn.flipped())
    }
}

pub type SignAssignment = Vec<SignPair>;

/// Echo indices `[i1, i2, i3]` into the three echo sets, one entry per wall slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EchoAssignment {
    pub slots: Vec<[usize; 3]>,
}

impl EchoAssignment {
    pub fn new(slots: Vec<[usize; 3]>) -> Result<Self> {
        for j in 0..3 {
            let mut seen: Vec<usize> = slots.iter().map(|s| s[j]).collect();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(ReconstructError::Input("echo used twice at one point"));
            }
        }
        Ok(Self { slots })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Selected echo indices at measurement point `j` (0-based), slot order.
    pub fn indices_at(&self, j: usize) -> Vec<usize> {
        self.slots.iter().map(|s| s[j]).collect()
    }
}

/// Path lengths and turn angle of the three-point trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementGeometry {
    pub d12: f64,
    pub d23: f64,
    /// `π - ∠O1O2O3`, signed: positive when `O3` lies above the O1→O2 axis.
    pub phi: f64,
}

impl MeasurementGeometry {
    pub fn new(d12: f64, d23: f64, phi: f64) -> Result<Self> {
        if !(d12 > 0.0 && d23 > 0.0 && d12.is_finite() && d23.is_finite() && phi.is_finite()) {
            return Err(ReconstructError::Input("path lengths must be positive and finite"));
        }
        Ok(Self { d12, d23, phi: wrap_angle(phi) })
    }

    /// Geometry of three world points together with the frame that maps
    /// world coordinates into the `O1`-origin frame.
    pub fn from_points(o1: Point2, o2: Point2, o3: Point2) -> Result<(Self, Frame)> {
        let frame = Frame::new(o1, (o2 - o1).angle());
        let d12 = o1.distance(o2);
        let d23 = o2.distance(o3);
        let leg = frame.to_local(o3) - frame.to_local(o2);
        Ok((Self::new(d12, d23, leg.angle())?, frame))
    }

    pub fn o1(&self) -> Point2 {
        Point2::ORIGIN
    }

    pub fn o2(&self) -> Point2 {
        Point2::new(self.d12, 0.0)
    }

    pub fn o3(&self) -> Point2 {
        self.o2() + Point2::unit(self.phi) * self.d23
    }

    pub fn points(&self) -> [Point2; 3] {
        [self.o1(), self.o2(), self.o3()]
    }

    pub fn is_collinear(&self, tol: f64) -> bool {
        self.phi.sin().abs() <= tol
    }

    pub fn mirrored(&self) -> Self {
        Self { phi: wrap_angle(-self.phi), ..*self }
    }
}

/// Rigid frame with its origin at `origin` and x-axis along `heading`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: Point2,
    pub heading: f64,
}

impl Frame {
    pub fn new(origin: Point2, heading: f64) -> Self {
        Self { origin, heading }
    }

    pub fn to_local(&self, p: Point2) -> Point2 {
        (p - self.origin).rotated(-self.heading)
    }

    pub fn to_world(&self, p: Point2) -> Point2 {
        p.rotated(self.heading) + self.origin
    }

    pub fn room_to_local(&self, room: &ConvexRoom) -> std::result::Result<ConvexRoom, GeometryError> {
        let shift = (-self.origin).rotated(-self.heading);
        room.transformed(-self.heading, shift)
    }
}

/// Per-wall fit of one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallFit {
    /// Wall normal angle in `[0, 2π)`.
    pub theta: f64,
    /// Selected echo distances at `O1`, `O2`, `O3`.
    pub echoes: [f64; 3],
    pub alpha: f64,
    pub beta: f64,
    /// This wall's estimate of the turn angle.
    pub phi: f64,
}

impl WallFit {
    /// `(r2 - r1) + d12 cos θ`.
    pub fn first_leg_residual(&self, d12: f64) -> f64 {
        (self.echoes[1] - self.echoes[0]) + d12 * self.theta.cos()
    }

    /// `d23 cos(θ - φ) + (r3 - r2)`.
    pub fn second_leg_residual(&self, d23: f64, phi: f64) -> f64 {
        d23 * (self.theta - phi).cos() + (self.echoes[2] - self.echoes[1])
    }
}

/// One echo assignment with its resolved signs and the room it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSolution {
    /// Room in the `O1` frame, walls sorted by normal angle.
    pub room: ConvexRoom,
    /// Per-slot fits in assignment order.
    pub fits: Vec<WallFit>,
    /// Circular mean of the per-wall turn estimates.
    pub phi: f64,
    pub var_phi: f64,
    pub geometry: MeasurementGeometry,
    pub assignment: EchoAssignment,
    pub signs: SignAssignment,
}

impl CandidateSolution {
    pub fn k(&self) -> usize {
        self.fits.len()
    }

    pub fn phi_estimates(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.phi).collect()
    }

    pub fn o2(&self) -> Point2 {
        self.geometry.o2()
    }

    pub fn o3(&self) -> Point2 {
        self.geometry.o3()
    }

    /// Largest `|(r2 - r1) + d12 cos θ|` over the walls.
    pub fn max_first_leg_residual(&self) -> f64 {
        self.fits.iter().map(|f| f.first_leg_residual(self.geometry.d12).abs()).fold(0.0, f64::max)
    }

    /// Largest `|d23 cos(θ - φ) + (r3 - r2)|` over the walls, at the mean `φ`.
    pub fn max_second_leg_residual(&self) -> f64 {
        self.fits.iter().map(|f| f.second_leg_residual(self.geometry.d23, self.phi).abs()).fold(0.0, f64::max)
    }
}

/// Allowed interior angle between adjacent walls, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleConstraint {
    pub min_deg: f64,
    pub max_deg: f64,
}

impl AngleConstraint {
    /// Rooms whose corners all lie between 50 and 130 degrees.
    pub const REGULAR_ROOM: AngleConstraint = AngleConstraint { min_deg: 50.0, max_deg: 130.0 };

    pub fn check(&self, room: &ConvexRoom) -> Result<()> {
        let walls = room.walls();
        let k = walls.len();
        for i in 0..k {
            let next = walls[(i + 1) % k].normal_angle;
            let gap = normalize_angle(next - walls[i].normal_angle);
            let interior = (PI - gap).to_degrees();
            if interior < self.min_deg || interior > self.max_deg {
                return Err(ReconstructError::AngleConstraint { angle_deg: interior });
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for AngleConstraint {
    type Err = String;

    /// Parses `"50:130"`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected MIN:MAX, got {s:?}"))?;
        let min_deg: f64 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
        let max_deg: f64 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
        if !(min_deg < max_deg) {
            return Err(format!("empty angle range {s:?}"));
        }
        Ok(Self { min_deg, max_deg })
    }
}

/// Which turn angles a solution may have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiDomain {
    /// `φ ∈ (0, π)`: `O3` above the O1→O2 axis, no mirror ambiguity.
    #[default]
    UpperHalf,
    /// Any turn; every solution comes with its mirror image.
    Full,
}

impl PhiDomain {
    pub fn admits(self, phi: f64) -> bool {
        match self {
            PhiDomain::UpperHalf => phi > 0.0 && phi < PI,
            PhiDomain::Full => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignSearch {
    /// Group the per-wall turn candidates into clusters of width
    /// `2 * angular_tol` and evaluate one sign vector per cluster.
    #[default]
    Clustered,
    /// All `4^K` sign vectors. Practical for `K <= 8`.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlamConfig {
    /// Clamp band for cosines slightly outside `[-1, 1]`.
    pub eps: f64,
    /// Accept a wall count only if its best candidate has `Var[φ] < v_th`.
    pub v_th: f64,
    pub k_min: usize,
    /// Defaults to the smallest echo-set size.
    pub k_max: Option<usize>,
    /// Half-width of the turn-angle clusters, radians.
    pub angular_tol: f64,
    pub angle_constraint: Option<AngleConstraint>,
    pub phi_domain: PhiDomain,
    /// Reject turns within this many radians of straight ahead or straight
    /// back. Near-collinear points fit many rooms almost equally well.
    pub min_turn: f64,
    pub sign_search: SignSearch,
    /// Maximum number of echo combinations the search may examine.
    pub budget: Option<u64>,
    /// Variances within this of the minimum count as ties.
    pub var_tie_tol: f64,
    pub geometry_tol: f64,
    /// Worker threads; `Some(1)` forces the sequential path.
    pub jobs: Option<usize>,
}

impl Default for SlamConfig {
    fn default() -> Self {
        Self {
            eps: 0.05,
            v_th: 1e-3,
            k_min: 3,
            k_max: None,
            angular_tol: 0.02,
            angle_constraint: None,
            phi_domain: PhiDomain::UpperHalf,
            min_turn: 0.1,
            sign_search: SignSearch::Clustered,
            budget: None,
            var_tie_tol: 1e-12,
            geometry_tol: GEOMETRY_TOL,
            jobs: None,
        }
    }
}

impl SlamConfig {
    /// Whether a turn estimate lies in the domain and clear of collinearity.
    pub fn admits_turn(&self, phi: f64) -> bool {
        let phi = wrap_angle(phi);
        self.phi_domain.admits(phi) && phi.abs() >= self.min_turn && PI - phi.abs() >= self.min_turn
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(ReconstructError::Input("eps must be positive"));
        }
        if !(self.v_th > 0.0) {
            return Err(ReconstructError::Input("v_th must be positive"));
        }
        if !(self.min_turn >= 0.0 && self.min_turn < PI / 2.0) {
            return Err(ReconstructError::Input("min_turn must lie in [0, π/2)"));
        }
        if !(self.angular_tol > 0.0 && self.angular_tol < PI) {
            return Err(ReconstructError::Input("angular_tol must lie in (0, π)"));
        }
        if self.k_min < 3 {
            return Err(ReconstructError::Input("a room needs at least three walls"));
        }
        if self.jobs == Some(0) {
            return Err(ReconstructError::Input("jobs must be at least 1"));
        }
        Ok(())
    }
}

/// `α = -(r2 - r1) / d12`, `β = -(r3 - r2) / d23`.
pub fn alpha_beta(r1: f64, r2: f64, r3: f64, d12: f64, d23: f64) -> (f64, f64) {
    (-(r2 - r1) / d12, -(r3 - r2) / d23)
}

/// Snaps a cosine estimate into `[-1, 1]` when it overshoots by less than
/// `eps`; `None` marks the echo combination infeasible.
pub fn feasible_cosine(x: f64, eps: f64) -> Option<f64> {
    if x > -1.0 && x < 1.0 {
        Some(x)
    } else if x >= 1.0 && x < 1.0 + eps {
        Some(1.0)
    } else if x <= -1.0 && x > -1.0 - eps {
        Some(-1.0)
    } else {
        None
    }
}

/// Wall angle in `[0, 2π)` and turn angle in `(-π, π]` for one sign pair.
pub fn phi_from_signs(alpha: f64, beta: f64, signs: SignPair) -> (f64, f64) {
    let theta = signs.theta.value() * alpha.acos();
    let phi = theta - signs.turn.value() * beta.acos();
    (normalize_angle(theta), wrap_angle(phi))
}

/// `C(N1,K) C(N2,K) C(N3,K) (K!)^2`.
pub fn count_assignments(n1: usize, n2: usize, n3: usize, k: usize) -> Result<u128> {
    let n = n1.min(n2).min(n3);
    if k > n {
        return Err(ReconstructError::KTooLarge { k, n });
    }
    let fact = (1..=k as u128).try_fold(1u128, |acc, i| acc.checked_mul(i));
    let fact = fact.ok_or(ReconstructError::Overflow)?;
    [binomial(n1, k), binomial(n2, k), binomial(n3, k), Some(fact), Some(fact)]
        .into_iter()
        .try_fold(1u128, |acc, f| acc.checked_mul(f?))
        .ok_or(ReconstructError::Overflow)
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc.checked_mul(n as u128 - i)? / (i + 1);
    }
    Some(acc)
}

/// Echo distances selected by `assignment`, per slot.
fn selected_echoes(assignment: &EchoAssignment, sets: [&EchoSet; 3]) -> Result<Vec<[f64; 3]>> {
    assignment
        .slots
        .iter()
        .map(|s| {
            let mut out = [0.0; 3];
            for j in 0..3 {
                out[j] = *sets[j].distances().get(s[j]).ok_or(ReconstructError::Input("echo index out of range"))?;
            }
            Ok(out)
        })
        .collect()
}

/// Cosines of every slot after clamping, or `Infeasible`.
fn slot_cosines(echoes: &[[f64; 3]], d12: f64, d23: f64, eps: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut alphas = Vec::with_capacity(echoes.len());
    let mut betas = Vec::with_capacity(echoes.len());
    for r in echoes {
        let (a, b) = alpha_beta(r[0], r[1], r[2], d12, d23);
        alphas.push(feasible_cosine(a, eps).ok_or(ReconstructError::Infeasible)?);
        betas.push(feasible_cosine(b, eps).ok_or(ReconstructError::Infeasible)?);
    }
    Ok((alphas, betas))
}

/// Turns a sign family into a candidate: builds the room in the `O1` frame
/// from the wall angles and the `O1` echoes, then checks the optional
/// corner constraint and that `O2` and `O3` are inside.
pub(crate) fn candidate_from_family(
    echoes: &[[f64; 3]],
    alphas: &[f64],
    betas: &[f64],
    family: &SignFamily,
    assignment: EchoAssignment,
    d12: f64,
    d23: f64,
    cfg: &SlamConfig,
) -> Result<CandidateSolution> {
    let walls: Vec<Wall> = family.thetas.iter().zip(echoes).map(|(&theta, r)| Wall::new(theta, r[0])).collect();
    let room = ConvexRoom::from_walls_with_tol(&walls, cfg.geometry_tol)?;
    if let Some(c) = &cfg.angle_constraint {
        c.check(&room)?;
    }
    let geometry = MeasurementGeometry::new(d12, d23, family.phi)?;
    if !geometry.points().iter().all(|&p| room.contains_point(p)) {
        return Err(ReconstructError::PointsOutside);
    }
    let fits = (0..echoes.len())
        .map(|i| WallFit {
            theta: family.thetas[i],
            echoes: echoes[i],
            alpha: alphas[i],
            beta: betas[i],
            phi: family.phis[i],
        })
        .collect();
    Ok(CandidateSolution {
        room,
        fits,
        phi: family.phi,
        var_phi: family.var,
        geometry,
        assignment,
        signs: family.signs.clone(),
    })
}

/// Evaluates one echo assignment: cosines, sign resolution, room.
pub fn build_solution(
    assignment: &EchoAssignment,
    r1: &EchoSet,
    r2: &EchoSet,
    r3: &EchoSet,
    d12: f64,
    d23: f64,
    cfg: &SlamConfig,
) -> Result<CandidateSolution> {
    cfg.validate()?;
    MeasurementGeometry::new(d12, d23, 0.0)?;
    let echoes = selected_echoes(assignment, [r1, r2, r3])?;
    let (alphas, betas) = slot_cosines(&echoes, d12, d23, cfg.eps)?;
    let families: Vec<SignFamily> = sign_families(&alphas, &betas, cfg.sign_search, cfg.angular_tol)
        .into_iter()
        .filter(|f| cfg.admits_turn(f.phi))
        .collect();
    let best = signs::best_family(&families, cfg.var_tie_tol).ok_or(ReconstructError::NoFeasibleSigns)?;
    candidate_from_family(&echoes, &alphas, &betas, best, assignment.clone(), d12, d23, cfg)
}

fn check_inputs(sets: [&EchoSet; 3], d12: f64, d23: f64, cfg: &SlamConfig) -> Result<()> {
    cfg.validate()?;
    MeasurementGeometry::new(d12, d23, 0.0)?;
    if sets.iter().any(|s| s.len() > 64) {
        return Err(ReconstructError::Input("at most 64 echoes per point are supported"));
    }
    Ok(())
}

/// Full reconstruction: the candidate with the largest admissible wall count.
pub fn slam(
    r1: &EchoSet,
    r2: &EchoSet,
    r3: &EchoSet,
    d12: f64,
    d23: f64,
    cfg: &SlamConfig,
) -> Result<CandidateSolution> {
    slam_with_stats(r1, r2, r3, d12, d23, cfg).map(|(s, _)| s)
}

/// [`slam`] plus search statistics.
///
/// Wall counts are tried from the largest down; the first count whose best
/// candidate beats `v_th` wins, which is the same answer as scanning all
/// counts and keeping the largest admissible one.
pub fn slam_with_stats(
    r1: &EchoSet,
    r2: &EchoSet,
    r3: &EchoSet,
    d12: f64,
    d23: f64,
    cfg: &SlamConfig,
) -> Result<(CandidateSolution, SlamStats)> {
    check_inputs([r1, r2, r3], d12, d23, cfg)?;
    let n = r1.len().min(r2.len()).min(r3.len());
    let k_max = cfg.k_max.unwrap_or(n).min(n);
    let mut stats = SlamStats::default();
    for k in (cfg.k_min..=k_max).rev() {
        let found = search::search_k(r1.distances(), r2.distances(), r3.distances(), d12, d23, k, cfg, &mut stats)?;
        if let Some(best) = search::select_best(found, cfg) {
            stats.k = Some(k);
            return Ok((best, stats));
        }
    }
    Err(ReconstructError::NoSolution)
}

/// Every candidate with `K` walls whose variance is below `v_th`, in
/// deterministic enumeration order. Mirror pairs both appear under
/// [`PhiDomain::Full`].
pub fn slam_candidates(
    r1: &EchoSet,
    r2: &EchoSet,
    r3: &EchoSet,
    d12: f64,
    d23: f64,
    k: usize,
    cfg: &SlamConfig,
) -> Result<Vec<CandidateSolution>> {
    check_inputs([r1, r2, r3], d12, d23, cfg)?;
    let n = r1.len().min(r2.len()).min(r3.len());
    if k > n {
        return Err(ReconstructError::KTooLarge { k, n });
    }
    let mut stats = SlamStats::default();
    search::search_k(r1.distances(), r2.distances(), r3.distances(), d12, d23, k, cfg, &mut stats)
}
