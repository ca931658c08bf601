//! Constructive witnesses for what the echoes can and cannot identify:
//! the mirror solution, rooms inflated by parallel-pair echoes, and the
//! second parallelogram that fits when only one path length is known.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::forward::{first_order_distances, image_distance, EchoSet, ForwardError, WallSequence};
use crate::geometry::{hausdorff, normalize_angle, wrap_angle, ConvexRoom, GeometryError, Point2, Wall};
use crate::reconstruct::{
    slam_candidates, CandidateSolution, MeasurementGeometry, PhiDomain, ReconstructError, SignSearch, SlamConfig,
    WallFit,
};

/// Vertex sets closer than this count as the same room.
pub const CONGRUENCE_TOL: f64 = 1e-6;
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmbiguityError {
    #[error("walls {0} and {1} are not parallel")]
    NotParallel(usize, usize),
    #[error("room is not a parallelogram")]
    NotParallelogram,
    #[error("the construction collapses onto the truth or its mirror")]
    DegenerateGeometry,
    #[error("measurement points must not be collinear")]
    Collinear,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
}

/// `A [x3, y3]^T = b` with rows `[cos θ_i, sin θ_i]` and entries
/// `-(r3_i - r1_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearSystem {
    pub a: Vec<[f64; 2]>,
    pub b: Vec<f64>,
}

impl LinearSystem {
    pub fn new(thetas: &[f64], r1: &[f64], r3: &[f64]) -> Self {
        assert!(thetas.len() == r1.len() && r1.len() == r3.len());
        Self {
            a: thetas.iter().map(|t| [t.cos(), t.sin()]).collect(),
            b: r1.iter().zip(r3).map(|(x, z)| -(z - x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), 2, |i, j| self.a[i][j])
    }

    fn augmented(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), 3, |i, j| if j < 2 { self.a[i][j] } else { self.b[i] })
    }

    pub fn rank(&self) -> usize {
        self.matrix().svd(false, false).rank(RANK_TOL)
    }

    pub fn augmented_rank(&self) -> usize {
        self.augmented().svd(false, false).rank(RANK_TOL)
    }

    /// Least-squares solution; `None` when `A` is rank deficient.
    pub fn solve(&self) -> Option<Point2> {
        if self.rank() < 2 {
            return None;
        }
        let a = self.matrix();
        let b = DVector::from_column_slice(&self.b);
        let x = a.svd(true, true).solve(&b, RANK_TOL).ok()?;
        Some(Point2::new(x[0], x[1]))
    }

    /// Largest `|A x - b|` entry.
    pub fn max_residual(&self, x: Point2) -> f64 {
        self.a.iter().zip(&self.b).map(|(row, b)| (row[0] * x.x + row[1] * x.y - b).abs()).fold(0.0, f64::max)
    }
}

/// `(r2 - r1) + d12 cos θ`.
pub fn first_leg_residual(r1: f64, r2: f64, d12: f64, theta: f64) -> f64 {
    (r2 - r1) + d12 * theta.cos()
}

/// `d23 cos(θ - φ) + (r3 - r2)`.
pub fn second_leg_residual(r2: f64, r3: f64, d23: f64, theta: f64, phi: f64) -> f64 {
    d23 * (theta - phi).cos() + (r3 - r2)
}

/// `(r3 - r1) + x3 cos θ + y3 sin θ`.
pub fn direct_residual(r1: f64, r3: f64, o3: Point2, theta: f64) -> f64 {
    (r3 - r1) + o3.x * theta.cos() + o3.y * theta.sin()
}

/// The mirror image of a solution across the O1→O2 axis.
pub fn reflect_solution(sol: &CandidateSolution) -> CandidateSolution {
    let fits =
        sol.fits.iter().map(|f| WallFit { theta: normalize_angle(-f.theta), phi: wrap_angle(-f.phi), ..*f }).collect();
    CandidateSolution {
        room: sol.room.mirrored(),
        fits,
        phi: wrap_angle(-sol.phi),
        var_phi: sol.var_phi,
        geometry: sol.geometry.mirrored(),
        assignment: sol.assignment.clone(),
        signs: sol.signs.iter().map(|s| s.flipped()).collect(),
    }
}

fn are_parallel(room: &ConvexRoom, i: usize, k: usize) -> bool {
    let (a, b) = (room.walls()[i].normal_angle, room.walls()[k].normal_angle);
    wrap_angle(a - b - PI).abs() < 1e-9
}

/// The larger room seen through the third-order echoes `i-k-i` and `k-i-k`
/// of a parallel pair: both walls move out by the pair's width.
pub fn inflate_parallel_pair(
    room: &ConvexRoom,
    points: &[Point2],
    pair: (usize, usize),
) -> Result<ConvexRoom, AmbiguityError> {
    let (i, k) = pair;
    room.wall(i)?;
    room.wall(k)?;
    if i == k || !are_parallel(room, i, k) {
        return Err(AmbiguityError::NotParallel(i, k));
    }
    let p = points.first().copied().unwrap_or_else(|| {
        let v = room.vertices();
        v.iter().fold(Point2::ORIGIN, |acc, &x| acc + x) * (1.0 / v.len() as f64)
    });
    let mut walls = room.walls().to_vec();
    for (w, seq) in [(i, [i, k, i]), (k, [k, i, k])] {
        let wall = room.walls()[w];
        let r = image_distance(room, p, &WallSequence::new(seq.to_vec())?);
        walls[w] = Wall::new(wall.normal_angle, r + wall.normal().dot(p));
    }
    Ok(ConvexRoom::from_walls_with_tol(&walls, room.tol())?)
}

/// True if the vertex sets agree within [`CONGRUENCE_TOL`] directly or
/// after mirroring `b` across the x-axis. Both rooms must be in the same
/// `O1` frame.
pub fn congruent_in_frame(a: &ConvexRoom, b: &ConvexRoom) -> bool {
    mirror_gap(a, b) < CONGRUENCE_TOL
}

/// Smaller of the vertex Hausdorff distances to `b` and to its mirror.
pub fn mirror_gap(a: &ConvexRoom, b: &ConvexRoom) -> f64 {
    let mirrored: Vec<Point2> = b.vertices().iter().map(|v| v.mirrored()).collect();
    hausdorff(a.vertices(), b.vertices()).min(hausdorff(a.vertices(), &mirrored))
}

/// A second parallelogram and `O3` consistent with the same echoes and `d12`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneDistanceAlternative {
    /// Ground truth in the `O1` frame.
    pub truth_room: ConvexRoom,
    pub truth_o3: Point2,
    pub room: ConvexRoom,
    pub o3: Point2,
    /// Wall pairs whose `O1` echoes trade labels.
    pub swapped: Vec<(usize, usize)>,
    /// `A'` and `b'` of the alternative labeling.
    pub system: LinearSystem,
    pub rank_a: usize,
    pub rank_ab: usize,
    /// Per alternative wall: normal angle and echoes at `O1`, `O2`, `O3`.
    pub thetas: Vec<f64>,
    pub echoes: Vec<[f64; 3]>,
    pub first_leg_residual: f64,
    pub direct_residual: f64,
    /// Second-leg residual of the alternative, at its own turn angle, when
    /// the true `d23` is imposed.
    pub second_leg_residual_true_d23: f64,
    /// The same residual minimized over every turn angle.
    pub second_leg_residual_best_phi: f64,
    /// Vertex distance to the truth, minimized over the mirror.
    pub gap: f64,
}

fn parallelogram_pairs(room: &ConvexRoom) -> Result<[(usize, usize); 2], AmbiguityError> {
    if room.len() != 4 || !are_parallel(room, 0, 2) || !are_parallel(room, 1, 3) {
        return Err(AmbiguityError::NotParallelogram);
    }
    Ok([(0, 2), (1, 3)])
}

fn worst_second_leg(thetas: &[f64], echoes: &[[f64; 3]], d23: f64, phi: f64) -> f64 {
    thetas.iter().zip(echoes).map(|(&t, r)| second_leg_residual(r[1], r[2], d23, t, phi).abs()).fold(0.0, f64::max)
}

/// Smallest over `φ` of the largest second-leg residual.
fn best_second_leg(thetas: &[f64], echoes: &[[f64; 3]], d23: f64) -> f64 {
    let worst = |phi: f64| worst_second_leg(thetas, echoes, d23, phi);
    let mut best = (0.0, f64::INFINITY);
    let n = 3600;
    for i in 0..n {
        let phi = -PI + 2.0 * PI * i as f64 / n as f64;
        let v = worst(phi);
        if v < best.1 {
            best = (phi, v);
        }
    }
    let mut step = 2.0 * PI / n as f64;
    for _ in 0..6 {
        let centre = best.0;
        for j in -20..=20 {
            let phi = centre + step * j as f64 / 10.0;
            let v = worst(phi);
            if v < best.1 {
                best = (phi, v);
            }
        }
        step /= 10.0;
    }
    best.1
}

/// Builds another parallelogram and `O3` that reproduce all three echo
/// sets and satisfy both the first-leg relation with `d12` and the direct
/// `O1`–`O3` relation, by trading the `O1` echo labels inside one or both
/// parallel pairs and choosing signs of the sines so that the swapped
/// system keeps rank two.
///
/// Inputs are world coordinates; the result is in the `O1` frame.
pub fn one_distance_counterexample(
    room: &ConvexRoom,
    o1: Point2,
    o2: Point2,
    o3: Point2,
    d12: f64,
) -> Result<OneDistanceAlternative, AmbiguityError> {
    let pairs = parallelogram_pairs(room)?;
    let (geometry, frame) = MeasurementGeometry::from_points(o1, o2, o3)?;
    if geometry.is_collinear(1e-9) {
        return Err(AmbiguityError::Collinear);
    }
    let truth = frame.room_to_local(room)?;
    let truth_o3 = frame.to_local(o3);
    let o2_local = Point2::new(d12, 0.0);
    let r: Vec<Vec<f64>> = [Point2::ORIGIN, o2_local, truth_o3]
        .iter()
        .map(|&p| first_order_distances(&truth, p))
        .collect::<Result<_, _>>()?;

    let options: [&[(usize, usize)]; 3] = [&pairs, &pairs[..1], &pairs[1..]];
    for swapped in options {
        // O1 label of each alternative wall
        let mut source: Vec<usize> = (0..4).collect();
        for &(i, k) in swapped {
            source.swap(i, k);
        }
        let echoes: Vec<[f64; 3]> = (0..4).map(|w| [r[0][source[w]], r[1][w], r[2][w]]).collect();
        let cosines: Option<Vec<f64>> = echoes
            .iter()
            .map(|e| {
                let c = -(e[1] - e[0]) / d12;
                (c.abs() <= 1.0 + 1e-12).then(|| c.clamp(-1.0, 1.0))
            })
            .collect();
        let Some(cosines) = cosines else { continue };
        for code in 0..16u32 {
            let thetas: Vec<f64> = cosines
                .iter()
                .enumerate()
                .map(|(w, &c)| {
                    let s = (1.0 - c * c).sqrt();
                    let s = if code >> w & 1 == 0 { s } else { -s };
                    normalize_angle(s.atan2(c))
                })
                .collect();
            let r1: Vec<f64> = echoes.iter().map(|e| e[0]).collect();
            let r3: Vec<f64> = echoes.iter().map(|e| e[2]).collect();
            let system = LinearSystem::new(&thetas, &r1, &r3);
            let (rank_a, rank_ab) = (system.rank(), system.augmented_rank());
            if rank_a != 2 || rank_ab != 2 {
                continue;
            }
            let Some(alt_o3) = system.solve() else { continue };
            let walls: Vec<Wall> = thetas.iter().zip(&r1).map(|(&t, &s)| Wall::new(t, s)).collect();
            let Ok(alt) = ConvexRoom::from_walls_with_tol(&walls, truth.tol()) else {
                continue;
            };
            if ![Point2::ORIGIN, o2_local, alt_o3].iter().all(|&p| alt.contains_point(p)) {
                continue;
            }
            let gap = mirror_gap(&alt, &truth);
            if gap < CONGRUENCE_TOL {
                continue;
            }
            let first_leg = thetas
                .iter()
                .zip(&echoes)
                .map(|(&t, e)| first_leg_residual(e[0], e[1], d12, t).abs())
                .fold(0.0, f64::max);
            let direct = thetas
                .iter()
                .zip(&echoes)
                .map(|(&t, e)| direct_residual(e[0], e[2], alt_o3, t).abs())
                .fold(0.0, f64::max);
            return Ok(OneDistanceAlternative {
                truth_room: truth,
                truth_o3,
                room: alt,
                o3: alt_o3,
                swapped: swapped.to_vec(),
                system,
                rank_a,
                rank_ab,
                second_leg_residual_true_d23: worst_second_leg(
                    &thetas,
                    &echoes,
                    geometry.d23,
                    (alt_o3 - o2_local).angle(),
                ),
                second_leg_residual_best_phi: best_second_leg(&thetas, &echoes, geometry.d23),
                thetas,
                echoes,
                first_leg_residual: first_leg,
                direct_residual: direct,
                gap,
            });
        }
    }
    Err(AmbiguityError::DegenerateGeometry)
}

/// Whether the wall distances of `(room, points)` match the given sets.
/// Specular-path feasibility is not checked.
pub fn reproduces_echoes(room: &ConvexRoom, points: &[Point2], sets: &[EchoSet], tol: f64) -> bool {
    points.len() == sets.len()
        && points.iter().zip(sets).all(|(&p, set)| match room.wall_distances(p) {
            Ok(d) => {
                let mut d = d;
                d.sort_by(f64::total_cmp);
                d.len() == set.len() && d.iter().zip(set.distances()).all(|(a, b)| (a - b).abs() <= tol)
            }
            Err(_) => false,
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Unique up to reflection.
    Recoverable,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    /// Known path lengths, e.g. `["d12", "d23"]`.
    pub known: Vec<&'static str>,
    pub room: &'static str,
    pub expected: Verdict,
    pub observed: Verdict,
    pub detail: String,
}

impl TableRow {
    pub fn agrees(&self) -> bool {
        self.expected == self.observed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub rows: Vec<TableRow>,
}

impl FeasibilityReport {
    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(TableRow::agrees)
    }
}

impl std::fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in &self.rows {
            let known = if row.known.is_empty() { "none".to_string() } else { row.known.join(", ") };
            let verdict = |v: Verdict| match v {
                Verdict::Recoverable => "yes",
                Verdict::Ambiguous => "no",
            };
            writeln!(
                f,
                "{known:<16} {:<14} expected {:<3} observed {:<3} {}  {}",
                row.room,
                verdict(row.expected),
                verdict(row.observed),
                if row.agrees() { "ok" } else { "MISMATCH" },
                row.detail
            )?;
        }
        Ok(())
    }
}

/// Demo pentagon and trajectory.
pub fn demo_pentagon() -> (ConvexRoom, [Point2; 3]) {
    let room = ConvexRoom::from_vertices(&[
        Point2::new(-1.6, -1.1),
        Point2::new(1.7, -1.3),
        Point2::new(2.1, 0.9),
        Point2::new(0.2, 1.8),
        Point2::new(-1.9, 0.7),
    ])
    .expect("demo pentagon is convex");
    (room, [Point2::new(-0.3, -0.2), Point2::new(0.35, -0.1), Point2::new(0.45, 0.5)])
}

/// Demo parallelogram and trajectory; `O1` sits near the centre so the
/// label trade of the one-distance construction is feasible.
pub fn demo_parallelogram() -> (ConvexRoom, [Point2; 3]) {
    let walls = [Wall::new(0.2, 1.6), Wall::new(1.9, 1.1), Wall::new(0.2 + PI, 1.5), Wall::new(1.9 + PI, 1.2)];
    let room = ConvexRoom::from_walls(&walls).expect("demo parallelogram is valid");
    (room, [Point2::new(0.0, 0.0), Point2::new(0.45, 0.2), Point2::new(0.3, 0.7)])
}

/// Distinct zero-variance rooms for the given truth, up to reflection.
fn distinct_solutions(
    room: &ConvexRoom,
    pts: &[Point2; 3],
    d13: Option<f64>,
) -> Result<Vec<CandidateSolution>, AmbiguityError> {
    let (g, frame) = MeasurementGeometry::from_points(pts[0], pts[1], pts[2])?;
    let local = frame.room_to_local(room)?;
    let sets: Vec<EchoSet> = g
        .points()
        .iter()
        .map(|&p| EchoSet::new(first_order_distances(&local, p)?))
        .collect::<Result<_, ForwardError>>()?;
    let cfg = SlamConfig {
        phi_domain: PhiDomain::Full,
        sign_search: SignSearch::Clustered,
        v_th: 1e-12,
        ..SlamConfig::default()
    };
    let k = local.len();
    let mut found = slam_candidates(&sets[0], &sets[1], &sets[2], g.d12, g.d23, k, &cfg)?;
    if let Some(d13) = d13 {
        found.retain(|c| (c.o3().norm() - d13).abs() < 1e-6);
    }
    let mut distinct: Vec<CandidateSolution> = Vec::new();
    for c in found {
        if !distinct.iter().any(|d| congruent_in_frame(&d.room, &c.room)) {
            distinct.push(c);
        }
    }
    Ok(distinct)
}

/// Runs the four geometry-knowledge scenarios: all three path lengths,
/// the two consecutive ones, one, and none.
pub fn feasibility_table_demo() -> Result<FeasibilityReport, AmbiguityError> {
    let (pentagon, pp) = demo_pentagon();
    let (para, qp) = demo_parallelogram();
    let mut rows = Vec::with_capacity(4);

    let d13 = pp[0].distance(pp[2]);
    for (known, d13) in [(vec!["d12", "d23", "d13"], Some(d13)), (vec!["d12", "d23"], None)] {
        let sols = distinct_solutions(&pentagon, &pp, d13)?;
        let observed = if sols.len() == 1 { Verdict::Recoverable } else { Verdict::Ambiguous };
        rows.push(TableRow {
            known,
            room: "pentagon",
            expected: Verdict::Recoverable,
            observed,
            detail: format!("{} solution(s) up to reflection", sols.len()),
        });
    }

    let d12 = qp[0].distance(qp[1]);
    let alt = one_distance_counterexample(&para, qp[0], qp[1], qp[2], d12);
    let (observed, detail) = match &alt {
        Ok(a) => (
            Verdict::Ambiguous,
            format!("alternative differs by {:.3} m, rank(A')={} rank([A',b'])={}", a.gap, a.rank_a, a.rank_ab),
        ),
        Err(e) => (Verdict::Recoverable, format!("no alternative: {e}")),
    };
    rows.push(TableRow { known: vec!["d12"], room: "parallelogram", expected: Verdict::Ambiguous, observed, detail });

    // without any path length, O3 may be replaced by its point reflection
    // through the centre of the parallelogram: every echo set is unchanged
    let centre = para.vertices().iter().fold(Point2::ORIGIN, |acc, &v| acc + v) * 0.25;
    let moved = centre * 2.0 - qp[2];
    let sets: Vec<EchoSet> =
        qp.iter().map(|&p| EchoSet::new(first_order_distances(&para, p)?)).collect::<Result<_, ForwardError>>()?;
    let same = reproduces_echoes(&para, &[qp[0], qp[1], moved], &sets, 1e-9);
    let shape_alt = alt.is_ok();
    rows.push(TableRow {
        known: vec![],
        room: "parallelogram",
        expected: Verdict::Ambiguous,
        observed: if same || shape_alt { Verdict::Ambiguous } else { Verdict::Recoverable },
        detail: format!(
            "O3 moved by {:.3} m with identical echoes: {same}; alternative shape: {shape_alt}",
            moved.distance(qp[2])
        ),
    });
    Ok(FeasibilityReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::first_order_distances;
    use crate::reconstruct::slam;

    fn unit_square() -> ConvexRoom {
        let walls: Vec<Wall> = (0..4).map(|i| Wall::new(i as f64 * PI / 2.0, 0.5)).collect();
        ConvexRoom::from_walls(&walls).unwrap()
    }

    fn square_solution() -> CandidateSolution {
        let room = unit_square();
        let pts = [Point2::new(0.0, 0.0), Point2::new(0.2, 0.0), Point2::new(0.2, 0.1)];
        let e: Vec<EchoSet> =
            pts.iter().map(|&p| EchoSet::new(first_order_distances(&room, p).unwrap()).unwrap()).collect();
        slam(&e[0], &e[1], &e[2], 0.2, 0.1, &SlamConfig::default()).unwrap()
    }

    #[test]
    fn reflection_of_square_solution() {
        let sol = square_solution();
        let m = reflect_solution(&sol);
        assert!((m.phi + PI / 2.0).abs() < 1e-7);
        assert!(m.o3().distance(Point2::new(0.2, -0.1)) < 1e-6);
        let back = reflect_solution(&m);
        assert!(back.o3().distance(sol.o3()) < 1e-15);
        assert!(hausdorff(back.room.vertices(), sol.room.vertices()) < 1e-12);
        assert!((m.max_first_leg_residual() - sol.max_first_leg_residual()).abs() < 1e-15);
        assert!((m.max_second_leg_residual() - sol.max_second_leg_residual()).abs() < 1e-15);
        // the mirrored configuration hears the same echoes
        let sets: Vec<EchoSet> = sol
            .geometry
            .points()
            .iter()
            .map(|&p| EchoSet::new(first_order_distances(&sol.room, p).unwrap()).unwrap())
            .collect();
        assert!(reproduces_echoes(&m.room, &m.geometry.points(), &sets, 1e-9));
    }

    #[test]
    fn inflating_square_x_walls() {
        let room = unit_square();
        let p = Point2::new(0.1, -0.2);
        let big = inflate_parallel_pair(&room, &[p], (0, 2)).unwrap();
        assert!((big.walls()[0].offset - 1.5).abs() < 1e-12);
        assert!((big.walls()[2].offset - 1.5).abs() < 1e-12);
        assert!((big.walls()[1].offset - 0.5).abs() < 1e-12);
        assert!(big.contains_room(&room) && !room.contains_room(&big));
        // differences between points are preserved
        let q = Point2::new(-0.3, 0.25);
        let (dp, dq) = (big.wall_distances(p).unwrap(), big.wall_distances(q).unwrap());
        let (sp, sq) = (room.wall_distances(p).unwrap(), room.wall_distances(q).unwrap());
        for w in 0..4 {
            assert!(((dp[w] - dq[w]) - (sp[w] - sq[w])).abs() < 1e-12);
        }
        assert_eq!(inflate_parallel_pair(&room, &[p], (0, 1)), Err(AmbiguityError::NotParallel(0, 1)));
    }

    #[test]
    fn rectangle_counterexample() {
        let walls = [Wall::new(0.0, 1.0), Wall::new(PI / 2.0, 0.5), Wall::new(PI, 1.0), Wall::new(3.0 * PI / 2.0, 0.5)];
        let room = ConvexRoom::from_walls(&walls).unwrap();
        let o1 = Point2::new(0.2, 0.1);
        let o2 = o1 + Point2::new(0.3, 0.0);
        let o3 = o1 + Point2::new(0.25, 0.2);
        let alt = one_distance_counterexample(&room, o1, o2, o3, 0.3).unwrap();
        assert_eq!((alt.rank_a, alt.rank_ab), (2, 2));
        assert!(alt.first_leg_residual <= 1e-9);
        assert!(alt.direct_residual <= 1e-9);
        assert!(alt.gap >= 1e-3);
        // independent solve of the 4x2 system through the normal equations
        let (mut ata, mut atb) = ([[0.0; 2]; 2], [0.0; 2]);
        for (row, b) in alt.system.a.iter().zip(&alt.system.b) {
            for i in 0..2 {
                atb[i] += row[i] * b;
                for j in 0..2 {
                    ata[i][j] += row[i] * row[j];
                }
            }
        }
        let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[1][0];
        let x = (atb[0] * ata[1][1] - atb[1] * ata[0][1]) / det;
        let y = (ata[0][0] * atb[1] - ata[1][0] * atb[0]) / det;
        assert!(alt.o3.distance(Point2::new(x, y)) < 1e-9);
        let truth_sets: Vec<EchoSet> = [Point2::ORIGIN, Point2::new(0.3, 0.0), alt.truth_o3]
            .iter()
            .map(|&p| EchoSet::new(first_order_distances(&alt.truth_room, p).unwrap()).unwrap())
            .collect();
        assert!(reproduces_echoes(&alt.room, &[Point2::ORIGIN, Point2::new(0.3, 0.0), alt.o3], &truth_sets, 1e-9));
        assert!(alt.second_leg_residual_true_d23 > 1e-3);
    }

    #[test]
    fn non_parallelogram_is_rejected() {
        let (pentagon, p) = demo_pentagon();
        assert_eq!(
            one_distance_counterexample(&pentagon, p[0], p[1], p[2], 0.5),
            Err(AmbiguityError::NotParallelogram)
        );
        let trapezoid = ConvexRoom::from_vertices(&[
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(0.5, 1.0),
            Point2::new(-0.5, 1.0),
        ])
        .unwrap();
        assert_eq!(
            one_distance_counterexample(&trapezoid, Point2::ORIGIN, Point2::new(0.2, 0.0), Point2::new(0.2, 0.2), 0.2),
            Err(AmbiguityError::NotParallelogram)
        );
    }

    #[test]
    fn linear_system_rank() {
        let s = LinearSystem::new(&[0.0, PI / 2.0, PI], &[0.5, 0.5, 0.5], &[0.3, 0.4, 0.7]);
        assert_eq!(s.rank(), 2);
        assert_eq!(s.augmented_rank(), 2);
        let x = s.solve().unwrap();
        assert!(x.distance(Point2::new(0.2, 0.1)) < 1e-12);
        assert!(s.max_residual(x) < 1e-12);
        let bad = LinearSystem::new(&[0.0, PI / 2.0, PI], &[0.5, 0.5, 0.5], &[0.3, 0.4, 0.5]);
        assert_eq!(bad.augmented_rank(), 3);
    }

    #[test]
    fn table_rows_match_expectations() {
        let report = feasibility_table_demo().unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.all_agree(), "{report}");
    }
}
