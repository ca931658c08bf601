//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use echoslam::forward::first_order_distances;
use echoslam::geometry::{ConvexRoom, Point2, Wall};
use echoslam::reconstruct::MeasurementGeometry;
use echoslam::EchoSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_square() -> ConvexRoom {
    let walls: Vec<Wall> = (0..4).map(|i| Wall::new(i as f64 * PI / 2.0, 0.5)).collect();
    ConvexRoom::from_walls(&walls).unwrap()
}

/// Random convex K-gon around the origin: sorted normals with every gap
/// in `[0.35, π - 0.35]`, offsets in `[1.5, 3]` m.
pub fn random_polygon(rng: &mut impl Rng, k: usize) -> ConvexRoom {
    loop {
        let start = rng.random_range(0.0..2.0 * PI);
        let mut gaps: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = gaps.iter().sum();
        gaps.iter_mut().for_each(|g| *g *= 2.0 * PI / total);
        if gaps.iter().any(|&g| !(0.35..=PI - 0.35).contains(&g)) {
            continue;
        }
        let mut angle = start;
        let walls: Vec<Wall> = gaps
            .iter()
            .map(|g| {
                let w = Wall::new(angle, rng.random_range(1.5..3.0));
                angle += g;
                w
            })
            .collect();
        if let Ok(room) = ConvexRoom::from_walls(&walls) {
            if room.len() == k && shortest_edge(&room) > 0.3 {
                return room;
            }
        }
    }
}

/// Random parallelogram: corner angles in `[60°, 120°]`, widths in `[2, 4]` m.
pub fn random_parallelogram(rng: &mut impl Rng) -> ConvexRoom {
    let a = rng.random_range(0.0..2.0 * PI);
    let b = a + rng.random_range(PI / 3.0..2.0 * PI / 3.0);
    let (w1, w2) = (rng.random_range(2.0..4.0), rng.random_range(2.0..4.0));
    let (f1, f2) = (rng.random_range(0.35..0.65), rng.random_range(0.35..0.65));
    let walls = [
        Wall::new(a, w1 * f1),
        Wall::new(b, w2 * f2),
        Wall::new(a + PI, w1 * (1.0 - f1)),
        Wall::new(b + PI, w2 * (1.0 - f2)),
    ];
    ConvexRoom::from_walls(&walls).unwrap()
}

fn shortest_edge(room: &ConvexRoom) -> f64 {
    (0..room.len())
        .map(|i| {
            let (a, b) = room.edge(i);
            a.distance(b)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn centroid(room: &ConvexRoom) -> Point2 {
    let v = room.vertices();
    v.iter().fold(Point2::ORIGIN, |acc, &p| acc + p) * (1.0 / v.len() as f64)
}

fn feasible(room: &ConvexRoom, p: Point2, margin: f64) -> bool {
    room.wall_distances(p).is_ok_and(|d| d.iter().all(|&x| x > margin)) && room.is_feasible_point(p).unwrap_or(false)
}

/// Three feasible points with `d12, d23` in `[lo, hi]`, a turn in
/// `(0.35, π - 0.35)` (O3 to the left of O1→O2), and all first-order
/// distances at least `margin` from the walls. `None` if no draw succeeds;
/// some obtuse rooms have almost no feasible region.
pub fn random_trajectory(rng: &mut impl Rng, room: &ConvexRoom, lo: f64, hi: f64, margin: f64) -> Option<[Point2; 3]> {
    let c = centroid(room);
    let reach = room.walls().iter().map(|w| w.clearance(c)).fold(f64::INFINITY, f64::min);
    for _ in 0..20_000 {
        let o1 = c + Point2::unit(rng.random_range(0.0..2.0 * PI)) * rng.random_range(0.0..reach);
        let heading = rng.random_range(0.0..2.0 * PI);
        let o2 = o1 + Point2::unit(heading) * rng.random_range(lo..hi);
        let o3 = o2 + Point2::unit(heading + rng.random_range(0.35..PI - 0.35)) * rng.random_range(lo..hi);
        if [o1, o2, o3].iter().all(|&p| feasible(room, p, margin)) {
            return Some([o1, o2, o3]);
        }
    }
    None
}

/// Draws rooms from `make` until one admits a trajectory.
pub fn room_with_trajectory<R: Rng>(
    rng: &mut R,
    mut make: impl FnMut(&mut R) -> ConvexRoom,
    lo: f64,
    hi: f64,
    margin: f64,
) -> (ConvexRoom, [Point2; 3]) {
    loop {
        let room = make(rng);
        if let Some(pts) = random_trajectory(rng, &room, lo, hi, margin) {
            return (room, pts);
        }
    }
}

/// The instance in the `O1` frame, with unlabeled first-order echoes.
pub struct Instance {
    pub room: ConvexRoom,
    pub geometry: MeasurementGeometry,
    pub echoes: [EchoSet; 3],
}

pub fn instance(room: &ConvexRoom, pts: [Point2; 3]) -> Instance {
    let (geometry, frame) = MeasurementGeometry::from_points(pts[0], pts[1], pts[2]).unwrap();
    let local = frame.room_to_local(room).unwrap();
    let echoes = geometry.points().map(|p| EchoSet::new(first_order_distances(&local, p).unwrap()).unwrap());
    Instance { room: local, geometry, echoes }
}
