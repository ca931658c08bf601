//! Convex rooms as intersections of half-planes.
//!
//! A wall is stored as the angle of its outward normal and its offset from
//! the coordinate origin, so the room is `{p : <p, n_i> <= s_i}`. Walls are
//! kept sorted by normal angle; vertex `i` is the intersection of walls `i`
//! and `i + 1`, which makes the edge of wall `i` run from vertex `i - 1` to
//! vertex `i` in counterclockwise order.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance (meters) for boundary predicates.
pub const GEOMETRY_TOL: f64 = 1e-9;

const ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("half-plane intersection is unbounded")]
    Unbounded,
    #[error("half-plane intersection is empty")]
    Empty,
    #[error("wall {wall} does not contribute an edge")]
    Redundant { wall: usize },
    #[error("two walls share the normal angle {angle} rad")]
    DuplicateAngle { angle: f64 },
    #[error("non-finite wall or point coordinate")]
    NonFinite,
    #[error("point lies on or outside wall {wall}")]
    PointOutside { wall: usize },
    #[error("wall index {index} out of range for a room with {walls} walls")]
    WallIndex { index: usize, walls: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` radians from the +x axis.
    pub fn unit(angle: f64) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Mirror image across the x-axis.
    pub fn mirrored(self) -> Self {
        Self::new(self.x, -self.y)
    }

    /// Counterclockwise rotation about the origin.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(p: [f64; 2]) -> Self {
        Self::new(p[0], p[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Maps an angle into `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let a = normalize_angle(angle);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// A wall line with outward normal at `normal_angle` and signed distance
/// `offset` from the origin along that normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub normal_angle: f64,
    pub offset: f64,
}

impl Wall {
    /// Builds a wall, normalizing the angle into `[0, 2π)`.
    pub fn new(normal_angle: f64, offset: f64) -> Self {
        Self { normal_angle: normalize_angle(normal_angle), offset }
    }

    pub fn normal(&self) -> Point2 {
        Point2::unit(self.normal_angle)
    }

    /// Direction of counterclockwise travel along the wall.
    pub fn tangent(&self) -> Point2 {
        let n = self.normal();
        Point2::new(-n.y, n.x)
    }

    /// `s - <p, n>`: positive inside, zero on the line.
    pub fn clearance(&self, p: Point2) -> f64 {
        self.offset - p.dot(self.normal())
    }

    /// Mirror image of `p` across the wall line.
    pub fn reflect(&self, p: Point2) -> Point2 {
        p + self.normal() * (2.0 * self.clearance(p))
    }

    /// Orthogonal projection of `p` onto the wall line.
    pub fn foot(&self, p: Point2) -> Point2 {
        p + self.normal() * self.clearance(p)
    }

    fn intersect(&self, other: &Wall) -> Point2 {
        let (sa, ca) = self.normal_angle.sin_cos();
        let (sb, cb) = other.normal_angle.sin_cos();
        let det = ca * sb - sa * cb;
        Point2::new((self.offset * sb - other.offset * sa) / det, (ca * other.offset - cb * self.offset) / det)
    }
}

/// Bounded, nonempty convex polygon with no redundant walls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexRoom {
    walls: Vec<Wall>,
    vertices: Vec<Point2>,
    tol: f64,
}

impl ConvexRoom {
    pub fn from_walls(walls: &[Wall]) -> Result<Self, GeometryError> {
        Self::from_walls_with_tol(walls, GEOMETRY_TOL)
    }

    pub fn from_walls_with_tol(walls: &[Wall], tol: f64) -> Result<Self, GeometryError> {
        if walls.iter().any(|w| !w.normal_angle.is_finite() || !w.offset.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if walls.len() < 3 {
            return Err(GeometryError::Unbounded);
        }
        let mut walls: Vec<Wall> = walls.iter().map(|w| Wall::new(w.normal_angle, w.offset)).collect();
        walls.sort_by(|a, b| a.normal_angle.total_cmp(&b.normal_angle));

        let k = walls.len();
        for i in 0..k {
            let next = if i + 1 == k { walls[0].normal_angle + TAU } else { walls[i + 1].normal_angle };
            let gap = next - walls[i].normal_angle;
            if gap <= ANGLE_TOL {
                return Err(GeometryError::DuplicateAngle { angle: walls[i].normal_angle });
            }
            if gap >= PI - ANGLE_TOL {
                return Err(GeometryError::Unbounded);
            }
        }

        let vertices: Vec<Point2> = (0..k).map(|i| walls[i].intersect(&walls[(i + 1) % k])).collect();
        let short_edge = (0..k).find(|&i| edge_length(&walls, &vertices, i) <= tol);
        if let Some(wall) = short_edge {
            return Err(if clipped_is_empty(&walls, tol) {
                GeometryError::Empty
            } else {
                GeometryError::Redundant { wall }
            });
        }
        Ok(Self { walls, vertices, tol })
    }

    /// Builds a room from a convex vertex loop in either winding.
    pub fn from_vertices(vertices: &[Point2]) -> Result<Self, GeometryError> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if vertices.len() < 3 {
            return Err(GeometryError::Unbounded);
        }
        let mut loop_: Vec<Point2> = vertices.to_vec();
        if signed_area(&loop_) < 0.0 {
            loop_.reverse();
        }
        let n = loop_.len();
        let walls: Vec<Wall> = (0..n)
            .map(|i| {
                let a = loop_[i];
                let b = loop_[(i + 1) % n];
                let d = b - a;
                let normal = Point2::new(d.y, -d.x);
                let angle = normal.angle();
                Wall::new(angle, a.dot(Point2::unit(angle)))
            })
            .collect();
        Self::from_walls(&walls)
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn wall(&self, i: usize) -> Result<&Wall, GeometryError> {
        self.walls.get(i).ok_or(GeometryError::WallIndex { index: i, walls: self.walls.len() })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.walls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walls.is_empty()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Endpoints of wall `i`'s edge in counterclockwise order.
    pub fn edge(&self, i: usize) -> (Point2, Point2) {
        let k = self.len();
        (self.vertices[(i + k - 1) % k], self.vertices[i])
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len()).map(|i| edge_length(&self.walls, &self.vertices, i)).sum()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// True if `p` is strictly inside every half-plane by more than the tolerance.
    pub fn contains_point(&self, p: Point2) -> bool {
        self.walls.iter().all(|w| w.clearance(p) > self.tol)
    }

    fn check_inside(&self, p: Point2) -> Result<(), GeometryError> {
        if !p.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        match self.walls.iter().position(|w| w.clearance(p) <= self.tol) {
            Some(wall) => Err(GeometryError::PointOutside { wall }),
            None => Ok(()),
        }
    }

    /// Distance from an interior point to wall `i`'s line.
    pub fn point_wall_distance(&self, p: Point2, i: usize) -> Result<f64, GeometryError> {
        let wall = *self.wall(i)?;
        self.check_inside(p)?;
        Ok(wall.clearance(p))
    }

    /// Distances from an interior point to every wall, in wall order.
    pub fn wall_distances(&self, p: Point2) -> Result<Vec<f64>, GeometryError> {
        self.check_inside(p)?;
        Ok(self.walls.iter().map(|w| w.clearance(p)).collect())
    }

    /// True if the perpendicular foot from `p` onto every wall line lands on
    /// that wall's edge, i.e. every first-order specular path exists.
    pub fn is_feasible_point(&self, p: Point2) -> Result<bool, GeometryError> {
        self.check_inside(p)?;
        Ok((0..self.len()).all(|i| {
            let wall = &self.walls[i];
            let (start, _) = self.edge(i);
            let u = (wall.foot(p) - start).dot(wall.tangent());
            let len = edge_length(&self.walls, &self.vertices, i);
            u >= -self.tol && u <= len + self.tol
        }))
    }

    /// True if every vertex of `other` satisfies all of this room's half-planes.
    pub fn contains_room(&self, other: &ConvexRoom) -> bool {
        other.vertices.iter().all(|&v| self.walls.iter().all(|w| w.clearance(v) >= -self.tol))
    }

    /// The room expressed in a frame rotated by `angle` and then shifted by
    /// `shift`: each point maps to `R(angle) p + shift`.
    pub fn transformed(&self, angle: f64, shift: Point2) -> Result<Self, GeometryError> {
        let walls: Vec<Wall> = self
            .walls
            .iter()
            .map(|w| {
                let theta = w.normal_angle + angle;
                Wall::new(theta, w.offset + shift.dot(Point2::unit(theta)))
            })
            .collect();
        Self::from_walls_with_tol(&walls, self.tol)
    }

    /// Mirror image across the x-axis.
    pub fn mirrored(&self) -> Self {
        let walls: Vec<Wall> = self.walls.iter().map(|w| Wall::new(-w.normal_angle, w.offset)).collect();
        Self::from_walls_with_tol(&walls, self.tol).expect("mirror of a valid room is valid")
    }
}

fn edge_length(walls: &[Wall], vertices: &[Point2], i: usize) -> f64 {
    let k = walls.len();
    let start = vertices[(i + k - 1) % k];
    (vertices[i] - start).dot(walls[i].tangent())
}

fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>()
}

/// Clips a large box by every half-plane and reports whether anything is left.
fn clipped_is_empty(walls: &[Wall], tol: f64) -> bool {
    let scale = 1e6 * (1.0 + walls.iter().map(|w| w.offset.abs()).fold(0.0, f64::max));
    let mut poly = vec![
        Point2::new(-scale, -scale),
        Point2::new(scale, -scale),
        Point2::new(scale, scale),
        Point2::new(-scale, scale),
    ];
    for wall in walls {
        poly = clip_half_plane(&poly, wall);
        if poly.len() < 3 {
            return true;
        }
    }
    signed_area(&poly).abs() <= tol * tol
}

fn clip_half_plane(poly: &[Point2], wall: &Wall) -> Vec<Point2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let ca = wall.clearance(a);
        let cb = wall.clearance(b);
        if ca >= 0.0 {
            out.push(a);
        }
        if (ca >= 0.0) != (cb >= 0.0) {
            let t = ca / (ca - cb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

pub fn room_from_walls(walls: &[Wall]) -> Result<ConvexRoom, GeometryError> {
    ConvexRoom::from_walls(walls)
}

pub fn point_wall_distance(room: &ConvexRoom, p: Point2, i: usize) -> Result<f64, GeometryError> {
    room.point_wall_distance(p, i)
}

pub fn is_feasible_point(room: &ConvexRoom, p: Point2) -> Result<bool, GeometryError> {
    room.is_feasible_point(p)
}

pub fn room_contains(a: &ConvexRoom, b: &ConvexRoom) -> bool {
    a.contains_room(b)
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Point2], b: &[Point2]) -> f64 {
    let directed = |from: &[Point2], to: &[Point2]| {
        from.iter().map(|p| to.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    directed(a, b).max(directed(b, a))
}
