//! Minimal SVG rendering of rooms and measurement points.

use std::fmt::Write;

use crate::geometry::{ConvexRoom, Point2};

#[derive(Debug, Clone, PartialEq)]
pub struct Layer<'a> {
    pub room: &'a ConvexRoom,
    pub points: &'a [Point2],
    pub stroke: &'a str,
    pub dashed: bool,
    pub label: &'a str,
}

/// Draws each layer's walls, vertices and points, y axis up.
pub fn render(layers: &[Layer<'_>]) -> String {
    let all: Vec<Point2> = layers.iter().flat_map(|l| l.room.vertices().iter().chain(l.points)).copied().collect();
    let (mut lo, mut hi) =
        (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in &all {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if all.is_empty() {
        lo = Point2::new(-1.0, -1.0);
        hi = Point2::new(1.0, 1.0);
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-6);
    let margin = 0.08 * span;
    let size = 600.0;
    let scale = size / (span + 2.0 * margin);
    let map = |p: Point2| ((p.x - lo.x + margin) * scale, (hi.y - p.y + margin) * scale);
    let width = (hi.x - lo.x + 2.0 * margin) * scale;
    let height = (hi.y - lo.y + 2.0 * margin) * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (n, layer) in layers.iter().enumerate() {
        let pts: Vec<String> = layer
            .room
            .vertices()
            .iter()
            .map(|&v| {
                let (x, y) = map(v);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let dash = if layer.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="none" stroke="{}" stroke-width="2"{dash}><title>{}</title></polygon>"#,
            pts.join(" "),
            layer.stroke,
            layer.label
        );
        for &v in layer.room.vertices() {
            let (x, y) = map(v);
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{}"/>"#, layer.stroke);
        }
        let path: Vec<String> = layer
            .points
            .iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        if path.len() > 1 {
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1"{dash}/>"#,
                path.join(" "),
                layer.stroke
            );
        }
        for (i, &p) in layer.points.iter().enumerate() {
            let (x, y) = map(p);
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="none" stroke="{}"/><text x="{:.2}" y="{:.2}" font-size="12" fill="{}">O{}</text>"#,
                layer.stroke,
                x + 6.0,
                y - 6.0 - 14.0 * n as f64,
                layer.stroke,
                i + 1
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Wall;
    use std::f64::consts::PI;

    #[test]
    fn renders_room_and_points() {
        let walls: Vec<Wall> = (0..4).map(|i| Wall::new(i as f64 * PI / 2.0, 0.5)).collect();
        let room = ConvexRoom::from_walls(&walls).unwrap();
        let pts = [Point2::ORIGIN, Point2::new(0.2, 0.0), Point2::new(0.2, 0.1)];
        let ghost = room.mirrored();
        let svg = render(&[
            Layer { room: &room, points: &pts, stroke: "black", dashed: false, label: "estimate" },
            Layer { room: &ghost, points: &pts, stroke: "gray", dashed: true, label: "mirror" },
        ]);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert!(svg.contains(">O3<"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
