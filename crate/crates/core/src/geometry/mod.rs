//! Geometry kernel: points, Delaunay triangulation, the dual Voronoi graph,
//! alpha shapes, polygon operations and point location.

pub mod alpha;
pub mod delaunay;
pub mod locate;
pub mod polygon;
pub mod voronoi;

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

pub use alpha::{compute_alpha_shapes, AlphaShape, AlphaShapeSet};
pub use delaunay::Delaunay;
pub use locate::{SiteIndex, TriangleLocator};
pub use polygon::{point_in_shape, polygon_union, polygons_from_triangles, ring_signed_area, split_polygon, Polygon};
pub use voronoi::{compute_voronoi, HalfEdge, VoronoiGraph};

/// Tolerance for equidistance checks, in pixels.
pub const EPS_GEO: f64 = 1e-6;
/// Vertex snapping tolerance for polygon rings, in pixels.
pub const EPS_SNAP: f64 = 1e-3;
/// Relative area tolerance.
pub const EPS_AREA_REL: f64 = 1e-6;

/// A 2D point in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn dist2(self, o: Point) -> f64 {
        (self - o).norm2()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }

    pub fn midpoint(self, o: Point) -> Point {
        self.lerp(o, 0.5)
    }

    pub(crate) fn coord(self) -> robust::Coord<f64> {
        robust::Coord {
            x: self.x,
            y: self.y,
        }
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Exact orientation: positive when `a, b, c` turn counterclockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    robust::orient2d(a.coord(), b.coord(), c.coord())
}

/// Signed area of triangle `a, b, c` (positive when counterclockwise).
pub fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Circumcenter of a triangle; `None` when the points are collinear.
pub fn circumcenter(a: Point, b: Point, c: Point) -> Option<Point> {
    let d = b - a;
    let e = c - a;
    let bl = d.norm2();
    let cl = e.norm2();
    let den = d.cross(e);
    if den == 0.0 {
        return None;
    }
    let k = 0.5 / den;
    Some(Point::new(
        a.x + (e.y * bl - d.y * cl) * k,
        a.y + (d.x * cl - e.x * bl) * k,
    ))
}

/// Distance from `p` to segment `a-b`.
pub fn dist_point_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}

/// Proper or touching intersection of segments `p1-p2` and `q1-q2`.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Point, b: Point, p: Point, d: f64| {
        d == 0.0
            && p.x >= a.x.min(b.x)
            && p.x <= a.x.max(b.x)
            && p.y >= a.y.min(b.y)
            && p.y <= a.y.max(b.y)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Length of a polyline.
pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Point-in-triangle test, inclusive of the boundary up to `eps`.
pub fn point_in_triangle(p: Point, a: Point, b: Point, c: Point, eps: f64) -> bool {
    let area = triangle_area(a, b, c);
    if area.abs() < 1e-300 {
        return dist_point_segment(p, a, b) <= eps
            || dist_point_segment(p, b, c) <= eps
            || dist_point_segment(p, c, a) <= eps;
    }
    let s = area.signum();
    let w0 = (b - a).cross(p - a) * s;
    let w1 = (c - b).cross(p - b) * s;
    let w2 = (a - c).cross(p - c) * s;
    let tol = |u: Point, v: Point| eps * u.dist(v);
    w0 >= -tol(a, b) && w1 >= -tol(b, c) && w2 >= -tol(c, a)
}

/// Strict interior test (no boundary).
pub fn point_strictly_in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    let o1 = orient(a, b, p);
    let o2 = orient(b, c, p);
    let o3 = orient(c, a, p);
    (o1 > 0.0 && o2 > 0.0 && o3 > 0.0) || (o1 < 0.0 && o2 < 0.0 && o3 < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circumcenter_of_right_triangle_is_hypotenuse_midpoint() {
        let c = circumcenter(
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(0.0, 2.0),
        )
        .unwrap();
        assert!((c.x - 1.0).abs() < 1e-12 && (c.y - 1.0).abs() < 1e-12);
        assert!(circumcenter(Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0)).is_none());
    }

    #[test]
    fn segment_intersection_cases() {
        let p = Point::new;
        assert!(segments_intersect(p(0., 0.), p(2., 2.), p(0., 2.), p(2., 0.)));
        assert!(!segments_intersect(p(0., 0.), p(1., 0.), p(0., 1.), p(1., 1.)));
        assert!(segments_intersect(p(0., 0.), p(2., 0.), p(1., 0.), p(1., 1.)));
    }

    #[test]
    fn triangle_containment_is_boundary_inclusive() {
        let (a, b, c) = (Point::new(0., 0.), Point::new(4., 0.), Point::new(0., 4.));
        assert!(point_in_triangle(Point::new(1., 1.), a, b, c, 1e-9));
        assert!(point_in_triangle(Point::new(2., 0.), a, b, c, 1e-9));
        assert!(!point_in_triangle(Point::new(3., 3.), a, b, c, 1e-9));
        assert!(!point_strictly_in_triangle(Point::new(2., 0.), a, b, c));
    }
}
