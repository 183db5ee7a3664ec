//! Delaunay triangulation by radial sweep-hull insertion.
//!
//! Points are inserted in order of distance from a seed circumcenter and the
//! convex hull is advanced with edge flips. Orientation and in-circle tests use
//! exact adaptive predicates, so lattice inputs (long collinear walls, many
//! cocircular quadruples) triangulate without special casing. Cocircular
//! quadruples are never flipped; ties resolve by insertion order, which is a
//! deterministic function of the input.
//!
//! Layout follows the usual flat halfedge arrays: triangle `t` owns halfedges
//! `3t, 3t+1, 3t+2`; `triangles[e]` is the origin vertex of halfedge `e` and
//! `halfedges[e]` is its twin or [`EMPTY`] on the convex hull.

use super::{orient, Point};
use crate::error::{Error, Result};

pub const EMPTY: usize = usize::MAX;

#[inline]
pub fn next_halfedge(e: usize) -> usize {
    if e % 3 == 2 {
        e - 2
    } else {
        e + 1
    }
}

#[inline]
pub fn prev_halfedge(e: usize) -> usize {
    if e.is_multiple_of(3) {
        e + 2
    } else {
        e - 1
    }
}

#[derive(Debug, Clone)]
pub struct Delaunay {
    pub points: Vec<Point>,
    pub triangles: Vec<usize>,
    pub halfedges: Vec<usize>,
    /// Convex hull vertex ids.
    pub hull: Vec<usize>,
}

struct Hull {
    prev: Vec<usize>,
    next: Vec<usize>,
    tri: Vec<usize>,
    hash: Vec<usize>,
    start: usize,
    center: Point,
}

impl Hull {
    fn hash_key(&self, p: Point) -> usize {
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        let s = dx.abs() + dy.abs();
        let q = if s == 0.0 { 0.0 } else { dx / s };
        let a = if dy > 0.0 { 3.0 - q } else { 1.0 + q } / 4.0;
        let n = self.hash.len();
        ((a * n as f64).floor() as usize) % n
    }
}

/// `true` when `p, q, r` turn counterclockwise.
#[inline]
fn ccw(p: Point, q: Point, r: Point) -> bool {
    orient(p, q, r) > 0.0
}

#[inline]
fn in_circle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    robust::incircle(a.coord(), b.coord(), c.coord(), d.coord())
}

fn circumradius2(a: Point, b: Point, c: Point) -> f64 {
    match super::circumcenter(a, b, c) {
        Some(cc) => cc.dist2(a),
        None => f64::INFINITY,
    }
}

impl Delaunay {
    /// Triangulates `points`. Fails when fewer than three non-collinear
    /// distinct points are given.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let n = points.len();
        if n < 3 {
            return Err(Error::Degenerate(format!(
                "need at least 3 non-collinear sites, got {n}"
            )));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Degenerate("non-finite site coordinate".into()));
        }

        let (mut min_x, mut min_y, mut max_x, mut max_y) =
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &points {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        let center = Point::new((min_x + max_x) / 2.0, (min_y + max_y) / 2.0);

        let i0 = (0..n)
            .min_by(|&a, &b| points[a].dist2(center).total_cmp(&points[b].dist2(center)))
            .unwrap();
        let p0 = points[i0];
        let i1 = (0..n)
            .filter(|&i| i != i0 && points[i].dist2(p0) > 0.0)
            .min_by(|&a, &b| points[a].dist2(p0).total_cmp(&points[b].dist2(p0)))
            .ok_or_else(|| Error::Degenerate("all sites coincide".into()))?;
        let p1 = points[i1];
        let mut best = f64::INFINITY;
        let mut i2 = EMPTY;
        for (i, &p) in points.iter().enumerate() {
            if i == i0 || i == i1 {
                continue;
            }
            let r = circumradius2(p0, p1, p);
            if r < best {
                best = r;
                i2 = i;
            }
        }
        if i2 == EMPTY || !best.is_finite() {
            return Err(Error::Degenerate("all sites are collinear".into()));
        }
        let (i1, i2) = if ccw(points[i0], points[i1], points[i2]) {
            (i2, i1)
        } else {
            (i1, i2)
        };
        let seed_center = super::circumcenter(points[i0], points[i1], points[i2])
            .ok_or_else(|| Error::Degenerate("all sites are collinear".into()))?;

        let mut ids: Vec<usize> = (0..n).collect();
        let dists: Vec<f64> = points.iter().map(|p| p.dist2(seed_center)).collect();
        ids.sort_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(a.cmp(&b)));

        let hash_size = (n as f64).sqrt().ceil() as usize;
        let mut hull = Hull {
            prev: vec![0; n],
            next: vec![0; n],
            tri: vec![0; n],
            hash: vec![EMPTY; hash_size.max(1)],
            start: i0,
            center: seed_center,
        };
        let max_triangles = 2 * n;
        let mut tri = Delaunay {
            points,
            triangles: Vec::with_capacity(max_triangles * 3),
            halfedges: Vec::with_capacity(max_triangles * 3),
            hull: Vec::new(),
        };

        hull.next[i0] = i1;
        hull.prev[i2] = i1;
        hull.next[i1] = i2;
        hull.prev[i0] = i2;
        hull.next[i2] = i0;
        hull.prev[i1] = i0;
        hull.tri[i0] = 0;
        hull.tri[i1] = 1;
        hull.tri[i2] = 2;
        for &i in &[i0, i1, i2] {
            let k = hull.hash_key(tri.points[i]);
            hull.hash[k] = i;
        }
        tri.add_triangle(i0, i1, i2, EMPTY, EMPTY, EMPTY);

        let mut stack = Vec::new();
        let mut hull_size = 3usize;
        let mut last: Option<Point> = None;
        for &i in &ids {
            let p = tri.points[i];
            if let Some(q) = last {
                if q == p {
                    continue;
                }
            }
            last = Some(p);
            if i == i0 || i == i1 || i == i2 {
                continue;
            }

            let key = hull.hash_key(p);
            let mut start = 0;
            for j in 0..hull.hash.len() {
                start = hull.hash[(key + j) % hull.hash.len()];
                if start != EMPTY && start != hull.next[start] {
                    break;
                }
            }
            start = hull.prev[start];
            let mut e = start;
            let mut visible = true;
            loop {
                let q = hull.next[e];
                if ccw(p, tri.points[e], tri.points[q]) {
                    break;
                }
                e = q;
                if e == start {
                    visible = false;
                    break;
                }
            }
            if !visible {
                // duplicate or numerically inside the hull; cannot happen with
                // exact predicates for distinct points, but never loop forever
                continue;
            }

            let t = tri.add_triangle(e, i, hull.next[e], EMPTY, EMPTY, hull.tri[e]);
            hull.tri[i] = tri.legalize(t + 2, &mut hull, &mut stack);
            hull.tri[e] = t;
            hull_size += 1;

            let mut nn = hull.next[e];
            loop {
                let q = hull.next[nn];
                if !ccw(p, tri.points[nn], tri.points[q]) {
                    break;
                }
                let t = tri.add_triangle(nn, i, q, hull.tri[i], EMPTY, hull.tri[nn]);
                hull.tri[i] = tri.legalize(t + 2, &mut hull, &mut stack);
                hull.next[nn] = nn;
                hull_size -= 1;
                nn = q;
            }

            if e == start {
                loop {
                    let q = hull.prev[e];
                    if !ccw(p, tri.points[q], tri.points[e]) {
                        break;
                    }
                    let t = tri.add_triangle(q, i, e, EMPTY, hull.tri[e], hull.tri[q]);
                    tri.legalize(t + 2, &mut hull, &mut stack);
                    hull.tri[q] = t;
                    hull.next[e] = e;
                    hull_size -= 1;
                    e = q;
                }
            }

            hull.start = e;
            hull.prev[i] = e;
            hull.next[e] = i;
            hull.prev[nn] = i;
            hull.next[i] = nn;
            let k = hull.hash_key(p);
            hull.hash[k] = i;
            let k = hull.hash_key(tri.points[e]);
            hull.hash[k] = e;
        }

        let mut e = hull.start;
        for _ in 0..hull_size {
            tri.hull.push(e);
            e = hull.next[e];
        }
        Ok(tri)
    }

    fn add_triangle(&mut self, i0: usize, i1: usize, i2: usize, a: usize, b: usize, c: usize) -> usize {
        let t = self.triangles.len();
        self.triangles.extend_from_slice(&[i0, i1, i2]);
        self.halfedges.extend_from_slice(&[a, b, c]);
        if a != EMPTY {
            self.halfedges[a] = t;
        }
        if b != EMPTY {
            self.halfedges[b] = t + 1;
        }
        if c != EMPTY {
            self.halfedges[c] = t + 2;
        }
        t
    }

    fn legalize(&mut self, mut a: usize, hull: &mut Hull, stack: &mut Vec<usize>) -> usize {
        stack.clear();
        let mut ar;
        loop {
            let b = self.halfedges[a];
            ar = prev_halfedge(a);
            if b == EMPTY {
                match stack.pop() {
                    Some(x) => {
                        a = x;
                        continue;
                    }
                    None => break,
                }
            }
            let al = next_halfedge(a);
            let bl = prev_halfedge(b);
            let p0 = self.triangles[ar];
            let pr = self.triangles[a];
            let pl = self.triangles[al];
            let p1 = self.triangles[bl];
            let illegal = in_circle(self.points[p0], self.points[pr], self.points[pl], self.points[p1]) < 0.0;
            if illegal {
                self.triangles[a] = p1;
                self.triangles[b] = p0;
                let hbl = self.halfedges[bl];
                let har = self.halfedges[ar];
                if hbl == EMPTY {
                    let mut e = hull.start;
                    loop {
                        if hull.tri[e] == bl {
                            hull.tri[e] = a;
                            break;
                        }
                        e = hull.prev[e];
                        if e == hull.start {
                            break;
                        }
                    }
                }
                self.halfedges[a] = hbl;
                self.halfedges[b] = har;
                self.halfedges[ar] = bl;
                if hbl != EMPTY {
                    self.halfedges[hbl] = a;
                }
                if har != EMPTY {
                    self.halfedges[har] = b;
                }
                self.halfedges[bl] = ar;
                stack.push(next_halfedge(b));
            } else {
                match stack.pop() {
                    Some(x) => a = x,
                    None => break,
                }
            }
        }
        ar
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len() / 3
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        [
            self.points[self.triangles[3 * t]],
            self.points[self.triangles[3 * t + 1]],
            self.points[self.triangles[3 * t + 2]],
        ]
    }

    /// Origin and destination vertex of halfedge `e`.
    pub fn edge_vertices(&self, e: usize) -> (usize, usize) {
        (self.triangles[e], self.triangles[next_halfedge(e)])
    }

    pub fn circumcenter(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        super::circumcenter(a, b, c).unwrap_or_else(|| {
            // zero-area triangles do not survive exact flipping; fall back to centroid
            Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
        })
    }

    /// Squared circumradius of triangle `t`.
    pub fn circumradius2(&self, t: usize) -> f64 {
        let [a, ..] = self.triangle_points(t);
        self.circumcenter(t).dist2(a)
    }

    /// `true` when the four points around the edge `e` lie on one circle.
    pub fn is_cocircular_edge(&self, e: usize) -> bool {
        let f = self.halfedges[e];
        if f == EMPTY {
            return false;
        }
        let t = e / 3;
        let opp = self.triangles[prev_halfedge(f)];
        let [a, b, c] = self.triangle_points(t);
        in_circle(a, b, c, self.points[opp]) == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_delaunay(d: &Delaunay) {
        for e in 0..d.halfedges.len() {
            let f = d.halfedges[e];
            if f != EMPTY {
                assert_eq!(d.halfedges[f], e);
                let (a, b) = d.edge_vertices(e);
                let (c, dd) = d.edge_vertices(f);
                assert_eq!((a, b), (dd, c));
            }
        }
        // empty circumcircle property, brute force
        for t in 0..d.triangle_count() {
            let [a, b, c] = d.triangle_points(t);
            let (a, b, c) = if orient(a, b, c) > 0.0 { (a, b, c) } else { (a, c, b) };
            for p in &d.points {
                assert!(in_circle(a, b, c, *p) <= 0.0, "point inside circumcircle of {t}");
            }
        }
    }

    #[test]
    fn unit_square() {
        let d = Delaunay::new(vec![
            Point::new(0., 0.),
            Point::new(1., 0.),
            Point::new(1., 1.),
            Point::new(0., 1.),
        ])
        .unwrap();
        assert_eq!(d.triangle_count(), 2);
        assert_eq!(d.hull.len(), 4);
        check_delaunay(&d);
    }

    #[test]
    fn lattice_is_delaunay_and_euler_consistent() {
        let mut pts = Vec::new();
        for y in 0..9 {
            for x in 0..11 {
                pts.push(Point::new(x as f64 + 0.5, y as f64 + 0.5));
            }
        }
        let n = pts.len();
        let d = Delaunay::new(pts).unwrap();
        check_delaunay(&d);
        // for a point set with h hull vertices: t = 2n - 2 - h
        assert_eq!(d.triangle_count(), 2 * n - 2 - d.hull.len());
        let area: f64 = (0..d.triangle_count())
            .map(|t| {
                let [a, b, c] = d.triangle_points(t);
                super::super::triangle_area(a, b, c).abs()
            })
            .sum();
        assert!((area - 80.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_input_is_degenerate() {
        let pts = (0..5).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
        assert!(matches!(Delaunay::new(pts), Err(Error::Degenerate(_))));
        assert!(Delaunay::new(vec![Point::new(0., 0.), Point::new(1., 1.)]).is_err());
    }

    #[test]
    fn random_points_are_delaunay() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point> = (0..300)
            .map(|_| Point::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
            .collect();
        let d = Delaunay::new(pts).unwrap();
        check_delaunay(&d);
    }
}
