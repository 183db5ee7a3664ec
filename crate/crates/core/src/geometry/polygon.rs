//! Polygons with holes: union by edge cancellation, splitting along a chord,
//! even-odd containment.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{dist_point_segment, orient, Point, EPS_SNAP};
use crate::error::{Error, Result};

/// Outer ring counterclockwise (y-up), holes clockwise. Rings are stored
/// without repeating the first point.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polygon {
    pub outer: Vec<Point>,
    pub holes: Vec<Vec<Point>>,
}

impl Polygon {
    pub fn new(outer: Vec<Point>, holes: Vec<Vec<Point>>) -> Self {
        let mut p = Polygon { outer, holes };
        p.normalize();
        p
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Polygon::new(
            vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
            ],
            Vec::new(),
        )
    }

    /// Force ring orientations to the convention.
    pub fn normalize(&mut self) {
        if ring_signed_area(&self.outer) < 0.0 {
            self.outer.reverse();
        }
        for h in &mut self.holes {
            if ring_signed_area(h) > 0.0 {
                h.reverse();
            }
        }
    }

    pub fn area(&self) -> f64 {
        ring_signed_area(&self.outer).abs() - self.holes.iter().map(|h| ring_signed_area(h).abs()).sum::<f64>()
    }

    pub fn rings(&self) -> impl Iterator<Item = &Vec<Point>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn contains(&self, p: Point) -> bool {
        let rings: Vec<Vec<Point>> = self.rings().cloned().collect();
        point_in_shape(p, &rings)
    }

    pub fn on_boundary(&self, p: Point, eps: f64) -> bool {
        self.rings().any(|r| ring_edges(r).any(|(a, b)| dist_point_segment(p, a, b) <= eps))
    }

    fn directed_edges(&self) -> Vec<(Point, Point)> {
        self.rings().flat_map(|r| ring_edges(r)).collect()
    }
}

pub fn ring_signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut s = 0.0;
    for i in 0..n {
        s += ring[i].cross(ring[(i + 1) % n]);
    }
    s / 2.0
}

fn ring_edges(ring: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    let n = ring.len();
    (0..n).map(move |i| (ring[i], ring[(i + 1) % n]))
}

/// Even-odd containment over a set of closed rings; points on a ring count
/// as inside.
pub fn point_in_shape(p: Point, rings: &[Vec<Point>]) -> bool {
    let mut inside = false;
    for ring in rings {
        for (a, b) in ring_edges(ring) {
            if dist_point_segment(p, a, b) <= 1e-9 {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

type Key = (i64, i64);

fn key(p: Point) -> Key {
    ((p.x / EPS_SNAP).round() as i64, (p.y / EPS_SNAP).round() as i64)
}

/// Splits every edge at vertices of other edges lying on its interior, so
/// that shared boundaries become exactly matching opposite edge pairs.
fn split_t_junctions(edges: Vec<(Point, Point)>) -> Vec<(Point, Point)> {
    const CELL: f64 = 4.0;
    let mut grid: HashMap<(i64, i64), Vec<Point>> = HashMap::new();
    let cell_of = |p: Point| ((p.x / CELL).floor() as i64, (p.y / CELL).floor() as i64);
    let mut seen: HashMap<Key, ()> = HashMap::new();
    for &(a, _) in &edges {
        if seen.insert(key(a), ()).is_none() {
            grid.entry(cell_of(a)).or_default().push(a);
        }
    }
    let mut out = Vec::with_capacity(edges.len());
    for (a, b) in edges {
        let len2 = a.dist2(b);
        if len2 <= EPS_SNAP * EPS_SNAP {
            continue;
        }
        let (c0, c1) = (cell_of(Point::new(a.x.min(b.x), a.y.min(b.y))), cell_of(Point::new(a.x.max(b.x), a.y.max(b.y))));
        let mut cuts: Vec<(f64, Point)> = Vec::new();
        for cx in c0.0 - 1..=c1.0 + 1 {
            for cy in c0.1 - 1..=c1.1 + 1 {
                if let Some(ps) = grid.get(&(cx, cy)) {
                    for &p in ps {
                        let t = (p - a).dot(b - a) / len2;
                        if t <= 0.0 || t >= 1.0 {
                            continue;
                        }
                        if key(p) == key(a) || key(p) == key(b) {
                            continue;
                        }
                        if dist_point_segment(p, a, b) <= EPS_SNAP {
                            cuts.push((t, p));
                        }
                    }
                }
            }
        }
        if cuts.is_empty() {
            out.push((a, b));
            continue;
        }
        cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut prev = a;
        for (_, p) in cuts {
            if key(p) != key(prev) {
                out.push((prev, p));
                prev = p;
            }
        }
        if key(prev) != key(b) {
            out.push((prev, b));
        }
    }
    out
}

/// Removes pairs of opposite directed edges (shared internal boundaries).
fn cancel_edges(edges: Vec<(Point, Point)>) -> Vec<(Point, Point)> {
    let mut count: HashMap<(Key, Key), i64> = HashMap::new();
    let mut rep: HashMap<Key, Point> = HashMap::new();
    let mut order: Vec<(Key, Key)> = Vec::new();
    for (a, b) in edges {
        let (ka, kb) = (key(a), key(b));
        if ka == kb {
            continue;
        }
        rep.entry(ka).or_insert(a);
        rep.entry(kb).or_insert(b);
        let (lo, hi, s) = if ka < kb { (ka, kb, 1) } else { (kb, ka, -1) };
        let c = count.entry((lo, hi)).or_insert_with(|| {
            order.push((lo, hi));
            0
        });
        *c += s;
    }
    let mut out = Vec::new();
    for k in order {
        let c = count[&k];
        let (a, b) = (rep[&k.0], rep[&k.1]);
        for _ in 0..c.abs() {
            if c > 0 {
                out.push((a, b));
            } else {
                out.push((b, a));
            }
        }
    }
    out
}

/// Links directed boundary edges (region on the left) into closed rings.
/// At pinch vertices the tightest wedge is followed, so every ring is simple.
pub(crate) fn chain_rings(edges: Vec<(Point, Point)>) -> Vec<Vec<Point>> {
    let mut outgoing: HashMap<Key, Vec<usize>> = HashMap::new();
    for (i, &(a, _)) in edges.iter().enumerate() {
        outgoing.entry(key(a)).or_default().push(i);
    }
    let mut used = vec![false; edges.len()];
    let mut rings = Vec::new();
    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        let mut ring = Vec::new();
        let mut cur = start;
        loop {
            used[cur] = true;
            let (a, b) = edges[cur];
            ring.push(a);
            let back = a - b;
            let cands = outgoing.get(&key(b)).map(|v| v.as_slice()).unwrap_or(&[]);
            // first unused outgoing edge met rotating clockwise from the reversed incoming edge
            let mut best: Option<(f64, usize)> = None;
            for &c in cands {
                if used[c] && c != start {
                    continue;
                }
                let d = edges[c].1 - edges[c].0;
                let ang = cw_angle(back, d);
                if best.is_none_or(|(ba, _)| ang < ba) {
                    best = Some((ang, c));
                }
            }
            match best {
                Some((_, c)) if c == start => break,
                Some((_, c)) => cur = c,
                None => break,
            }
        }
        let ring = simplify_ring(ring);
        if ring.len() >= 3 && ring_signed_area(&ring).abs() > 0.0 {
            rings.push(ring);
        }
    }
    rings
}

/// Clockwise angle from `from` to `to` in (0, 2π].
fn cw_angle(from: Point, to: Point) -> f64 {
    let a = from.y.atan2(from.x) - to.y.atan2(to.x);
    let tau = std::f64::consts::TAU;
    let mut a = a.rem_euclid(tau);
    if a <= 1e-12 {
        a = tau;
    }
    a
}

/// Drops collinear interior vertices.
fn simplify_ring(ring: Vec<Point>) -> Vec<Point> {
    let n = ring.len();
    if n < 4 {
        return ring;
    }
    let mut out: Vec<Point> = Vec::with_capacity(n);
    for i in 0..n {
        let prev = ring[(i + n - 1) % n];
        let next = ring[(i + 1) % n];
        let p = ring[i];
        let collinear = orient(prev, p, next) == 0.0 && (p - prev).dot(next - p) > 0.0;
        if !collinear {
            out.push(p);
        }
    }
    out
}

/// Groups oriented rings into polygons: counterclockwise rings are outers,
/// clockwise rings are holes assigned to the smallest enclosing outer.
pub(crate) fn assemble(rings: Vec<Vec<Point>>) -> Vec<Polygon> {
    let (outers, holes): (Vec<_>, Vec<_>) = rings.into_iter().partition(|r| ring_signed_area(r) > 0.0);
    let mut polys: Vec<Polygon> = outers
        .into_iter()
        .map(|o| Polygon {
            outer: o,
            holes: Vec::new(),
        })
        .collect();
    for h in holes {
        let probe = interior_probe(&h);
        let owner = polys
            .iter()
            .enumerate()
            .filter(|(_, p)| point_in_shape(probe, std::slice::from_ref(&p.outer)))
            .min_by(|a, b| ring_signed_area(&a.1.outer).total_cmp(&ring_signed_area(&b.1.outer)))
            .map(|(i, _)| i);
        if let Some(i) = owner {
            polys[i].holes.push(h);
        }
    }
    polys
}

/// A point just beside the first edge of a hole, on the material side.
fn interior_probe(ring: &[Point]) -> Point {
    let (a, b) = (ring[0], ring[1]);
    let m = a.midpoint(b);
    let d = b - a;
    let n = Point::new(-d.y, d.x) * (1e-4 / d.norm().max(1e-12));
    // hole is clockwise, so its exterior (the material) is to the left
    m + n
}

/// Polygons covered by a soup of triangles (any orientation).
pub fn polygons_from_triangles(tris: &[[Point; 3]]) -> Vec<Polygon> {
    let mut edges = Vec::with_capacity(tris.len() * 3);
    for &[a, b, c] in tris {
        let o = orient(a, b, c);
        if o == 0.0 {
            continue;
        }
        let (a, b, c) = if o > 0.0 { (a, b, c) } else { (a, c, b) };
        edges.push((a, b));
        edges.push((b, c));
        edges.push((c, a));
    }
    let edges = cancel_edges(split_t_junctions(edges));
    assemble(chain_rings(edges))
}

/// Union of polygons that share boundary segments. Inputs that do not form a
/// single connected region are rejected.
pub fn polygon_union(polys: &[Polygon]) -> Result<Polygon> {
    match polys.len() {
        0 => return Err(Error::Polygon("union of no polygons".into())),
        1 => return Ok(polys[0].clone()),
        _ => {}
    }
    let mut edges = Vec::new();
    for p in polys {
        let mut q = p.clone();
        q.normalize();
        edges.extend(q.directed_edges());
    }
    let edges = cancel_edges(split_t_junctions(edges));
    let mut out = assemble(chain_rings(edges));
    if out.len() != 1 {
        return Err(Error::Polygon(format!("union is disconnected ({} components)", out.len())));
    }
    Ok(out.pop().unwrap())
}

/// Splits `poly` along the chord `cut`, whose endpoints must lie on the outer
/// ring and whose interior must lie inside the polygon.
pub fn split_polygon(poly: &Polygon, cut: (Point, Point)) -> Result<(Polygon, Polygon)> {
    let (p, q) = cut;
    let mut poly = poly.clone();
    poly.normalize();
    let loc_p = locate_on_ring(&poly.outer, p).ok_or_else(|| Error::Polygon(format!("cut endpoint {p:?} not on the outer boundary")))?;
    let loc_q = locate_on_ring(&poly.outer, q).ok_or_else(|| Error::Polygon(format!("cut endpoint {q:?} not on the outer boundary")))?;
    if p.dist(q) <= EPS_SNAP {
        return Err(Error::Polygon("degenerate cut".into()));
    }
    for k in 1..16 {
        let s = p.lerp(q, k as f64 / 16.0);
        if !poly.contains(s) {
            return Err(Error::Polygon("cut leaves the polygon".into()));
        }
    }
    for ring in poly.rings() {
        for (a, b) in ring_edges(ring) {
            let o1 = orient(p, q, a);
            let o2 = orient(p, q, b);
            let o3 = orient(a, b, p);
            let o4 = orient(a, b, q);
            if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                return Err(Error::Polygon("cut crosses the boundary".into()));
            }
        }
    }

    // insert p and q into the outer ring, then walk the two arcs
    let mut ring: Vec<(f64, Point)> = poly.outer.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
    ring.push((loc_p, p));
    ring.push((loc_q, q));
    ring.sort_by(|a, b| a.0.total_cmp(&b.0));
    ring.dedup_by(|a, b| key(a.1) == key(b.1));
    let pts: Vec<Point> = ring.into_iter().map(|(_, v)| v).collect();
    let ip = pts.iter().position(|&v| key(v) == key(p)).unwrap();
    let iq = pts.iter().position(|&v| key(v) == key(q)).unwrap();
    let n = pts.len();
    let arc = |from: usize, to: usize| {
        let mut out = Vec::new();
        let mut i = from;
        loop {
            out.push(pts[i]);
            if i == to {
                break;
            }
            i = (i + 1) % n;
        }
        out
    };
    let mut a = Polygon::new(simplify_ring(arc(ip, iq)), Vec::new());
    let mut b = Polygon::new(simplify_ring(arc(iq, ip)), Vec::new());
    for h in &poly.holes {
        let probe = interior_probe(h);
        if a.contains(probe) {
            a.holes.push(h.clone());
        } else {
            b.holes.push(h.clone());
        }
    }
    if a.area() <= 0.0 || b.area() <= 0.0 {
        return Err(Error::Polygon("cut produces an empty piece".into()));
    }
    Ok((a, b))
}

/// Fractional ring position (edge index + t) of a boundary point.
fn locate_on_ring(ring: &[Point], p: Point) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (i, (a, b)) in ring_edges(ring).enumerate() {
        let d = dist_point_segment(p, a, b);
        if d <= EPS_SNAP && best.is_none_or(|(bd, _)| d < bd) {
            let len2 = a.dist2(b).max(1e-300);
            let t = ((p - a).dot(b - a) / len2).clamp(0.0, 1.0);
            // keep strictly between integer positions so sorting places it after a
            best = Some((d, i as f64 + t.clamp(1e-9, 1.0 - 1e-9)));
        }
    }
    best.map(|(_, s)| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x: f64, y: f64) -> Polygon {
        Polygon::rect(x, y, x + 1.0, y + 1.0)
    }

    #[test]
    fn union_of_adjacent_squares() {
        let u = polygon_union(&[sq(0.0, 0.0), sq(1.0, 0.0)]).unwrap();
        assert!((u.area() - 2.0).abs() < 1e-12);
        assert_eq!(u.outer.len(), 4);
        assert!(u.holes.is_empty());
    }

    #[test]
    fn union_of_ring_has_hole() {
        let parts = [
            Polygon::rect(0.0, 0.0, 3.0, 1.0),
            Polygon::rect(0.0, 2.0, 3.0, 3.0),
            Polygon::rect(0.0, 1.0, 1.0, 2.0),
            Polygon::rect(2.0, 1.0, 3.0, 2.0),
        ];
        let u = polygon_union(&parts).unwrap();
        assert_eq!(u.holes.len(), 1);
        assert!((u.area() - 8.0).abs() < 1e-12);
        assert!(!u.contains(Point::new(1.5, 1.5)));
        assert!(u.contains(Point::new(0.5, 1.5)));
    }

    #[test]
    fn union_identity_and_disconnected() {
        let s = sq(2.0, 2.0);
        assert_eq!(polygon_union(std::slice::from_ref(&s)).unwrap(), s);
        assert!(polygon_union(&[sq(0.0, 0.0), sq(5.0, 5.0)]).is_err());
    }

    #[test]
    fn union_handles_t_junctions() {
        // a 2x1 block beside two stacked unit squares
        let u = polygon_union(&[Polygon::rect(0.0, 0.0, 1.0, 2.0), sq(1.0, 0.0), sq(1.0, 1.0)]).unwrap();
        assert!((u.area() - 4.0).abs() < 1e-12);
        assert_eq!(u.outer.len(), 4);
    }

    #[test]
    fn split_square_by_midline() {
        let (a, b) = split_polygon(&sq(0.0, 0.0), (Point::new(0.5, 0.0), Point::new(0.5, 1.0))).unwrap();
        assert!((a.area() - 0.5).abs() < 1e-12);
        assert!((b.area() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn split_l_shape_at_inner_corner() {
        let l = Polygon::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(2.0, 1.0),
                Point::new(1.0, 1.0),
                Point::new(1.0, 2.0),
                Point::new(0.0, 2.0),
            ],
            vec![],
        );
        let (a, b) = split_polygon(&l, (Point::new(1.0, 1.0), Point::new(1.0, 0.0))).unwrap();
        assert!((a.area() + b.area() - 3.0).abs() < 1e-12);
        let mut areas = [a.area(), b.area()];
        areas.sort_by(f64::total_cmp);
        assert_eq!(areas, [1.0, 2.0]);
        let back = polygon_union(&[a, b]).unwrap();
        assert!((back.area() - 3.0).abs() < 1e-12);
        assert_eq!(back.outer.len(), 6);
    }

    #[test]
    fn split_rejects_interior_endpoint() {
        assert!(split_polygon(&sq(0.0, 0.0), (Point::new(0.5, 0.5), Point::new(0.5, 1.0))).is_err());
    }

    #[test]
    fn containment_conventions() {
        let r = vec![sq(0.0, 0.0).outer];
        assert!(point_in_shape(Point::new(0.5, 0.5), &r));
        assert!(point_in_shape(Point::new(0.0, 0.0), &r));
        assert!(point_in_shape(Point::new(1.0, 0.3), &r));
        assert!(!point_in_shape(Point::new(7.0, 3.0), &r));
    }

    #[test]
    fn triangles_to_polygon() {
        let tris = [
            [Point::new(0., 0.), Point::new(2., 0.), Point::new(1., 1.)],
            [Point::new(0., 0.), Point::new(1., 1.), Point::new(0., 2.)],
            // touches the first triangle's edge in its middle only
            [Point::new(0., 0.), Point::new(1., 0.), Point::new(1., -1.)],
            [Point::new(1., 0.), Point::new(2., 0.), Point::new(1., -1.)],
        ];
        let polys = polygons_from_triangles(&tris);
        assert_eq!(polys.len(), 1);
        assert!((polys[0].area() - 3.0).abs() < 1e-12);
    }
}
