//! Voronoi graph as the dual of the Delaunay triangulation.
//!
//! Waypoints are triangle circumcenters; triangles whose circumcircles coincide
//! exactly (cocircular lattice quadruples) share one waypoint, so a waypoint
//! may be equidistant to more than three sites. Every Voronoi edge is stored as
//! a pair of twin halfedges and each halfedge remembers the site of the face on
//! its left. Unbounded edges are clipped to the site bounding box grown by one
//! cell.

use super::delaunay::{Delaunay, EMPTY};
use super::{orient, Point};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfEdge {
    pub origin: usize,
    pub twin: usize,
    /// Site of the face to the left of this halfedge.
    pub site: usize,
}

#[derive(Debug, Clone)]
pub struct VoronoiGraph {
    pub sites: Vec<Point>,
    pub waypoints: Vec<Point>,
    /// Distance from each waypoint to its nearest site.
    pub clearance: Vec<f64>,
    /// Waypoints created by clipping an unbounded edge.
    pub clipped: Vec<bool>,
    pub halfedges: Vec<HalfEdge>,
    /// Minimum clearance over each edge's segment, indexed by edge.
    pub edge_min_clearance: Vec<f64>,
    /// Next halfedge around the same face, or `None` where a clipped face is open.
    pub face_next: Vec<Option<usize>>,
    /// Waypoint id of every Delaunay triangle.
    pub triangle_waypoint: Vec<usize>,
}

impl VoronoiGraph {
    pub fn from_delaunay(del: &Delaunay) -> Self {
        let nt = del.triangle_count();
        let mut uf = UnionFind::new(nt);
        for e in 0..del.halfedges.len() {
            let f = del.halfedges[e];
            if f != EMPTY && e < f && del.is_cocircular_edge(e) {
                uf.union(e / 3, f / 3);
            }
        }
        let mut triangle_waypoint = vec![usize::MAX; nt];
        let mut waypoints = Vec::new();
        let mut clearance = Vec::new();
        let mut clipped = Vec::new();
        for t in 0..nt {
            let r = uf.find(t);
            if triangle_waypoint[r] == usize::MAX {
                triangle_waypoint[r] = waypoints.len();
                let c = del.circumcenter(r);
                waypoints.push(c);
                clearance.push(c.dist(del.points[del.triangles[3 * r]]));
                clipped.push(false);
            }
            triangle_waypoint[t] = triangle_waypoint[r];
        }

        let (mut lo, mut hi) = (
            Point::new(f64::INFINITY, f64::INFINITY),
            Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in &del.points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        lo = lo - Point::new(1.0, 1.0);
        hi = hi + Point::new(1.0, 1.0);

        let mut halfedges = Vec::new();
        let mut edge_min_clearance = Vec::new();
        for e in 0..del.halfedges.len() {
            let f = del.halfedges[e];
            let (sa, sb) = del.edge_vertices(e);
            let a = del.points[sa];
            let b = del.points[sb];
            let t = e / 3;
            let third = del.points[del.triangles[super::delaunay::prev_halfedge(e)]];
            // walking from the circumcenter of t across edge a-b leaves t; the site
            // on the left of that walk is b when t lies left of a->b
            let t_left = orient(a, b, third) > 0.0;
            let (left, right) = if t_left { (sb, sa) } else { (sa, sb) };
            if f != EMPTY {
                if e > f {
                    continue;
                }
                let u = triangle_waypoint[t];
                let v = triangle_waypoint[f / 3];
                if u == v {
                    continue;
                }
                let (pu, pv) = (waypoints[u], waypoints[v]);
                if pu == pv {
                    continue;
                }
                let h = halfedges.len();
                halfedges.push(HalfEdge {
                    origin: u,
                    twin: h + 1,
                    site: left,
                });
                halfedges.push(HalfEdge {
                    origin: v,
                    twin: h,
                    site: right,
                });
                edge_min_clearance.push(segment_clearance(pu, pv, a, b, clearance[u], clearance[v]));
            } else {
                // hull edge: ray from the circumcenter away from the triangle
                let u = triangle_waypoint[t];
                let pu = waypoints[u];
                if pu.x < lo.x || pu.y < lo.y || pu.x > hi.x || pu.y > hi.y {
                    continue;
                }
                let d = b - a;
                let mut dir = Point::new(d.y, -d.x);
                if t_left {
                    // triangle on the left of a->b: outward is to the right
                } else {
                    dir = dir * -1.0;
                }
                let Some(end) = clip_ray(pu, dir, lo, hi) else {
                    continue;
                };
                if end == pu {
                    continue;
                }
                let v = waypoints.len();
                waypoints.push(end);
                clearance.push(end.dist(a));
                clipped.push(true);
                let h = halfedges.len();
                halfedges.push(HalfEdge {
                    origin: u,
                    twin: h + 1,
                    site: left,
                });
                halfedges.push(HalfEdge {
                    origin: v,
                    twin: h,
                    site: right,
                });
                edge_min_clearance.push(segment_clearance(pu, end, a, b, clearance[u], clearance[v]));
            }
        }

        let mut g = VoronoiGraph {
            sites: del.points.clone(),
            waypoints,
            clearance,
            clipped,
            halfedges,
            edge_min_clearance,
            face_next: Vec::new(),
            triangle_waypoint,
        };
        g.face_next = g.compute_face_next();
        g
    }

    fn compute_face_next(&self) -> Vec<Option<usize>> {
        let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); self.waypoints.len()];
        for (h, he) in self.halfedges.iter().enumerate() {
            outgoing[he.origin].push(h);
        }
        (0..self.halfedges.len())
            .map(|h| {
                let he = self.halfedges[h];
                let v = self.target(h);
                outgoing[v]
                    .iter()
                    .copied()
                    .find(|&g| g != he.twin && self.halfedges[g].site == he.site)
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.halfedges.len() / 2
    }

    pub fn target(&self, h: usize) -> usize {
        self.halfedges[self.halfedges[h].twin].origin
    }

    /// Endpoints of edge `k` in the orientation of halfedge `2k`.
    pub fn edge_endpoints(&self, k: usize) -> (usize, usize) {
        (self.halfedges[2 * k].origin, self.halfedges[2 * k + 1].origin)
    }

    /// (left site, right site) of edge `k` seen along halfedge `2k`.
    pub fn edge_sites(&self, k: usize) -> (usize, usize) {
        (self.halfedges[2 * k].site, self.halfedges[2 * k + 1].site)
    }

    /// Halfedges bounding each site's face, in traversal order. Faces of hull
    /// sites are open chains; interior faces are cycles.
    pub fn face_chains(&self) -> Vec<(usize, Vec<usize>, bool)> {
        let n = self.halfedges.len();
        let mut has_prev = vec![false; n];
        for nx in self.face_next.iter().flatten() {
            has_prev[*nx] = true;
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let walk = |start: usize, seen: &mut Vec<bool>| {
            let mut chain = Vec::new();
            let mut h = start;
            let mut cyclic = false;
            loop {
                if seen[h] {
                    cyclic = h == start;
                    break;
                }
                seen[h] = true;
                chain.push(h);
                match self.face_next[h] {
                    Some(nx) => h = nx,
                    None => break,
                }
            }
            (self.halfedges[start].site, chain, cyclic)
        };
        for h in 0..n {
            if !has_prev[h] && !seen[h] {
                out.push(walk(h, &mut seen));
            }
        }
        for h in 0..n {
            if !seen[h] {
                out.push(walk(h, &mut seen));
            }
        }
        out
    }
}

/// Minimum distance to the flanking sites along segment `pu-pv`: the midpoint
/// of `a-b` when it falls on the segment, otherwise the smaller endpoint value.
fn segment_clearance(pu: Point, pv: Point, a: Point, b: Point, cu: f64, cv: f64) -> f64 {
    let m = a.midpoint(b);
    let d = pv - pu;
    let len2 = d.norm2();
    let end_min = cu.min(cv);
    if len2 == 0.0 {
        return end_min;
    }
    let t = (m - pu).dot(d) / len2;
    if (0.0..=1.0).contains(&t) {
        (a.dist(b) / 2.0).min(end_min)
    } else {
        end_min
    }
}

fn clip_ray(p: Point, dir: Point, lo: Point, hi: Point) -> Option<Point> {
    let mut t = f64::INFINITY;
    if dir.x > 0.0 {
        t = t.min((hi.x - p.x) / dir.x);
    } else if dir.x < 0.0 {
        t = t.min((lo.x - p.x) / dir.x);
    }
    if dir.y > 0.0 {
        t = t.min((hi.y - p.y) / dir.y);
    } else if dir.y < 0.0 {
        t = t.min((lo.y - p.y) / dir.y);
    }
    if !t.is_finite() || t < 0.0 {
        return None;
    }
    Some(p + dir * t)
}

/// Builds the Voronoi graph of `sites`.
pub fn compute_voronoi(sites: &[Point]) -> Result<VoronoiGraph> {
    let del = Delaunay::new(sites.to_vec())?;
    Ok(VoronoiGraph::from_delaunay(&del))
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Unions by smaller root id so roots are deterministic.
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
