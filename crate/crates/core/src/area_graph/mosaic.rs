//! Edge polygons stored as triangle mosaics.
//!
//! A half-polygon is the union of fan triangles (site, u, v) over the Voronoi
//! segments of an edge, plus triangles absorbed from pruned or merged edges.
//! Keeping triangles instead of rings makes merging a concatenation and keeps
//! area exactly additive; rings are only produced for export.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{triangle_area, Point, VoronoiGraph};
use crate::topology::{EdgeFate, TopologyGraph};

/// One triangle of a half-polygon. For own fans, `b`-`c` is a polyline
/// segment of the edge, `a` its site and `anchor` the arc length of `b`.
/// Absorbed triangles carry the arc length where they attach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tri {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub anchor: f64,
    pub own: bool,
}

impl Tri {
    pub fn area(&self) -> f64 {
        triangle_area(self.a, self.b, self.c).abs()
    }

    pub fn points(&self) -> [Point; 3] {
        [self.a, self.b, self.c]
    }

    /// Same triangle seen from the other end of an edge of length `len`.
    fn reversed(self, len: f64) -> Tri {
        if self.own {
            Tri {
                a: self.a,
                b: self.c,
                c: self.b,
                anchor: len - (self.anchor + self.b.dist(self.c)),
                own: true,
            }
        } else {
            Tri {
                anchor: len - self.anchor,
                ..self
            }
        }
    }

    pub(crate) fn absorbed(self, anchor: f64) -> Tri {
        Tri {
            anchor,
            own: false,
            ..self
        }
    }
}

/// The two half-polygons of an edge, named by side along its a->b direction
/// (y-up orientation: `left` holds sites with positive orientation).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PolyEdge {
    pub left: Vec<Tri>,
    pub right: Vec<Tri>,
}

impl PolyEdge {
    pub fn area(&self) -> f64 {
        self.left.iter().chain(&self.right).map(Tri::area).sum()
    }

    pub fn left_area(&self) -> f64 {
        self.left.iter().map(Tri::area).sum()
    }

    pub fn right_area(&self) -> f64 {
        self.right.iter().map(Tri::area).sum()
    }

    pub fn triangles(&self) -> impl Iterator<Item = &Tri> {
        self.left.iter().chain(&self.right)
    }

    pub fn reversed(self, len: f64) -> PolyEdge {
        PolyEdge {
            left: self.right.into_iter().map(|t| t.reversed(len)).collect(),
            right: self.left.into_iter().map(|t| t.reversed(len)).collect(),
        }
    }

    fn shifted(mut self, by: f64) -> PolyEdge {
        for t in self.left.iter_mut().chain(self.right.iter_mut()) {
            t.anchor += by;
        }
        self
    }

    /// Everything as absorbed triangles anchored at one parameter.
    pub fn into_absorbed(self, anchor: f64) -> Vec<Tri> {
        self.left
            .into_iter()
            .chain(self.right)
            .map(|t| t.absorbed(anchor))
            .collect()
    }
}

/// Concatenates the polygons of two edges joined through a removed vertex:
/// `first` must end and `second` start at that vertex, `first_len` is the
/// length of the first edge.
pub fn merge_joined_polygons(first: PolyEdge, first_len: f64, second: PolyEdge) -> PolyEdge {
    let second = second.shifted(first_len);
    let mut out = first;
    out.left.extend(second.left);
    out.right.extend(second.right);
    out
}

/// Half-polygon construction. Every surviving Voronoi segment contributes its
/// two fan triangles; fans of segments removed for low clearance are handed
/// to the nearest surviving segment around the same site face. Faces are cut
/// where a removed segment passes through a wall gap narrower than
/// `2 * min_clearance` (the cut is the midpoint of the two sites) and where a
/// segment was removed as outside the boundary, so fans never cross walls.
/// A segment leaving the boundary through such a gap keeps its inner fan.
pub fn build_half_polygons(g: &mut TopologyGraph, vg: &VoronoiGraph, min_clearance: f64) -> Result<()> {
    if g.voronoi_fate.len() != vg.edge_count() {
        return Err(Error::InvalidParameter(
            "topology graph does not originate from this Voronoi graph".into(),
        ));
    }
    #[derive(Clone, Copy)]
    enum Piece {
        Survivor { edge: usize, left: bool, start: f64, end: f64 },
        Fan(Tri),
        Cut,
    }
    let fan = |a: Point, b: Point, c: Point| {
        Piece::Fan(Tri {
            a,
            b,
            c,
            anchor: 0.0,
            own: false,
        })
    };
    let mut polys: Vec<Option<PolyEdge>> = vec![None; g.edges.len()];
    for k in 0..vg.edge_count() {
        if g.voronoi_fate[k] == EdgeFate::Kept && g.edges.get(k).is_some_and(|e| e.is_some()) {
            polys[k] = Some(PolyEdge::default());
        }
    }

    for (site, chain, cyclic) in vg.face_chains() {
        let s = vg.sites[site];
        let mut pieces: Vec<Piece> = Vec::with_capacity(chain.len() + 2);
        for &h in &chain {
            let k = h / 2;
            let u = vg.waypoints[vg.halfedges[h].origin];
            let v = vg.waypoints[vg.target(h)];
            match g.voronoi_fate[k] {
                EdgeFate::Kept if polys[k].is_some() => {
                    let e = g.edges[k].as_ref().unwrap();
                    let len = e.length();
                    let forward = h % 2 == 0;
                    let own = Tri {
                        a: s,
                        b: e.points[0],
                        c: *e.points.last().unwrap(),
                        anchor: 0.0,
                        own: true,
                    };
                    let poly = polys[k].as_mut().unwrap();
                    if forward {
                        poly.left.push(own);
                    } else {
                        poly.right.push(own);
                    }
                    let (start, end) = if forward { (0.0, len) } else { (len, 0.0) };
                    pieces.push(Piece::Survivor {
                        edge: k,
                        left: forward,
                        start,
                        end,
                    });
                }
                EdgeFate::OutsideBoundary | EdgeFate::Kept => pieces.push(Piece::Cut),
                EdgeFate::CrossesBoundary { inside } => {
                    // keep the inner part up to the wall gap it passes
                    let (sa, sb) = vg.edge_sites(k);
                    let (pa, pb) = (vg.sites[sa], vg.sites[sb]);
                    let d = v - u;
                    let t = if d.norm2() > 0.0 { (pa.midpoint(pb) - u).dot(d) / d.norm2() } else { -1.0 };
                    if pa.dist(pb) < 2.0 * min_clearance && t > 0.0 && t < 1.0 {
                        let mp = u.lerp(v, t);
                        if inside == vg.halfedges[h].origin {
                            pieces.push(fan(s, u, mp));
                            pieces.push(Piece::Cut);
                        } else {
                            pieces.push(Piece::Cut);
                            pieces.push(fan(s, mp, v));
                        }
                    } else {
                        pieces.push(Piece::Cut);
                    }
                }
                EdgeFate::LowClearance => {
                    let (sa, sb) = vg.edge_sites(k);
                    let (pa, pb) = (vg.sites[sa], vg.sites[sb]);
                    let m = pa.midpoint(pb);
                    let d = v - u;
                    let t = if d.norm2() > 0.0 { (m - u).dot(d) / d.norm2() } else { -1.0 };
                    let narrow = pa.dist(pb) < 2.0 * min_clearance;
                    let fan = |b: Point, c: Point| fan(s, b, c);
                    if narrow && t > 0.0 && t < 1.0 {
                        let mp = u.lerp(v, t);
                        pieces.push(fan(u, mp));
                        pieces.push(Piece::Cut);
                        pieces.push(fan(mp, v));
                    } else if narrow && t == 0.0 {
                        pieces.push(Piece::Cut);
                        pieces.push(fan(u, v));
                    } else if narrow && t == 1.0 {
                        pieces.push(fan(u, v));
                        pieces.push(Piece::Cut);
                    } else {
                        pieces.push(fan(u, v));
                    }
                }
            }
        }

        // split into arcs at cuts; a cyclic chain without cuts is one ring
        let has_cut = pieces.iter().any(|p| matches!(p, Piece::Cut));
        let ring = cyclic && !has_cut;
        let mut arcs: Vec<Vec<Piece>> = Vec::new();
        if cyclic && has_cut {
            let first_cut = pieces.iter().position(|p| matches!(p, Piece::Cut)).unwrap();
            pieces.rotate_left(first_cut);
        }
        let mut cur = Vec::new();
        for p in pieces {
            if let Piece::Cut = p {
                arcs.push(std::mem::take(&mut cur));
            } else {
                cur.push(p);
            }
        }
        arcs.push(cur);

        for arc in arcs {
            let survivors: Vec<usize> = (0..arc.len())
                .filter(|&i| matches!(arc[i], Piece::Survivor { .. }))
                .collect();
            if survivors.is_empty() {
                continue;
            }
            let n = arc.len() as i64;
            for (i, p) in arc.iter().enumerate() {
                let Piece::Fan(tri) = *p else { continue };
                // nearest survivor along the arc; earlier one wins ties
                let mut best: Option<(i64, usize, bool)> = None;
                for &j in &survivors {
                    let fwd = if ring { (j as i64 - i as i64).rem_euclid(n) } else { j as i64 - i as i64 };
                    let bwd = if ring { (i as i64 - j as i64).rem_euclid(n) } else { i as i64 - j as i64 };
                    for (d, after) in [(bwd, false), (fwd, true)] {
                        if d > 0 && best.is_none_or(|(bd, _, _)| d < bd) {
                            best = Some((d, j, after));
                        }
                    }
                }
                let Some((_, j, after)) = best else { continue };
                let Piece::Survivor { edge, left, start, end } = arc[j] else { unreachable!() };
                // a survivor later in the chain is reached at its start
                let anchor = if after { start } else { end };
                let poly = polys[edge].as_mut().unwrap();
                let t = tri.absorbed(anchor);
                if left {
                    poly.left.push(t);
                } else {
                    poly.right.push(t);
                }
            }
        }
    }

    for (k, p) in polys.into_iter().enumerate() {
        if let Some(p) = p {
            g.edges[k].as_mut().unwrap().poly = Some(p);
        }
    }
    Ok(())
}
