//! Alpha shapes as open-space components of the Delaunay triangulation.
//!
//! A triangle is open when its circumradius² exceeds `alpha` (a probe disk of
//! radius √alpha fits inside its empty circumcircle). Two open triangles are
//! connected through their shared edge unless the edge belongs to the alpha
//! complex: it is Gabriel (its midpoint lies between the two circumcenters)
//! and (length / 2)² <= alpha, so the disk cannot slide across. Components
//! reaching the convex hull through a non-blocking hull edge are exterior.
//! Everything that is not exterior forms the boundary shape (`shapes[0]`);
//! every other open component is a room candidate.

use super::delaunay::{next_halfedge, Delaunay, EMPTY};
use super::locate::TriangleLocator;
use super::voronoi::UnionFind;
use super::{triangle_area, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct AlphaShape {
    /// Delaunay triangle ids that make up the shape.
    pub triangles: Vec<usize>,
    /// Closed boundary rings (first point not repeated). Even-odd over all
    /// rings reproduces the shape.
    pub rings: Vec<Vec<Point>>,
    /// Enclosed area in square pixels.
    pub area: f64,
}

#[derive(Debug, Clone)]
pub struct AlphaShapeSet {
    pub alpha: f64,
    /// `shapes[0]` is the map boundary; the rest are rooms by descending area.
    pub shapes: Vec<AlphaShape>,
    /// Per Delaunay triangle: index into `shapes` of the room containing it.
    room_of_triangle: Vec<Option<usize>>,
    in_boundary: Vec<bool>,
    locator: TriangleLocator,
}

impl AlphaShapeSet {
    pub fn compute(del: &Delaunay, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        let nt = del.triangle_count();
        let open: Vec<bool> = (0..nt).map(|t| del.circumradius2(t) > alpha).collect();
        // angle opposite halfedge e inside its triangle is at most 90 degrees
        let acute = |e: usize| {
            let a = del.points[del.triangles[e]];
            let b = del.points[del.triangles[next_halfedge(e)]];
            let c = del.points[del.triangles[next_halfedge(next_halfedge(e))]];
            (a - c).dot(b - c) >= 0.0
        };
        let passable = |e: usize| {
            let (a, b) = del.edge_vertices(e);
            if del.points[a].dist2(del.points[b]) / 4.0 > alpha {
                return true;
            }
            let f = del.halfedges[e];
            !(acute(e) && (f == EMPTY || acute(f)))
        };

        let mut uf = UnionFind::new(nt);
        for e in 0..del.halfedges.len() {
            let f = del.halfedges[e];
            if f == EMPTY || e > f {
                continue;
            }
            let (t, u) = (e / 3, f / 3);
            if open[t] && open[u] && passable(e) {
                uf.union(t, u);
            }
        }
        let mut exterior_root = vec![false; nt];
        for e in 0..del.halfedges.len() {
            if del.halfedges[e] == EMPTY && open[e / 3] && passable(e) {
                let r = uf.find(e / 3);
                exterior_root[r] = true;
            }
        }
        let mut in_boundary = vec![true; nt];
        let mut comps: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for t in 0..nt {
            if !open[t] {
                continue;
            }
            let r = uf.find(t);
            if exterior_root[r] {
                in_boundary[t] = false;
            } else {
                comps.entry(r).or_default().push(t);
            }
        }

        let area_of = |tris: &[usize]| -> f64 {
            tris.iter()
                .map(|&t| {
                    let [a, b, c] = del.triangle_points(t);
                    triangle_area(a, b, c).abs()
                })
                .sum()
        };
        let boundary_tris: Vec<usize> = (0..nt).filter(|&t| in_boundary[t]).collect();
        if boundary_tris.is_empty() {
            return Err(Error::Empty("alpha shape boundary extraction"));
        }
        let mut rooms: Vec<(f64, Vec<usize>)> = comps
            .into_values()
            .map(|tris| (area_of(&tris), tris))
            .collect();
        rooms.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1[0].cmp(&b.1[0])));

        let mut shapes = Vec::with_capacity(rooms.len() + 1);
        let boundary_area = area_of(&boundary_tris);
        let boundary_rings = rings_of(del, &in_boundary);
        shapes.push(AlphaShape {
            triangles: boundary_tris,
            rings: boundary_rings,
            area: boundary_area,
        });
        let mut room_of_triangle = vec![None; nt];
        let mut member = vec![false; nt];
        for (area, tris) in rooms {
            let idx = shapes.len();
            for &t in &tris {
                room_of_triangle[t] = Some(idx);
                member[t] = true;
            }
            let rings = rings_of(del, &member);
            for &t in &tris {
                member[t] = false;
            }
            shapes.push(AlphaShape {
                triangles: tris,
                rings,
                area,
            });
        }

        let locator = TriangleLocator::new((0..nt).map(|t| del.triangle_points(t)).collect(), 8.0);
        Ok(AlphaShapeSet {
            alpha,
            shapes,
            room_of_triangle,
            in_boundary,
            locator,
        })
    }

    pub fn boundary(&self) -> &AlphaShape {
        &self.shapes[0]
    }

    /// Number of room candidates (all shapes but the boundary).
    pub fn room_count(&self) -> usize {
        self.shapes.len() - 1
    }

    /// Boundary-inclusive membership of `p` in shape `idx`.
    pub fn contains(&self, idx: usize, p: Point) -> bool {
        self.locator.containing(p, 1e-9).any(|t| {
            if idx == 0 {
                self.in_boundary[t]
            } else {
                self.room_of_triangle[t] == Some(idx)
            }
        })
    }

    pub fn in_boundary(&self, p: Point) -> bool {
        self.contains(0, p)
    }
}

/// Boundary rings of the triangle set `member`, oriented with the set on the left.
fn rings_of(del: &Delaunay, member: &[bool]) -> Vec<Vec<Point>> {
    let mut edges: Vec<(Point, Point)> = Vec::new();
    for e in 0..del.halfedges.len() {
        let t = e / 3;
        if !member[t] {
            continue;
        }
        let f = del.halfedges[e];
        if f != EMPTY && member[f / 3] {
            continue;
        }
        let a = del.points[del.triangles[e]];
        let b = del.points[del.triangles[next_halfedge(e)]];
        let c = del.points[del.triangles[next_halfedge(next_halfedge(e))]];
        // orient so the triangle is on the left
        if super::orient(a, b, c) > 0.0 {
            edges.push((a, b));
        } else {
            edges.push((b, a));
        }
    }
    super::polygon::chain_rings(edges)
}

/// Convenience wrapper: triangulate `sites` and extract the alpha shapes.
pub fn compute_alpha_shapes(sites: &[Point], alpha: f64) -> Result<AlphaShapeSet> {
    let del = Delaunay::new(sites.to_vec())?;
    AlphaShapeSet::compute(&del, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_in_shape;

    /// Sites on the cell centers of a closed rectangular wall loop.
    fn wall_loop(w: usize, h: usize) -> Vec<Point> {
        let mut s = Vec::new();
        for x in 0..w {
            for y in 0..h {
                if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                    s.push(Point::new(x as f64 + 0.5, y as f64 + 0.5));
                }
            }
        }
        s
    }

    #[test]
    fn interior_room_appears_only_when_disk_fits() {
        // 22 x 22 loop: opposite wall sites are 21 px apart
        let sites = wall_loop(22, 22);
        let fits = compute_alpha_shapes(&sites, 10.5f64.powi(2) - 1.0).unwrap();
        assert_eq!(fits.room_count(), 1);
        let too_big = compute_alpha_shapes(&sites, 22.0f64.powi(2)).unwrap();
        assert_eq!(too_big.room_count(), 0);
    }

    #[test]
    fn boundary_is_largest_and_ring_membership_agrees() {
        let sites = wall_loop(20, 14);
        let set = compute_alpha_shapes(&sites, 16.0).unwrap();
        for s in &set.shapes[1..] {
            assert!(set.shapes[0].area >= s.area);
        }
        for i in 0..set.shapes.len() {
            for k in 0..40 {
                let p = Point::new(0.3 + k as f64 * 0.51, 0.2 + k as f64 * 0.33);
                assert_eq!(
                    set.contains(i, p),
                    point_in_shape(p, &set.shapes[i].rings),
                    "shape {i} point {p:?}"
                );
            }
        }
    }

    #[test]
    fn nonpositive_alpha_rejected() {
        assert!(compute_alpha_shapes(&wall_loop(5, 5), 0.0).is_err());
    }
}
