//! Topology Graph: the Voronoi graph pruned down to dead-ends and junctions.
//!
//! Edges carry their polyline, per-waypoint clearance, the flanking sites of
//! every segment and, once [`build_half_polygons`] has run, the edge polygon.
//! Every structural change (joining, dead-end removal, vertex merging) keeps
//! the polygons in step so total polygon area is conserved.
//!
//! [`build_half_polygons`]: crate::area_graph::build_half_polygons

use std::collections::HashMap;

use log::{debug, warn};
use serde::Serialize;

use crate::area_graph::mosaic::{merge_joined_polygons, PolyEdge, Tri};
use crate::error::{Error, Result};
use crate::geometry::voronoi::UnionFind;
use crate::geometry::{polyline_length, AlphaShapeSet, Point, SiteIndex, VoronoiGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VertexKind {
    DeadEnd,
    Junction,
    /// Degree two; only the anchor of a pure cycle ends up like this.
    Anchor,
}

/// What happened to each original Voronoi edge during filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFate {
    Kept,
    OutsideBoundary,
    /// One end lies outside the boundary; `inside` is the other waypoint.
    CrossesBoundary { inside: usize },
    LowClearance,
}

#[derive(Debug, Clone)]
pub struct TopoVertex {
    pub pos: Point,
    /// Incident edge ids; a self-loop is listed twice.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct TopoEdge {
    pub a: usize,
    pub b: usize,
    /// Polyline from `a` to `b`.
    pub points: Vec<Point>,
    /// Clearance of every polyline point.
    pub clearance: Vec<f64>,
    /// Per segment: (left site, right site) along a->b, if known.
    pub flanks: Vec<Option<(usize, usize)>>,
    /// Per segment: minimum clearance along it.
    pub seg_clearance: Vec<f64>,
    pub poly: Option<PolyEdge>,
}

impl TopoEdge {
    pub fn length(&self) -> f64 {
        polyline_length(&self.points)
    }

    pub fn is_loop(&self) -> bool {
        self.a == self.b
    }

    pub fn other(&self, v: usize) -> usize {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }

    pub fn min_clearance(&self) -> f64 {
        self.seg_clearance.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn reversed(self) -> TopoEdge {
        let len = self.length();
        let mut points = self.points;
        points.reverse();
        let mut clearance = self.clearance;
        clearance.reverse();
        let mut flanks: Vec<_> = self.flanks.into_iter().map(|f| f.map(|(l, r)| (r, l))).collect();
        flanks.reverse();
        let mut seg_clearance = self.seg_clearance;
        seg_clearance.reverse();
        TopoEdge {
            a: self.b,
            b: self.a,
            points,
            clearance,
            flanks,
            seg_clearance,
            poly: self.poly.map(|p| p.reversed(len)),
        }
    }

    /// Direction of the edge leaving its `a` end (or its `b` end).
    fn leaving(&self, at_a: bool) -> Point {
        let n = self.points.len();
        if at_a {
            self.points[1] - self.points[0]
        } else {
            self.points[n - 2] - self.points[n - 1]
        }
    }
}

#[derive(Debug, Clone)]
pub struct TopologyGraph {
    pub sites: Vec<Point>,
    pub vertices: Vec<Option<TopoVertex>>,
    pub edges: Vec<Option<TopoEdge>>,
    /// Fate of each Voronoi edge; edge ids equal Voronoi edge ids until the
    /// first join.
    pub voronoi_fate: Vec<EdgeFate>,
}

impl TopologyGraph {
    /// One vertex per waypoint and one edge per Voronoi edge.
    pub fn from_voronoi(vg: &VoronoiGraph) -> Self {
        let mut vertices: Vec<Option<TopoVertex>> = vg
            .waypoints
            .iter()
            .map(|&pos| {
                Some(TopoVertex {
                    pos,
                    edges: Vec::new(),
                })
            })
            .collect();
        let mut edges = Vec::with_capacity(vg.edge_count());
        for k in 0..vg.edge_count() {
            let (u, v) = vg.edge_endpoints(k);
            vertices[u].as_mut().unwrap().edges.push(k);
            vertices[v].as_mut().unwrap().edges.push(k);
            edges.push(Some(TopoEdge {
                a: u,
                b: v,
                points: vec![vg.waypoints[u], vg.waypoints[v]],
                clearance: vec![vg.clearance[u], vg.clearance[v]],
                flanks: vec![Some(vg.edge_sites(k))],
                seg_clearance: vec![vg.edge_min_clearance[k]],
                poly: None,
            }));
        }
        let mut g = TopologyGraph {
            sites: vg.sites.clone(),
            vertices,
            edges,
            voronoi_fate: vec![EdgeFate::Kept; vg.edge_count()],
        };
        g.drop_isolated_vertices();
        g
    }

    /// Builds a graph from explicit polylines; mainly for tests and tools.
    pub fn from_polylines(positions: &[Point], edges: &[(usize, usize, Vec<Point>)]) -> Self {
        let mut vertices: Vec<Option<TopoVertex>> = positions
            .iter()
            .map(|&pos| {
                Some(TopoVertex {
                    pos,
                    edges: Vec::new(),
                })
            })
            .collect();
        let mut out = Vec::new();
        for (k, (a, b, inner)) in edges.iter().enumerate() {
            let mut points = vec![positions[*a]];
            points.extend(inner.iter().copied());
            points.push(positions[*b]);
            let n = points.len();
            vertices[*a].as_mut().unwrap().edges.push(k);
            vertices[*b].as_mut().unwrap().edges.push(k);
            out.push(Some(TopoEdge {
                a: *a,
                b: *b,
                points,
                clearance: vec![f64::INFINITY; n],
                flanks: vec![None; n - 1],
                seg_clearance: vec![f64::INFINITY; n - 1],
                poly: None,
            }));
        }
        TopologyGraph {
            sites: Vec::new(),
            vertices,
            edges: out,
            voronoi_fate: Vec::new(),
        }
    }

    pub fn vertex(&self, v: usize) -> &TopoVertex {
        self.vertices[v].as_ref().expect("live vertex")
    }

    pub fn edge(&self, e: usize) -> &TopoEdge {
        self.edges[e].as_ref().expect("live edge")
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].is_some())
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edges[e].is_some())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids().count()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ids().count()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.vertex(v).edges.len()
    }

    pub fn vertex_kind(&self, v: usize) -> VertexKind {
        match self.degree(v) {
            0 | 1 => VertexKind::DeadEnd,
            2 => VertexKind::Anchor,
            _ => VertexKind::Junction,
        }
    }

    pub fn total_length(&self) -> f64 {
        self.edge_ids().map(|e| self.edge(e).length()).sum()
    }

    /// Sum of all edge polygon areas in square pixels.
    pub fn polygon_area(&self) -> f64 {
        self.edge_ids()
            .filter_map(|e| self.edge(e).poly.as_ref())
            .map(PolyEdge::area)
            .sum()
    }

    /// An edge with exactly one end of degree one.
    pub fn is_dead_end(&self, e: usize) -> bool {
        let ed = self.edge(e);
        !ed.is_loop() && ((self.degree(ed.a) == 1) != (self.degree(ed.b) == 1))
    }

    fn remove_edge(&mut self, e: usize) -> TopoEdge {
        let ed = self.edges[e].take().expect("live edge");
        for v in [ed.a, ed.b] {
            if let Some(vx) = self.vertices[v].as_mut() {
                if let Some(i) = vx.edges.iter().position(|&x| x == e) {
                    vx.edges.swap_remove(i);
                }
            }
        }
        ed
    }

    fn add_edge(&mut self, ed: TopoEdge) -> usize {
        let id = self.edges.len();
        self.vertices[ed.a].as_mut().unwrap().edges.push(id);
        self.vertices[ed.b].as_mut().unwrap().edges.push(id);
        self.edges.push(Some(ed));
        id
    }

    fn drop_isolated_vertices(&mut self) {
        for v in &mut self.vertices {
            if v.as_ref().is_some_and(|x| x.edges.is_empty()) {
                *v = None;
            }
        }
    }

    fn rebuild_incidence(&mut self) {
        for v in self.vertices.iter_mut().flatten() {
            v.edges.clear();
        }
        for e in 0..self.edges.len() {
            if let Some(ed) = &self.edges[e] {
                let (a, b) = (ed.a, ed.b);
                self.vertices[a].as_mut().unwrap().edges.push(e);
                self.vertices[b].as_mut().unwrap().edges.push(e);
            }
        }
        self.drop_isolated_vertices();
    }

    /// Joins two edges meeting at a shared degree-two vertex into one edge.
    pub fn join_edges(&mut self, e1: usize, e2: usize) -> Result<usize> {
        let (x, y) = (self.edge(e1), self.edge(e2));
        let shared = [x.a, x.b]
            .into_iter()
            .find(|&v| (v == y.a || v == y.b) && self.degree(v) == 2 && e1 != e2);
        let Some(v) = shared else {
            return Err(Error::NotAdjacent(e1, e2));
        };
        let mut first = self.remove_edge(e1);
        let mut second = self.remove_edge(e2);
        if first.b != v {
            first = first.reversed();
        }
        if second.a != v {
            second = second.reversed();
        }
        let len1 = first.length();
        let poly = match (first.poly.take(), second.poly.take()) {
            (Some(p), Some(q)) => Some(merge_joined_polygons(p, len1, q)),
            (p, q) => p.or(q),
        };
        let mut points = first.points;
        points.extend_from_slice(&second.points[1..]);
        let mut clearance = first.clearance;
        clearance.extend_from_slice(&second.clearance[1..]);
        let mut flanks = first.flanks;
        flanks.extend(second.flanks);
        let mut seg_clearance = first.seg_clearance;
        seg_clearance.extend(second.seg_clearance);
        self.vertices[v] = None;
        Ok(self.add_edge(TopoEdge {
            a: first.a,
            b: second.b,
            points,
            clearance,
            flanks,
            seg_clearance,
            poly,
        }))
    }
}

/// Keeps edges whose endpoints both lie inside the boundary shape.
pub fn filter_outside_boundary(g: &mut TopologyGraph, shapes: &AlphaShapeSet) -> Result<()> {
    let inside: Vec<bool> = g
        .vertices
        .iter()
        .map(|v| v.as_ref().is_some_and(|v| shapes.in_boundary(v.pos)))
        .collect();
    for e in 0..g.edges.len() {
        let Some(ed) = &g.edges[e] else { continue };
        let fate = match (inside[ed.a], inside[ed.b]) {
            (true, true) => continue,
            (true, false) => EdgeFate::CrossesBoundary { inside: ed.a },
            (false, true) => EdgeFate::CrossesBoundary { inside: ed.b },
            (false, false) => EdgeFate::OutsideBoundary,
        };
        g.remove_edge(e);
        if e < g.voronoi_fate.len() {
            g.voronoi_fate[e] = fate;
        }
    }
    g.drop_isolated_vertices();
    if g.edge_count() == 0 {
        return Err(Error::Empty("boundary filtering"));
    }
    Ok(())
}

/// Deletes every edge whose clearance drops below `min_clearance` anywhere
/// along its segments.
pub fn remove_low_clearance_edges(g: &mut TopologyGraph, min_clearance: f64) {
    for e in 0..g.edges.len() {
        let Some(ed) = &g.edges[e] else { continue };
        let low = ed.min_clearance() < min_clearance || ed.clearance.iter().any(|&c| c < min_clearance);
        if low {
            g.remove_edge(e);
            if e < g.voronoi_fate.len() {
                g.voronoi_fate[e] = EdgeFate::LowClearance;
            }
        }
    }
    g.drop_isolated_vertices();
}

/// Joins the two edges of every degree-two vertex. Vertices are visited in
/// descending (x, y) order, so a pure cycle collapses onto a self-loop at its
/// lexicographically smallest vertex.
pub fn join_degree_two(g: &mut TopologyGraph) {
    let mut order: Vec<usize> = g.vertex_ids().filter(|&v| g.degree(v) == 2).collect();
    order.sort_by(|&u, &v| {
        let (p, q) = (g.vertex(u).pos, g.vertex(v).pos);
        q.x.total_cmp(&p.x).then(q.y.total_cmp(&p.y)).then(v.cmp(&u))
    });
    for v in order {
        let Some(vx) = &g.vertices[v] else { continue };
        if vx.edges.len() != 2 || vx.edges[0] == vx.edges[1] {
            continue;
        }
        let (e1, e2) = (vx.edges[0], vx.edges[1]);
        g.join_edges(e1, e2).expect("degree-two vertex joins its edges");
    }
}

/// Absorbs the polygon of dead-end edge `dead` at its junction `j` into the
/// neighboring half-polygon: the first edge clockwise from the dead edge
/// (its left side as seen leaving `j`), or, when that edge is a dead-end
/// itself, the first edge counterclockwise (its right side).
pub fn merge_deadend_polygon(g: &mut TopologyGraph, dead: usize, j: usize) {
    let Some(poly) = g.edges[dead].as_mut().and_then(|e| e.poly.take()) else {
        return;
    };
    let mut ends: Vec<(f64, usize, bool)> = Vec::new();
    let mut seen_loop = Vec::new();
    for &e in &g.vertex(j).edges {
        let ed = g.edge(e);
        if ed.is_loop() {
            if seen_loop.contains(&e) {
                continue;
            }
            seen_loop.push(e);
            for at_a in [true, false] {
                let d = ed.leaving(at_a);
                ends.push((d.y.atan2(d.x), e, at_a));
            }
        } else {
            let at_a = ed.a == j;
            let d = ed.leaving(at_a);
            ends.push((d.y.atan2(d.x), e, at_a));
        }
    }
    ends.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let n = ends.len();
    let i = ends.iter().position(|x| x.1 == dead).expect("dead edge at junction");
    if n < 2 {
        warn!("dead-end edge {dead} has no neighbor; its polygon is dropped");
        return;
    }
    let cw = ends[(i + n - 1) % n];
    let ccw = ends[(i + 1) % n];
    let (target, leaving_left) = if cw.1 != dead && !g.is_dead_end(cw.1) {
        (cw, true)
    } else if ccw.1 != dead {
        (ccw, false)
    } else {
        (cw, true)
    };
    let (_, e, at_a) = target;
    let len = g.edge(e).length();
    let anchor = if at_a { 0.0 } else { len };
    // leaving through the b end flips sides
    let to_left = leaving_left == at_a;
    let tris: Vec<Tri> = poly.into_absorbed(anchor);
    let recv = g.edges[e].as_mut().unwrap().poly.get_or_insert_with(PolyEdge::default);
    if to_left {
        recv.left.extend(tris);
    } else {
        recv.right.extend(tris);
    }
}

/// Removes dead-end edges shorter than `min_length` whose junction has degree
/// at least three, then joins degree-two vertices; repeated `iterations` times.
pub fn prune_dead_ends(g: &mut TopologyGraph, min_length: f64, iterations: usize) {
    for it in 0..iterations {
        let mut cands: Vec<(f64, usize)> = g
            .edge_ids()
            .filter(|&e| g.is_dead_end(e))
            .map(|e| (g.edge(e).length(), e))
            .filter(|&(l, _)| l < min_length)
            .collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut removed = 0;
        for (_, e) in cands {
            if g.edges[e].is_none() || !g.is_dead_end(e) {
                continue;
            }
            let ed = g.edge(e);
            let (tip, j) = if g.degree(ed.a) == 1 { (ed.a, ed.b) } else { (ed.b, ed.a) };
            if g.degree(j) < 3 {
                continue;
            }
            merge_deadend_polygon(g, e, j);
            g.remove_edge(e);
            g.vertices[tip] = None;
            removed += 1;
        }
        join_degree_two(g);
        debug!("dead-end pruning round {it}: removed {removed} edges");
    }
}

/// Connected components as vertex lists, ordered by lowest vertex id.
pub fn components(g: &TopologyGraph) -> Vec<Vec<usize>> {
    let mut comp = vec![usize::MAX; g.vertices.len()];
    let mut out = Vec::new();
    for s in g.vertex_ids() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        comp[s] = id;
        let mut members = Vec::new();
        while let Some(v) = stack.pop() {
            members.push(v);
            for &e in &g.vertex(v).edges {
                let w = g.edge(e).other(v);
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Keeps the component with the largest total edge length; ties go to the
/// component holding the lowest vertex id.
pub fn keep_largest_component(g: &mut TopologyGraph) -> Result<()> {
    let comps = components(g);
    if comps.is_empty() || g.edge_count() == 0 {
        return Err(Error::Empty("largest component selection"));
    }
    let length = |c: &Vec<usize>| -> f64 {
        let mut s = 0.0;
        for &v in c {
            for &e in &g.vertex(v).edges {
                // each non-loop edge is seen from both ends
                s += g.edge(e).length() / 2.0;
            }
        }
        s
    };
    let mut best = 0;
    let mut best_len = length(&comps[0]);
    for (i, c) in comps.iter().enumerate().skip(1) {
        let l = length(c);
        if l > best_len {
            best = i;
            best_len = l;
        }
    }
    let mut keep = vec![false; g.vertices.len()];
    for &v in &comps[best] {
        keep[v] = true;
    }
    for e in 0..g.edges.len() {
        if g.edges[e].as_ref().is_some_and(|ed| !keep[ed.a]) {
            g.edges[e] = None;
        }
    }
    for v in 0..g.vertices.len() {
        if !keep[v] {
            g.vertices[v] = None;
        }
    }
    Ok(())
}

/// Clusters vertices closer than `merge_dist` (transitively) and replaces each
/// cluster by one vertex at its centroid. Edges inside a cluster shorter than
/// `merge_dist` are dropped and their polygons absorbed by another edge of the
/// cluster. Degree-two vertices are joined afterwards.
pub fn merge_close_vertices(g: &mut TopologyGraph, merge_dist: f64) {
    if merge_dist <= 0.0 {
        return;
    }
    let ids: Vec<usize> = g.vertex_ids().collect();
    let mut uf = UnionFind::new(g.vertices.len());
    let cell = merge_dist;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for &v in &ids {
        let p = g.vertex(v).pos;
        grid.entry(((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)).or_default().push(v);
    }
    for &v in &ids {
        let p = g.vertex(v).pos;
        let (cx, cy) = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ws) = grid.get(&(cx + dx, cy + dy)) {
                    for &w in ws {
                        if w > v && g.vertex(w).pos.dist(p) < merge_dist {
                            uf.union(v, w);
                        }
                    }
                }
            }
        }
    }
    let mut clusters: HashMap<usize, Vec<usize>> = HashMap::new();
    for &v in &ids {
        clusters.entry(uf.find(v)).or_default().push(v);
    }
    let mut rep = vec![usize::MAX; g.vertices.len()];
    let mut multi: Vec<(usize, Vec<usize>)> = clusters.into_iter().filter(|(_, m)| m.len() > 1).collect();
    if multi.is_empty() {
        return;
    }
    multi.sort_by_key(|(r, _)| *r);
    let site_index = (!g.sites.is_empty()).then(|| SiteIndex::new(&g.sites));
    for (root, members) in &multi {
        let n = members.len() as f64;
        let c = members
            .iter()
            .fold(Point::default(), |acc, &v| acc + g.vertex(v).pos)
            * (1.0 / n);
        for &v in members {
            rep[v] = *root;
        }
        g.vertices[*root].as_mut().unwrap().pos = c;
    }

    // dropped intra-cluster edges remember their polygon and cluster
    let mut orphans: Vec<(usize, PolyEdge)> = Vec::new();
    for e in 0..g.edges.len() {
        let Some(ed) = g.edges[e].as_mut() else { continue };
        let ra = if rep[ed.a] != usize::MAX { rep[ed.a] } else { ed.a };
        let rb = if rep[ed.b] != usize::MAX { rep[ed.b] } else { ed.b };
        if ra == rb && rep[ed.a] != usize::MAX && ed.length() < merge_dist {
            let ed = g.edges[e].take().unwrap();
            if let Some(p) = ed.poly {
                orphans.push((ra, p));
            }
            continue;
        }
        let last = ed.points.len() - 1;
        if ra != ed.a {
            ed.a = ra;
        }
        if rb != ed.b {
            ed.b = rb;
        }
        for (idx, v) in [(0, ed.a), (last, ed.b)] {
            if rep[v] != usize::MAX {
                let pos = g.vertices[v].as_ref().unwrap().pos;
                ed.points[idx] = pos;
                if let Some(si) = &site_index {
                    if let Some((_, d)) = si.nearest(pos) {
                        ed.clearance[idx] = d;
                    }
                }
            }
        }
    }
    for (root, members) in &multi {
        for &v in members {
            if v != *root {
                g.vertices[v] = None;
            }
        }
    }
    g.rebuild_incidence();

    for (root, poly) in orphans {
        let recv = g.vertices[root].as_ref().and_then(|vx| {
            vx.edges
                .iter()
                .copied()
                .max_by(|&x, &y| g.edge(x).length().total_cmp(&g.edge(y).length()).then(y.cmp(&x)))
        });
        match recv {
            Some(e) => {
                let ed = g.edges[e].as_mut().unwrap();
                let anchor = if ed.a == root { 0.0 } else { ed.length() };
                let tris = poly.into_absorbed(anchor);
                ed.poly.get_or_insert_with(PolyEdge::default).left.extend(tris);
            }
            None => warn!("merged vertex {root} has no edges left; polygon dropped"),
        }
    }
    join_degree_two(g);
}

/// Pruning parameters in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct TopologyParams {
    pub min_clearance: f64,
    pub deadend_min_length: f64,
    pub iterations: usize,
    pub merge_dist: f64,
}

impl TopologyParams {
    /// Metric defaults: 0.25 m clearance, 1.0 m dead-ends, 3 rounds, 0.3 m merging.
    pub fn from_resolution(resolution: f64) -> Self {
        TopologyParams {
            min_clearance: 0.25 / resolution,
            deadend_min_length: 1.0 / resolution,
            iterations: 3,
            merge_dist: 0.3 / resolution,
        }
    }
}

/// Area bookkeeping of the pruning stages, in square pixels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageAreas {
    pub half_polygons: f64,
    pub after_joining: f64,
    pub after_dead_ends: f64,
    pub after_largest_component: f64,
    pub after_vertex_merge: f64,
}

/// Runs the full pruning pipeline with polygon tracking.
pub fn build_topology(vg: &VoronoiGraph, shapes: &AlphaShapeSet, params: &TopologyParams) -> Result<(TopologyGraph, StageAreas)> {
    if params.iterations == 0 {
        return Err(Error::InvalidParameter("dead-end pruning needs at least one iteration".into()));
    }
    let mut g = TopologyGraph::from_voronoi(vg);
    filter_outside_boundary(&mut g, shapes)?;
    remove_low_clearance_edges(&mut g, params.min_clearance);
    if g.edge_count() == 0 {
        return Err(Error::Empty("clearance pruning"));
    }
    crate::area_graph::build_half_polygons(&mut g, vg, params.min_clearance)?;
    let mut areas = StageAreas {
        half_polygons: g.polygon_area(),
        ..Default::default()
    };
    join_degree_two(&mut g);
    areas.after_joining = g.polygon_area();
    prune_dead_ends(&mut g, params.deadend_min_length, params.iterations);
    areas.after_dead_ends = g.polygon_area();
    keep_largest_component(&mut g)?;
    areas.after_largest_component = g.polygon_area();
    merge_close_vertices(&mut g, params.merge_dist);
    areas.after_vertex_merge = g.polygon_area();
    debug!(
        "topology graph: {} vertices, {} edges, length {:.1} px",
        g.vertex_count(),
        g.edge_count(),
        g.total_length()
    );
    Ok((g, areas))
}
