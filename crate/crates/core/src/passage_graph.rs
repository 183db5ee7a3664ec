//! Passage Graph: a roadmap whose vertices are the passages of an Area Graph
//! and whose edges connect every pair of passages of the same area.
//!
//! Two variants differ only in how in-area paths are found: 8-connected grid
//! A* restricted to the area's cells, or shortest paths over the Topology
//! Graph waypoints of the area. Queries attach the start and goal as virtual
//! vertices of the areas they lie in and run A* over the passages; nothing is
//! written back into the graph.

use std::cell::RefCell;
use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::time::Instant;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::area_graph::AreaGraph;
use crate::error::{Error, Result};
use crate::geometry::{polyline_length, Point, EPS_SNAP};
use crate::grid_planner::{cost_to_meters, grid_astar_with, grid_paths_from, Cell, GridPath, SearchBuffers, AXIS};
use crate::mapio::GridMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    GridAStar,
    TopoVoronoi,
}

/// Planning method, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Grid,
    AstarPassage,
    VoronoiPassage,
}

impl Method {
    pub fn variant(self) -> Option<Variant> {
        match self {
            Method::Grid => None,
            Method::AstarPassage => Some(Variant::GridAStar),
            Method::VoronoiPassage => Some(Variant::TopoVoronoi),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Grid => "grid",
            Method::AstarPassage => "astar-passage",
            Method::VoronoiPassage => "voronoi-passage",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PassageVertex {
    pub id: usize,
    pub passage: usize,
    pub areas: [usize; 2],
    /// Pixel frame. Grid variant: center of `cell`; otherwise the passage waypoint.
    pub pos: Point,
    pub cell: Cell,
}

#[derive(Debug, Clone, Serialize)]
pub struct PassageEdge {
    pub a: usize,
    pub b: usize,
    pub area: usize,
    /// Pixel frame, from `a` to `b`.
    pub path: Vec<Point>,
    /// Search weight: fixed-point grid cost (grid variant) or pixels.
    pub weight: f64,
    /// Meters.
    pub length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanResult {
    pub method: Method,
    /// World frame, meters.
    pub path: Vec<Point>,
    /// Meters.
    pub length: f64,
    pub time_ms: f64,
    /// Areas visited in order.
    pub areas: Vec<usize>,
    pub rooms_crossed: usize,
}

/// Edge from a query point to a vertex (or directly to the other query point).
#[derive(Debug, Clone)]
pub struct VirtualEdge {
    /// `None` for a direct start-to-goal connection.
    pub vertex: Option<usize>,
    /// Pixel frame, from the query point outward.
    pub path: Vec<Point>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Attachment {
    pub area: usize,
    pub edges: Vec<VirtualEdge>,
}

#[derive(Default)]
struct Scratch {
    buf: SearchBuffers,
    mask: Vec<bool>,
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = RefCell::new(Scratch::default());
}

/// Runs `f` with reusable search buffers and, when `cells` is given, a mask
/// holding exactly those cells.
fn with_scratch<R>(n: usize, cells: Option<&[u32]>, f: impl FnOnce(Option<&[bool]>, &mut SearchBuffers) -> R) -> R {
    SCRATCH.with(|s| {
        let mut s = s.borrow_mut();
        let Scratch { buf, mask } = &mut *s;
        match cells {
            None => f(None, buf),
            Some(cells) => {
                if mask.len() != n {
                    *mask = vec![false; n];
                }
                for &c in cells {
                    mask[c as usize] = true;
                }
                let r = f(Some(mask), buf);
                for &c in cells {
                    mask[c as usize] = false;
                }
                r
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ord64(f64);

impl Eq for Ord64 {}

impl PartialOrd for Ord64 {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Ord64 {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Generation-stamped Dijkstra state over waypoint nodes.
#[derive(Default)]
struct NodeBuffers {
    gen: u32,
    seen: Vec<u32>,
    done: Vec<u32>,
    wanted: Vec<u32>,
    dist: Vec<f64>,
    parent: Vec<usize>,
}

impl NodeBuffers {
    fn reset(&mut self, n: usize) {
        if self.seen.len() < n || self.gen == u32::MAX {
            *self = NodeBuffers {
                gen: 0,
                seen: vec![0; n],
                done: vec![0; n],
                wanted: vec![0; n],
                dist: vec![0.0; n],
                parent: vec![0; n],
            };
        }
        self.gen += 1;
    }

    fn cost(&self, v: usize) -> f64 {
        if self.seen[v] == self.gen {
            self.dist[v]
        } else {
            f64::INFINITY
        }
    }

    fn relax(&mut self, v: usize, d: f64, from: usize) {
        self.seen[v] = self.gen;
        self.dist[v] = d;
        self.parent[v] = from;
    }
}

thread_local! {
    static DIJKSTRA: RefCell<NodeBuffers> = RefCell::new(NodeBuffers::default());
}

/// Topology waypoints of all fragments, edges tagged with their area.
#[derive(Debug, Clone, Default)]
struct WaypointGraph {
    nodes: Vec<Point>,
    adj: Vec<Vec<(usize, f64, usize)>>,
    area_nodes: Vec<Vec<usize>>,
}

type PathTo = Option<(f64, Vec<usize>)>;

impl WaypointGraph {
    fn build(ag: &AreaGraph) -> Self {
        let mut g = WaypointGraph {
            area_nodes: vec![Vec::new(); ag.areas.len()],
            ..Default::default()
        };
        let mut ids: HashMap<(i64, i64), usize> = HashMap::new();
        for f in &ag.fragments {
            let mut prev: Option<usize> = None;
            for &p in &f.points {
                let k = ((p.x / EPS_SNAP).round() as i64, (p.y / EPS_SNAP).round() as i64);
                let id = *ids.entry(k).or_insert_with(|| {
                    g.nodes.push(p);
                    g.adj.push(Vec::new());
                    g.nodes.len() - 1
                });
                g.area_nodes[f.area].push(id);
                if let Some(q) = prev {
                    if q != id {
                        let l = g.nodes[q].dist(g.nodes[id]);
                        g.adj[q].push((id, l, f.area));
                        g.adj[id].push((q, l, f.area));
                    }
                }
                prev = Some(id);
            }
        }
        for list in &mut g.area_nodes {
            list.sort_unstable();
            list.dedup();
        }
        g
    }

    /// Nearest node of `area`, preferring ones in line of sight of `p`.
    fn nearest(&self, area: usize, p: Point, map: &GridMap) -> Option<(usize, bool)> {
        const TRY: usize = 64;
        let mut cands: Vec<(f64, usize)> = self.area_nodes[area].iter().map(|&n| (self.nodes[n].dist2(p), n)).collect();
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if cands.len() > TRY {
            cands.select_nth_unstable_by(TRY, by_dist);
            cands.truncate(TRY);
        }
        cands.sort_by(by_dist);
        for &(_, n) in &cands {
            if line_of_sight(map, p, self.nodes[n]) {
                return Some((n, true));
            }
        }
        cands.first().map(|&(_, n)| (n, false))
    }

    /// Shortest paths from `src` to each target, over edges of `area` only
    /// (all edges when `None`).
    fn shortest(&self, src: usize, area: Option<usize>, targets: &[usize]) -> Vec<PathTo> {
        DIJKSTRA.with(|cell| {
            let mut b = cell.borrow_mut();
            b.reset(self.nodes.len());
            let mut remaining = targets.len();
            for &t in targets {
                if b.wanted[t] != b.gen {
                    b.wanted[t] = b.gen;
                } else {
                    remaining -= 1;
                }
            }
            let mut heap = BinaryHeap::new();
            b.relax(src, 0.0, usize::MAX);
            heap.push(Reverse((Ord64(0.0), src)));
            while let Some(Reverse((Ord64(d), u))) = heap.pop() {
                if b.done[u] == b.gen {
                    continue;
                }
                b.done[u] = b.gen;
                if b.wanted[u] == b.gen {
                    remaining -= 1;
                    if remaining == 0 {
                        break;
                    }
                }
                for &(v, l, a) in &self.adj[u] {
                    if area.is_some_and(|x| x != a) || b.done[v] == b.gen {
                        continue;
                    }
                    let nd = d + l;
                    if b.cost(v) > nd {
                        b.relax(v, nd, u);
                        heap.push(Reverse((Ord64(nd), v)));
                    }
                }
            }
            targets
                .iter()
                .map(|&t| {
                    if b.done[t] != b.gen {
                        return None;
                    }
                    let mut path = vec![t];
                    let mut x = t;
                    while b.parent[x] != usize::MAX {
                        x = b.parent[x];
                        path.push(x);
                    }
                    path.reverse();
                    Some((b.dist[t], path))
                })
                .collect()
        })
    }

    /// Area-restricted shortest paths with a whole-graph fallback.
    fn shortest_in_area(&self, src: usize, area: usize, targets: &[usize]) -> Vec<PathTo> {
        let mut out = self.shortest(src, Some(area), targets);
        let missing: Vec<usize> = (0..targets.len()).filter(|&k| out[k].is_none()).collect();
        if !missing.is_empty() {
            let ts: Vec<usize> = missing.iter().map(|&k| targets[k]).collect();
            for (k, r) in missing.into_iter().zip(self.shortest(src, None, &ts)) {
                out[k] = r;
            }
        }
        out
    }
}

/// True when the segment crosses only free cells (sampled every 0.2 px).
pub fn line_of_sight(map: &GridMap, a: Point, b: Point) -> bool {
    let n = (a.dist(b) / 0.2).ceil().max(1.0) as usize;
    (0..=n).all(|k| {
        let p = a.lerp(b, k as f64 / n as f64);
        map.cell_at(p).is_some_and(|(c, r)| map.is_free(c, r))
    })
}

/// Nearest free cell to `p` (pixel frame) among cells accepted by `allowed`,
/// searched up to `radius` cells away.
fn snap_free(map: &GridMap, p: Point, radius: i64, allowed: impl Fn(usize) -> bool) -> Option<Cell> {
    let (c0, r0) = (p.x.floor() as i64, p.y.floor() as i64);
    let mut best: Option<(f64, Cell)> = None;
    for dr in -radius..=radius {
        for dc in -radius..=radius {
            let (c, r) = (c0 + dc, r0 + dr);
            if !map.is_free_i(c, r) || !allowed(r as usize * map.width + c as usize) {
                continue;
            }
            let d = GridMap::cell_center(c as usize, r as usize).dist2(p);
            if best.is_none_or(|(bd, bc)| d < bd || (d == bd && (r as usize, c as usize) < (bc.1, bc.0))) {
                best = Some((d, (c as usize, r as usize)));
            }
        }
    }
    best.map(|(_, c)| c)
}

fn cells_to_points(cells: &[Cell]) -> Vec<Point> {
    cells.iter().map(|&(c, r)| GridMap::cell_center(c, r)).collect()
}

fn push_path(out: &mut Vec<Point>, seg: impl IntoIterator<Item = Point>) {
    for p in seg {
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
}

/// Area containing a world-frame point; boundary points go to the lowest id.
pub fn locate_area(ag: &AreaGraph, map: &GridMap, p: Point) -> Result<usize> {
    let px = map.world_to_pixel(p);
    ag.locate_px(px).ok_or(Error::NoArea(p.x, p.y))
}

pub struct PassageGraph<'a> {
    pub variant: Variant,
    pub vertices: Vec<PassageVertex>,
    pub edges: Vec<PassageEdge>,
    /// Vertex ids per area.
    pub area_vertices: Vec<Vec<usize>>,
    /// Construction time in milliseconds.
    pub build_ms: f64,
    ag: &'a AreaGraph,
    map: &'a GridMap,
    adjacency: Vec<Vec<usize>>,
    /// Grid variant: mask cells per area.
    area_cells: Vec<Vec<u32>>,
    /// Voronoi variant.
    waypoints: WaypointGraph,
    /// Voronoi variant: attach node per vertex, for each of its two areas.
    attach: Vec<[usize; 2]>,
}

/// Per free cell, the lowest id of the areas containing its center.
pub fn area_labels(ag: &AreaGraph, map: &GridMap) -> Vec<Option<usize>> {
    (0..map.cells.len())
        .map(|i| {
            let (c, r) = (i % map.width, i / map.width);
            if map.is_free(c, r) {
                ag.locate_px(GridMap::cell_center(c, r))
            } else {
                None
            }
        })
        .collect()
}

/// Labeled cells of each area, grown by one cell (8-neighborhood) over free
/// space so that passages on area borders are reachable from both sides.
fn area_masks(labels: &[Option<usize>], map: &GridMap, n_areas: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); n_areas];
    let mut here: Vec<usize> = Vec::with_capacity(9);
    for r in 0..map.height {
        for c in 0..map.width {
            if !map.is_free(c, r) {
                continue;
            }
            here.clear();
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (x, y) = (c as i64 + dc, r as i64 + dr);
                    if x < 0 || y < 0 || x >= map.width as i64 || y >= map.height as i64 {
                        continue;
                    }
                    if let Some(a) = labels[y as usize * map.width + x as usize] {
                        if !here.contains(&a) {
                            here.push(a);
                        }
                    }
                }
            }
            for &a in &here {
                out[a].push((r * map.width + c) as u32);
            }
        }
    }
    out
}

/// Builds the roadmap for `variant`.
pub fn build_passage_graph<'a>(ag: &'a AreaGraph, variant: Variant, map: &'a GridMap) -> Result<PassageGraph<'a>> {
    let start = Instant::now();
    let n_areas = ag.areas.len();
    let mut pg = PassageGraph {
        variant,
        vertices: Vec::with_capacity(ag.passages.len()),
        edges: Vec::new(),
        area_vertices: vec![Vec::new(); n_areas],
        build_ms: 0.0,
        ag,
        map,
        adjacency: vec![Vec::new(); ag.passages.len()],
        area_cells: Vec::new(),
        waypoints: WaypointGraph::default(),
        attach: Vec::new(),
    };
    match variant {
        Variant::GridAStar => pg.build_grid()?,
        Variant::TopoVoronoi => pg.build_voronoi(),
    }
    for (k, e) in pg.edges.iter().enumerate() {
        pg.adjacency[e.a].push(k);
        pg.adjacency[e.b].push(k);
    }
    pg.build_ms = start.elapsed().as_secs_f64() * 1e3;
    debug!(
        "{variant:?} passage graph: {} vertices, {} edges in {:.1} ms",
        pg.vertices.len(),
        pg.edges.len(),
        pg.build_ms
    );
    Ok(pg)
}

impl<'a> PassageGraph<'a> {
    fn build_grid(&mut self) -> Result<()> {
        let (ag, map) = (self.ag, self.map);
        let labels = area_labels(ag, map);
        self.area_cells = area_masks(&labels, map, ag.areas.len());
        for p in &ag.passages {
            let [a0, a1] = p.areas;
            let in_both = |i: usize| labels_near(&labels, map, i, a0) && labels_near(&labels, map, i, a1);
            let cell = snap_free(map, p.waypoint, 3, in_both)
                .or_else(|| snap_free(map, p.waypoint, 6, |_| true))
                .ok_or_else(|| Error::InvalidMap(format!("passage {} has no free cell nearby", p.id)))?;
            let idx = map.index(cell.0, cell.1) as u32;
            for a in p.areas {
                if !self.area_cells[a].contains(&idx) {
                    self.area_cells[a].push(idx);
                }
            }
            self.push_vertex(p.id, p.areas, GridMap::cell_center(cell.0, cell.1), cell);
        }
        for cells in &mut self.area_cells {
            cells.sort_unstable();
        }
        let n = map.cells.len();
        for a in 0..ag.areas.len() {
            let verts = self.area_vertices[a].clone();
            for (i, &u) in verts.iter().enumerate() {
                let rest = &verts[i + 1..];
                if rest.is_empty() {
                    continue;
                }
                let targets: Vec<Cell> = rest.iter().map(|&v| self.vertices[v].cell).collect();
                let paths = with_scratch(n, Some(&self.area_cells[a]), |mask, buf| {
                    grid_paths_from(map, self.vertices[u].cell, &targets, mask, buf)
                });
                for (&v, path) in rest.iter().zip(paths) {
                    match path {
                        Some(gp) => self.push_grid_edge(u, v, a, gp),
                        None => warn!("passages {u} and {v} are not connected inside area {a}"),
                    }
                }
            }
        }
        Ok(())
    }

    fn build_voronoi(&mut self) {
        let (ag, map) = (self.ag, self.map);
        self.waypoints = WaypointGraph::build(ag);
        for p in &ag.passages {
            let cell = map.cell_at(p.waypoint).unwrap_or((0, 0));
            let v = self.push_vertex(p.id, p.areas, p.waypoint, cell);
            let mut at = [usize::MAX; 2];
            for (s, &a) in p.areas.iter().enumerate() {
                match self.waypoints.nearest(a, p.waypoint, map) {
                    Some((node, los)) => {
                        if !los {
                            warn!("passage {} has no line of sight into area {a}", p.id);
                        }
                        at[s] = node;
                    }
                    None => warn!("area {a} has no waypoints"),
                }
            }
            debug_assert_eq!(v, self.attach.len());
            self.attach.push(at);
        }
        for a in 0..ag.areas.len() {
            let verts = self.area_vertices[a].clone();
            for (i, &u) in verts.iter().enumerate() {
                let rest = &verts[i + 1..];
                let src = self.attach_node(u, a);
                if rest.is_empty() || src == usize::MAX {
                    continue;
                }
                let targets: Vec<usize> = rest.iter().map(|&v| self.attach_node(v, a)).collect();
                let paths = self.waypoints.shortest_in_area(src, a, &targets);
                for (&v, path) in rest.iter().zip(paths) {
                    match path {
                        Some((_, nodes)) => {
                            let mut pts = vec![self.vertices[u].pos];
                            push_path(&mut pts, nodes.iter().map(|&n| self.waypoints.nodes[n]));
                            push_path(&mut pts, [self.vertices[v].pos]);
                            let w = polyline_length(&pts);
                            self.edges.push(PassageEdge {
                                a: u,
                                b: v,
                                area: a,
                                path: pts,
                                weight: w,
                                length: w * map.resolution,
                            });
                        }
                        None => warn!("passages {u} and {v} are not connected in the topology graph"),
                    }
                }
            }
        }
    }

    fn push_vertex(&mut self, passage: usize, areas: [usize; 2], pos: Point, cell: Cell) -> usize {
        let id = self.vertices.len();
        self.vertices.push(PassageVertex {
            id,
            passage,
            areas,
            pos,
            cell,
        });
        for a in areas {
            self.area_vertices[a].push(id);
        }
        id
    }

    fn push_grid_edge(&mut self, a: usize, b: usize, area: usize, gp: GridPath) {
        self.edges.push(PassageEdge {
            a,
            b,
            area,
            path: cells_to_points(&gp.cells),
            weight: gp.cost as f64,
            length: gp.length,
        });
    }

    fn attach_node(&self, v: usize, area: usize) -> usize {
        let side = if self.vertices[v].areas[0] == area { 0 } else { 1 };
        self.attach[v][side]
    }

    pub fn ag(&self) -> &AreaGraph {
        self.ag
    }

    pub fn map(&self) -> &GridMap {
        self.map
    }

    /// Neighbors of vertex `v` with the connecting edge ids.
    pub fn edges_of(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Area of a pixel-frame point. Free points outside every area polygon
    /// resolve to the nearest area reachable through free space.
    pub fn locate_px(&self, p: Point) -> Result<usize> {
        if let Some(a) = self.ag.locate_px(p) {
            return Ok(a);
        }
        let world = self.map.pixel_to_world(p);
        let (c, r) = self.map.cell_at(p).ok_or(Error::NoArea(world.x, world.y))?;
        if !self.map.is_free(c, r) {
            return Err(Error::NoArea(world.x, world.y));
        }
        let map = self.map;
        let mut seen = HashMap::new();
        let mut queue = VecDeque::from([(c, r)]);
        seen.insert((c, r), ());
        while let Some((c, r)) = queue.pop_front() {
            if let Some(a) = self.ag.locate_px(GridMap::cell_center(c, r)) {
                return Ok(a);
            }
            if seen.len() > 4096 {
                break;
            }
            for (dc, dr) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let (x, y) = (c as i64 + dc, r as i64 + dr);
                if map.is_free_i(x, y) && seen.insert((x as usize, y as usize), ()).is_none() {
                    queue.push_back((x as usize, y as usize));
                }
            }
        }
        Err(Error::NoArea(world.x, world.y))
    }

    /// Connects a pixel-frame point to every passage of its area.
    pub fn attach_virtual_passage(&self, p: Point) -> Result<Attachment> {
        let att = self.attach_px(p, None)?;
        if att.edges.is_empty() {
            let w = self.map.pixel_to_world(p);
            return Err(Error::IsolatedPoint(w.x, w.y));
        }
        Ok(att)
    }

    /// With `other`, also connects directly to that point when it lies in
    /// the same area.
    fn attach_px(&self, p: Point, other: Option<(Point, usize)>) -> Result<Attachment> {
        let area = self.locate_px(p)?;
        let direct = other.filter(|&(_, a)| a == area).map(|(q, _)| q);
        let edges = match self.variant {
            Variant::GridAStar => self.attach_grid(p, area, direct),
            Variant::TopoVoronoi => self.attach_voronoi(p, area, direct),
        };
        Ok(Attachment { area, edges })
    }

    fn attach_grid(&self, p: Point, area: usize, direct: Option<Point>) -> Vec<VirtualEdge> {
        let map = self.map;
        let Some(cell) = map.cell_at(p).filter(|&(c, r)| map.is_free(c, r)) else {
            return Vec::new();
        };
        let verts = &self.area_vertices[area];
        let mut targets: Vec<Cell> = verts.iter().map(|&v| self.vertices[v].cell).collect();
        if let Some(q) = direct.and_then(|q| map.cell_at(q)) {
            targets.push(q);
        }
        let idx = map.index(cell.0, cell.1) as u32;
        let cells = &self.area_cells[area];
        let restrict = cells.binary_search(&idx).is_ok();
        let paths = with_scratch(map.cells.len(), restrict.then_some(cells.as_slice()), |mask, buf| {
            grid_paths_from(map, cell, &targets, mask, buf)
        });
        let mut out = Vec::new();
        for (k, path) in paths.into_iter().enumerate() {
            if let Some(gp) = path {
                let mut pts = vec![p];
                push_path(&mut pts, cells_to_points(&gp.cells));
                out.push(VirtualEdge {
                    vertex: verts.get(k).copied(),
                    path: pts,
                    weight: gp.cost as f64,
                });
            }
        }
        out
    }

    /// Straight segment to the nearest waypoint of the area (a grid path
    /// when no waypoint is in line of sight), then waypoint paths onward.
    fn voronoi_entry(&self, p: Point, area: usize) -> Option<(Vec<Point>, usize)> {
        let (node, los) = self.waypoints.nearest(area, p, self.map)?;
        let q = self.waypoints.nodes[node];
        if los {
            let mut pts = vec![p];
            push_path(&mut pts, [q]);
            return Some((pts, node));
        }
        let map = self.map;
        let a = map.cell_at(p)?;
        let b = snap_free(map, q, 2, |_| true)?;
        let gp = with_scratch(map.cells.len(), None, |_, buf| grid_astar_with(map, a, b, None, buf))?;
        let mut pts = vec![p];
        push_path(&mut pts, cells_to_points(&gp.cells));
        push_path(&mut pts, [q]);
        Some((pts, node))
    }

    fn attach_voronoi(&self, p: Point, area: usize, direct: Option<Point>) -> Vec<VirtualEdge> {
        let Some((prefix, src)) = self.voronoi_entry(p, area) else {
            return Vec::new();
        };
        let verts = &self.area_vertices[area];
        let mut targets: Vec<usize> = verts.iter().map(|&v| self.attach_node(v, area)).collect();
        let goal_entry = direct.and_then(|q| self.voronoi_entry(q, area));
        if let Some((_, n)) = &goal_entry {
            targets.push(*n);
        }
        let paths = self.waypoints.shortest_in_area(src, area, &targets);
        let mut out = Vec::new();
        for (k, path) in paths.into_iter().enumerate() {
            let Some((_, nodes)) = path else { continue };
            let mut pts = prefix.clone();
            push_path(&mut pts, nodes.iter().map(|&n| self.waypoints.nodes[n]));
            let vertex = verts.get(k).copied();
            match vertex {
                Some(v) => push_path(&mut pts, [self.vertices[v].pos]),
                None => {
                    let (suffix, _) = goal_entry.as_ref().unwrap();
                    push_path(&mut pts, suffix.iter().rev().copied());
                }
            }
            out.push(VirtualEdge {
                vertex,
                weight: polyline_length(&pts),
                path: pts,
            });
        }
        out
    }

    /// Plans between two world-frame points. `Ok(None)` means no path,
    /// including a free point cut off from every area.
    pub fn plan(&self, start: Point, goal: Point) -> Result<Option<PlanResult>> {
        self.plan_px(self.map.world_to_pixel(start), self.map.world_to_pixel(goal))
    }

    pub fn plan_px(&self, s: Point, g: Point) -> Result<Option<PlanResult>> {
        let t0 = Instant::now();
        let method = match self.variant {
            Variant::GridAStar => Method::AstarPassage,
            Variant::TopoVoronoi => Method::VoronoiPassage,
        };
        let map = self.map;
        // a free point that reaches no area is cut off from the roadmap
        let free = |p: Point| map.cell_at(p).is_some_and(|(c, r)| map.is_free(c, r));
        let (sa, ga) = match (self.locate_px(s), self.locate_px(g)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(Error::NoArea(..)), _) if free(s) => return Ok(None),
            (_, Err(Error::NoArea(..))) if free(g) => return Ok(None),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        if s.dist(g) <= EPS_SNAP {
            return Ok(Some(self.result(method, vec![s, g], 0.0, vec![sa], t0)));
        }

        if self.variant == Variant::GridAStar && sa == ga {
            if let (Some(a), Some(b)) = (map.cell_at(s), map.cell_at(g)) {
                let cells = &self.area_cells[sa];
                let (ia, ib) = (map.index(a.0, a.1) as u32, map.index(b.0, b.1) as u32);
                let inside = cells.binary_search(&ia).is_ok() && cells.binary_search(&ib).is_ok();
                let gp = with_scratch(map.cells.len(), inside.then_some(cells.as_slice()), |mask, buf| {
                    grid_astar_with(map, a, b, mask, buf)
                });
                if let Some(gp) = gp {
                    let mut pts = vec![s];
                    push_path(&mut pts, cells_to_points(&gp.cells));
                    push_path(&mut pts, [g]);
                    return Ok(Some(self.result(method, pts, gp.cost as f64, vec![sa], t0)));
                }
            }
        }

        let start = self.attach_px(s, Some((g, ga)))?;
        let goal = self.attach_px(g, None)?;
        let nv = self.vertices.len();
        let (sn, gn) = (nv, nv + 1);
        let scale = if self.variant == Variant::GridAStar { AXIS as f64 } else { 1.0 };
        let goal_pos = match self.variant {
            Variant::GridAStar => map.cell_at(g).map_or(g, |(c, r)| GridMap::cell_center(c, r)),
            Variant::TopoVoronoi => g,
        };
        let pos = |n: usize| if n < nv { self.vertices[n].pos } else { goal_pos };
        let h = |n: usize| if n == gn { 0.0 } else { pos(n).dist(goal_pos) * scale * (1.0 - 1e-9) };
        let mut to_goal: HashMap<usize, usize> = HashMap::new();
        for (k, e) in goal.edges.iter().enumerate() {
            if let Some(v) = e.vertex {
                to_goal.insert(v, k);
            }
        }

        // A* over passages; `via` records (previous node, edge ref)
        #[derive(Clone, Copy)]
        enum Via {
            Start(usize),
            Edge(usize),
            Goal(usize),
        }
        let mut best: HashMap<usize, (f64, usize, Via)> = HashMap::new();
        let mut closed: HashMap<usize, ()> = HashMap::new();
        let mut heap = BinaryHeap::new();
        for (k, e) in start.edges.iter().enumerate() {
            let node = e.vertex.unwrap_or(gn);
            if best.get(&node).is_none_or(|b| e.weight < b.0) {
                best.insert(node, (e.weight, sn, Via::Start(k)));
                heap.push(Reverse((Ord64(e.weight + h(node)), node)));
            }
        }
        let mut found = false;
        while let Some(Reverse((_, u))) = heap.pop() {
            if closed.insert(u, ()).is_some() {
                continue;
            }
            if u == gn {
                found = true;
                break;
            }
            let gu = best[&u].0;
            let mut relax = |v: usize, w: f64, via: Via, heap: &mut BinaryHeap<_>| {
                let nd = gu + w;
                if !closed.contains_key(&v) && best.get(&v).is_none_or(|b| nd < b.0) {
                    best.insert(v, (nd, u, via));
                    heap.push(Reverse((Ord64(nd + h(v)), v)));
                }
            };
            for &k in &self.adjacency[u] {
                let e = &self.edges[k];
                let v = if e.a == u { e.b } else { e.a };
                relax(v, e.weight, Via::Edge(k), &mut heap);
            }
            if let Some(&k) = to_goal.get(&u) {
                relax(gn, goal.edges[k].weight, Via::Goal(k), &mut heap);
            }
        }
        if !found {
            return Ok(None);
        }

        let mut steps = Vec::new();
        let mut x = gn;
        while x != sn {
            let (_, prev, via) = best[&x];
            steps.push((prev, x, via));
            x = prev;
        }
        steps.reverse();
        let mut pts = Vec::new();
        let mut areas = Vec::new();
        let mut weight = 0.0;
        for &(prev, node, via) in &steps {
            let (seg, area): (Vec<Point>, usize) = match via {
                Via::Start(k) => (start.edges[k].path.clone(), start.area),
                Via::Goal(k) => (goal.edges[k].path.iter().rev().copied().collect(), goal.area),
                Via::Edge(k) => {
                    let e = &self.edges[k];
                    let seg = if e.a == prev && e.b == node {
                        e.path.clone()
                    } else {
                        e.path.iter().rev().copied().collect()
                    };
                    (seg, e.area)
                }
            };
            weight += match via {
                Via::Start(k) => start.edges[k].weight,
                Via::Goal(k) => goal.edges[k].weight,
                Via::Edge(k) => self.edges[k].weight,
            };
            push_path(&mut pts, seg);
            if areas.last() != Some(&area) {
                areas.push(area);
            }
        }
        if self.variant == Variant::GridAStar {
            push_path(&mut pts, [g]);
        }
        Ok(Some(self.result(method, pts, weight, areas, t0)))
    }

    fn result(&self, method: Method, pts: Vec<Point>, weight: f64, areas: Vec<usize>, t0: Instant) -> PlanResult {
        let length = match self.variant {
            Variant::GridAStar => cost_to_meters(weight.round() as u64, self.map.resolution),
            Variant::TopoVoronoi => weight * self.map.resolution,
        };
        PlanResult {
            method,
            path: pts.iter().map(|&p| self.map.pixel_to_world(p)).collect(),
            length,
            time_ms: t0.elapsed().as_secs_f64() * 1e3,
            rooms_crossed: areas.len().saturating_sub(1),
            areas,
        }
    }

    pub fn to_json_doc(&self, with_paths: bool) -> PassageGraphJson {
        let world = |p: Point| {
            let w = self.map.pixel_to_world(p);
            [round6(w.x), round6(w.y)]
        };
        PassageGraphJson {
            variant: self.variant,
            resolution: self.map.resolution,
            build_ms: self.build_ms,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexJson {
                    id: v.id,
                    passage: v.passage,
                    areas: v.areas,
                    position: world(v.pos),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    a: e.a,
                    b: e.b,
                    area: e.area,
                    length_m: round6(e.length),
                    path: with_paths.then(|| e.path.iter().map(|&p| world(p)).collect()),
                })
                .collect(),
        }
    }

    pub fn to_json(&self, with_paths: bool) -> Result<String> {
        let doc = self.to_json_doc(with_paths);
        doc.validate()?;
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Serialize(e.to_string()))
    }
}

fn labels_near(labels: &[Option<usize>], map: &GridMap, i: usize, a: usize) -> bool {
    let (c, r) = ((i % map.width) as i64, (i / map.width) as i64);
    (-1i64..=1).any(|dr| {
        (-1i64..=1).any(|dc| {
            let (x, y) = (c + dc, r + dr);
            x >= 0 && y >= 0 && x < map.width as i64 && y < map.height as i64 && labels[y as usize * map.width + x as usize] == Some(a)
        })
    })
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Baseline: grid A* over the whole map between two world-frame points.
pub fn grid_plan(map: &GridMap, start: Point, goal: Point) -> Result<Option<PlanResult>> {
    let t0 = Instant::now();
    let (s, g) = (map.world_to_pixel(start), map.world_to_pixel(goal));
    let free_cell = |p: Point, w: Point| map.cell_at(p).filter(|&(c, r)| map.is_free(c, r)).ok_or(Error::NoArea(w.x, w.y));
    let a = free_cell(s, start)?;
    let b = free_cell(g, goal)?;
    let gp = with_scratch(map.cells.len(), None, |_, buf| grid_astar_with(map, a, b, None, buf));
    Ok(gp.map(|gp| {
        let mut pts = vec![s];
        push_path(&mut pts, cells_to_points(&gp.cells));
        push_path(&mut pts, [g]);
        PlanResult {
            method: Method::Grid,
            path: pts.iter().map(|&p| map.pixel_to_world(p)).collect(),
            length: gp.length,
            time_ms: t0.elapsed().as_secs_f64() * 1e3,
            areas: Vec::new(),
            rooms_crossed: 0,
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    pub passage: usize,
    pub areas: [usize; 2],
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub a: usize,
    pub b: usize,
    pub area: usize,
    pub length_m: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub path: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageGraphJson {
    pub variant: Variant,
    pub resolution: f64,
    pub build_ms: f64,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
}

impl PassageGraphJson {
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i || v.areas[0] >= v.areas[1] {
                return Err(Error::Serialize(format!("vertex {i} is inconsistent")));
            }
        }
        let n = self.vertices.len();
        for (k, e) in self.edges.iter().enumerate() {
            let ok = e.a < n && e.b < n && e.a != e.b && e.length_m >= 0.0;
            let in_area = ok && self.vertices[e.a].areas.contains(&e.area) && self.vertices[e.b].areas.contains(&e.area);
            if !in_area {
                return Err(Error::Serialize(format!("edge {k} is inconsistent")));
            }
        }
        Ok(())
    }
}
