//! 8-connected grid A* without corner cutting, plus an independent
//! uniform-cost oracle.
//!
//! Step costs are fixed-point integers (axis 1e6, diagonal round(√2·1e6)) so
//! that path costs compare exactly; lengths in meters are derived from them.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::mapio::GridMap;

pub const AXIS: u64 = 1_000_000;
pub const DIAG: u64 = 1_414_214;

pub type Cell = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    /// Column, row pairs from start to goal.
    pub cells: Vec<Cell>,
    /// Fixed-point cost.
    pub cost: u64,
    /// Length in meters.
    pub length: f64,
}

/// Converts a fixed-point cost to meters.
pub fn cost_to_meters(cost: u64, resolution: f64) -> f64 {
    cost as f64 / AXIS as f64 * resolution
}

/// Octile distance in fixed-point units.
pub fn octile(a: Cell, b: Cell) -> u64 {
    let dx = a.0.abs_diff(b.0) as u64;
    let dy = a.1.abs_diff(b.1) as u64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    DIAG * lo + AXIS * (hi - lo)
}

const MOVES: [(i64, i64, u64); 8] = [
    (1, 0, AXIS),
    (-1, 0, AXIS),
    (0, 1, AXIS),
    (0, -1, AXIS),
    (1, 1, DIAG),
    (1, -1, DIAG),
    (-1, 1, DIAG),
    (-1, -1, DIAG),
];

/// Reusable per-thread search state; generation stamps avoid clearing.
#[derive(Debug, Clone, Default)]
pub struct SearchBuffers {
    g: Vec<u64>,
    parent: Vec<u32>,
    stamp: Vec<u32>,
    closed: Vec<u32>,
    gen: u32,
}

impl SearchBuffers {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        if self.g.len() != n {
            self.g = vec![0; n];
            self.parent = vec![u32::MAX; n];
            self.stamp = vec![0; n];
            self.closed = vec![0; n];
            self.gen = 0;
        }
        self.gen = self.gen.wrapping_add(1);
        if self.gen == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.closed.iter_mut().for_each(|s| *s = 0);
            self.gen = 1;
        }
    }

    #[inline]
    fn cost(&self, i: usize) -> u64 {
        if self.stamp[i] == self.gen {
            self.g[i]
        } else {
            u64::MAX
        }
    }

    #[inline]
    fn relax(&mut self, i: usize, g: u64, parent: usize) -> bool {
        if g < self.cost(i) {
            self.stamp[i] = self.gen;
            self.g[i] = g;
            self.parent[i] = parent as u32;
            true
        } else {
            false
        }
    }

    fn trace(&self, map: &GridMap, goal: usize) -> Vec<Cell> {
        let mut cells = vec![(goal % map.width, goal / map.width)];
        let mut i = goal;
        while self.parent[i] != u32::MAX {
            i = self.parent[i] as usize;
            cells.push((i % map.width, i / map.width));
        }
        cells.reverse();
        cells
    }
}

#[inline]
fn passable(map: &GridMap, mask: Option<&[bool]>, c: i64, r: i64) -> bool {
    map.is_free_i(c, r) && mask.is_none_or(|m| m[r as usize * map.width + c as usize])
}

/// Successors of cell `i` (no corner cutting).
#[inline]
fn for_each_neighbor(map: &GridMap, mask: Option<&[bool]>, i: usize, mut f: impl FnMut(usize, u64)) {
    let (c, r) = ((i % map.width) as i64, (i / map.width) as i64);
    for &(dc, dr, w) in &MOVES {
        let (nc, nr) = (c + dc, r + dr);
        if !passable(map, mask, nc, nr) {
            continue;
        }
        if dc != 0 && dr != 0 && !(passable(map, mask, c + dc, r) && passable(map, mask, c, r + dr)) {
            continue;
        }
        f(nr as usize * map.width + nc as usize, w);
    }
}

fn endpoints_ok(map: &GridMap, mask: Option<&[bool]>, a: Cell, b: Cell) -> bool {
    [a, b].iter().all(|&(c, r)| c < map.width && r < map.height && passable(map, mask, c as i64, r as i64))
}

/// Optimal path between two free cells, optionally restricted to `mask`.
pub fn grid_astar(map: &GridMap, start: Cell, goal: Cell, mask: Option<&[bool]>) -> Option<GridPath> {
    grid_astar_with(map, start, goal, mask, &mut SearchBuffers::new())
}

pub fn grid_astar_with(map: &GridMap, start: Cell, goal: Cell, mask: Option<&[bool]>, buf: &mut SearchBuffers) -> Option<GridPath> {
    if !endpoints_ok(map, mask, start, goal) {
        return None;
    }
    let n = map.width * map.height;
    buf.reset(n);
    let s = map.index(start.0, start.1);
    let t = map.index(goal.0, goal.1);
    buf.relax(s, 0, usize::MAX);
    buf.parent[s] = u32::MAX;
    let mut open = BinaryHeap::new();
    open.push(Reverse((octile(start, goal), 0u64, s)));
    while let Some(Reverse((_, g, i))) = open.pop() {
        if buf.closed[i] == buf.gen || g > buf.cost(i) {
            continue;
        }
        buf.closed[i] = buf.gen;
        if i == t {
            let cells = buf.trace(map, t);
            return Some(GridPath {
                cells,
                cost: g,
                length: cost_to_meters(g, map.resolution),
            });
        }
        for_each_neighbor(map, mask, i, |j, w| {
            let ng = g + w;
            if buf.closed[j] != buf.gen && buf.relax(j, ng, i) {
                let h = octile((j % map.width, j / map.width), goal);
                open.push(Reverse((ng + h, ng, j)));
            }
        });
    }
    None
}

/// One-to-many Dijkstra from `source` within `mask`; returns a path to each
/// reachable target.
pub fn grid_paths_from(map: &GridMap, source: Cell, targets: &[Cell], mask: Option<&[bool]>, buf: &mut SearchBuffers) -> Vec<Option<GridPath>> {
    let mut out = vec![None; targets.len()];
    if !endpoints_ok(map, mask, source, source) {
        return out;
    }
    let n = map.width * map.height;
    buf.reset(n);
    let s = map.index(source.0, source.1);
    buf.relax(s, 0, usize::MAX);
    buf.parent[s] = u32::MAX;
    let target_idx: Vec<usize> = targets.iter().map(|&(c, r)| map.index(c, r)).collect();
    let mut remaining = target_idx.len();
    let mut is_target = std::collections::HashMap::new();
    for (k, &t) in target_idx.iter().enumerate() {
        is_target.entry(t).or_insert_with(Vec::new).push(k);
    }
    let mut open = BinaryHeap::new();
    open.push(Reverse((0u64, s)));
    while let Some(Reverse((g, i))) = open.pop() {
        if buf.closed[i] == buf.gen || g > buf.cost(i) {
            continue;
        }
        buf.closed[i] = buf.gen;
        if let Some(ks) = is_target.get(&i) {
            let cells = buf.trace(map, i);
            for &k in ks {
                out[k] = Some(GridPath {
                    cells: cells.clone(),
                    cost: g,
                    length: cost_to_meters(g, map.resolution),
                });
                remaining -= 1;
            }
            if remaining == 0 {
                break;
            }
        }
        for_each_neighbor(map, mask, i, |j, w| {
            if buf.closed[j] != buf.gen && buf.relax(j, g + w, i) {
                open.push(Reverse((g + w, j)));
            }
        });
    }
    out
}

/// Uniform-cost search written independently of [`grid_astar`]; returns the
/// fixed-point cost or `None` when unreachable.
pub fn bfs_oracle_cost(map: &GridMap, start: Cell, goal: Cell) -> Option<u64> {
    let (w, h) = (map.width as i64, map.height as i64);
    let free = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && map.cells[(y * w + x) as usize] == crate::mapio::Occupancy::Free;
    let (sx, sy) = (start.0 as i64, start.1 as i64);
    let (gx, gy) = (goal.0 as i64, goal.1 as i64);
    if !free(sx, sy) || !free(gx, gy) {
        return None;
    }
    let mut dist = vec![u64::MAX; (w * h) as usize];
    let mut heap = BinaryHeap::new();
    dist[(sy * w + sx) as usize] = 0;
    heap.push(Reverse((0u64, sx, sy)));
    while let Some(Reverse((d, x, y))) = heap.pop() {
        if (x, y) == (gx, gy) {
            return Some(d);
        }
        if d > dist[(y * w + x) as usize] {
            continue;
        }
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x + dx, y + dy);
                if !free(nx, ny) {
                    continue;
                }
                let diagonal = dx != 0 && dy != 0;
                if diagonal && (!free(x + dx, y) || !free(x, y + dy)) {
                    continue;
                }
                let nd = d + if diagonal { DIAG } else { AXIS };
                let k = (ny * w + nx) as usize;
                if nd < dist[k] {
                    dist[k] = nd;
                    heap.push(Reverse((nd, nx, ny)));
                }
            }
        }
    }
    None
}

/// Oracle path length in meters; `f64::INFINITY` when unreachable.
pub fn bfs_oracle(map: &GridMap, start: Cell, goal: Cell) -> f64 {
    bfs_oracle_cost(map, start, goal).map_or(f64::INFINITY, |c| cost_to_meters(c, map.resolution))
}

/// Checks 8-adjacency, freeness and the corner rule along a cell path.
pub fn is_valid_path(map: &GridMap, cells: &[Cell]) -> bool {
    cells.iter().all(|&(c, r)| c < map.width && r < map.height && map.is_free(c, r))
        && cells.windows(2).all(|w| {
            let (dc, dr) = (w[1].0 as i64 - w[0].0 as i64, w[1].1 as i64 - w[0].1 as i64);
            let adjacent = dc.abs() <= 1 && dr.abs() <= 1 && (dc, dr) != (0, 0);
            let corner_ok = dc == 0
                || dr == 0
                || (map.is_free_i(w[0].0 as i64 + dc, w[0].1 as i64) && map.is_free_i(w[0].0 as i64, w[0].1 as i64 + dr));
            adjacent && corner_ok
        })
}

/// Fixed-point cost of a cell path.
pub fn path_cost(cells: &[Cell]) -> u64 {
    cells
        .windows(2)
        .map(|w| if w[0].0 != w[1].0 && w[0].1 != w[1].1 { DIAG } else { AXIS })
        .sum()
}
