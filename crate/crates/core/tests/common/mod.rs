//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use areagraph::area_graph::{alpha_bounds_px, AreaGraph};
use areagraph::geometry::Point;
use areagraph::mapio::{GridMap, Occupancy};
use areagraph::pipeline::{segment, SegmentParams, Segmentation};
use areagraph::synth::{generate, RegionKind, SynthMap, SynthSpec};

/// α interval for a synthetic map. Sites sit at wall cell centers, so a
/// `w`-cell opening is a `w + 1` gap between sites.
pub fn site_gap_bounds(spec: &SynthSpec) -> (f64, f64) {
    alpha_bounds_px(spec.door_px as f64 + 1.0, spec.corridor_px as f64 + 1.0).unwrap()
}

/// The `k`-th of `n` evenly spaced interior points of the α interval.
pub fn alpha_at(spec: &SynthSpec, k: usize, n: usize) -> f64 {
    let (lo, hi) = site_gap_bounds(spec);
    lo + (hi - lo) * (k + 1) as f64 / (n + 1) as f64
}

pub fn mid_alpha(spec: &SynthSpec) -> f64 {
    alpha_at(spec, 0, 1)
}

pub fn run(spec: &SynthSpec, alpha: f64) -> (SynthMap, Segmentation) {
    let s = generate(spec).unwrap();
    let seg = segment(&s.map, &SegmentParams::with_alpha(alpha)).unwrap();
    (s, seg)
}

/// Squared distance from each free cell center to the nearest occupied cell
/// center, capped at `(reach + 1)^2` (brute force in a window).
pub fn clearance2(map: &GridMap, reach: usize) -> Vec<f64> {
    let cap = ((reach + 1) * (reach + 1)) as f64;
    let mut out = vec![0.0; map.cells.len()];
    let (w, h) = (map.width as i64, map.height as i64);
    let r = reach as i64 + 1;
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if map.cells[i] != Occupancy::Free {
                continue;
            }
            let mut best = cap;
            for yy in (y - r).max(0)..=(y + r).min(h - 1) {
                for xx in (x - r).max(0)..=(x + r).min(w - 1) {
                    if map.cells[(yy * w + xx) as usize] == Occupancy::Occupied {
                        let d = ((xx - x).pow(2) + (yy - y).pow(2)) as f64;
                        if d < best {
                            best = d;
                        }
                    }
                }
            }
            out[i] = best;
        }
    }
    out
}

/// Connected groups of free cells where a disk of squared radius `alpha`
/// centered on the cell touches no occupied cell center.
pub fn disk_components(map: &GridMap, alpha: f64) -> Vec<Vec<usize>> {
    let d2 = clearance2(map, alpha.sqrt().ceil() as usize + 1);
    let fits: Vec<bool> = (0..map.cells.len()).map(|i| map.cells[i] == Occupancy::Free && d2[i] > alpha).collect();
    let mut seen = vec![false; fits.len()];
    let mut comps = Vec::new();
    for s in 0..fits.len() {
        if !fits[s] || seen[s] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(i) = queue.pop_front() {
            comp.push(i);
            let (x, y) = ((i % map.width) as i64, (i / map.width) as i64);
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= map.width as i64 || ny >= map.height as i64 {
                    continue;
                }
                let j = ny as usize * map.width + nx as usize;
                if fits[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Expected area count: disk components plus corridors the disk never enters.
pub fn expected_area_count(s: &SynthMap, alpha: f64) -> usize {
    let comps = disk_components(&s.map, alpha);
    let mut in_comp = vec![false; s.map.cells.len()];
    for c in &comps {
        for &i in c {
            in_comp[i] = true;
        }
    }
    let bare_corridors = (0..s.regions.len())
        .filter(|&k| s.regions[k].kind == RegionKind::Corridor)
        .filter(|&k| !s.region_cells(k).iter().any(|&i| in_comp[i]))
        .count();
    comps.len() + bare_corridors
}

fn in_ring(p: Point, ring: &[Point]) -> bool {
    let mut inside = false;
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y) {
            inside = !inside;
        }
    }
    inside
}

/// Generic sample point inside cell `i` (off every lattice line).
pub fn sample(map: &GridMap, i: usize) -> Point {
    Point::new((i % map.width) as f64 + 0.5 + 1.37e-7, (i / map.width) as f64 + 0.5 + 2.91e-7)
}

/// Free cells per area, by even-odd tests of the exported polygons.
pub fn rasterize_areas(ag: &AreaGraph, map: &GridMap) -> Vec<Vec<usize>> {
    ag.areas
        .iter()
        .map(|a| {
            let mut cells = Vec::new();
            for poly in &a.polygons {
                let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
                for p in &poly.outer {
                    x0 = x0.min(p.x);
                    y0 = y0.min(p.y);
                    x1 = x1.max(p.x);
                    y1 = y1.max(p.y);
                }
                let (c0, c1) = (x0.floor().max(0.0) as usize, (x1.ceil() as usize).min(map.width));
                let (r0, r1) = (y0.floor().max(0.0) as usize, (y1.ceil() as usize).min(map.height));
                for r in r0..r1 {
                    for c in c0..c1 {
                        let i = r * map.width + c;
                        if map.cells[i] != Occupancy::Free {
                            continue;
                        }
                        let p = sample(map, i);
                        let mut inside = in_ring(p, &poly.outer);
                        for h in &poly.holes {
                            if in_ring(p, h) {
                                inside = !inside;
                            }
                        }
                        if inside {
                            cells.push(i);
                        }
                    }
                }
            }
            cells.sort_unstable();
            cells.dedup();
            cells
        })
        .collect()
}

/// Intersection over union of two sorted cell lists.
pub fn iou(a: &[usize], b: &[usize]) -> f64 {
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn overlap(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    inter
}

/// Free cells connected to any cell of the ground-truth regions (the
/// building interior).
pub fn interior_free(s: &SynthMap) -> Vec<usize> {
    let mut seen = vec![false; s.map.cells.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for k in 0..s.regions.len() {
        for i in s.region_cells(k) {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % s.map.width) as i64, (i / s.map.width) as i64);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if s.map.is_free_i(x + dx, y + dy) {
                let j = (y + dy) as usize * s.map.width + (x + dx) as usize;
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    (0..seen.len()).filter(|&i| seen[i]).collect()
}
