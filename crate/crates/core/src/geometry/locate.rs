//! Uniform bucket grids for point location and nearest-site queries.

use super::{point_in_triangle, Point};

/// Buckets triangles by bounding box so that `p` can be located in a handful
/// of exact tests.
#[derive(Debug, Clone)]
pub struct TriangleLocator {
    min: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
    tris: Vec<[Point; 3]>,
}

impl TriangleLocator {
    pub fn new(tris: Vec<[Point; 3]>, cell: f64) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for t in &tris {
            for p in t {
                min.x = min.x.min(p.x);
                min.y = min.y.min(p.y);
                max.x = max.x.max(p.x);
                max.y = max.y.max(p.y);
            }
        }
        if tris.is_empty() {
            min = Point::default();
            max = Point::new(1.0, 1.0);
        }
        let cell = cell.max(1e-6);
        let nx = (((max.x - min.x) / cell).floor() as usize + 1).max(1);
        let ny = (((max.y - min.y) / cell).floor() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (i, t) in tris.iter().enumerate() {
            let lo_x = t.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
            let hi_x = t.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
            let lo_y = t.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
            let hi_y = t.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
            let (x0, y0) = Self::bucket_of(min, cell, nx, ny, Point::new(lo_x, lo_y));
            let (x1, y1) = Self::bucket_of(min, cell, nx, ny, Point::new(hi_x, hi_y));
            for by in y0..=y1 {
                for bx in x0..=x1 {
                    buckets[by * nx + bx].push(i as u32);
                }
            }
        }
        TriangleLocator {
            min,
            cell,
            nx,
            ny,
            buckets,
            tris,
        }
    }

    fn bucket_of(min: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
        let bx = ((p.x - min.x) / cell).floor().clamp(0.0, (nx - 1) as f64) as usize;
        let by = ((p.y - min.y) / cell).floor().clamp(0.0, (ny - 1) as f64) as usize;
        (bx, by)
    }

    /// All triangles containing `p` (boundary inclusive within `eps`).
    pub fn containing(&self, p: Point, eps: f64) -> impl Iterator<Item = usize> + '_ {
        let (bx, by) = Self::bucket_of(self.min, self.cell, self.nx, self.ny, p);
        let outside = p.x < self.min.x - eps
            || p.y < self.min.y - eps
            || p.x > self.min.x + self.cell * self.nx as f64 + eps
            || p.y > self.min.y + self.cell * self.ny as f64 + eps;
        let bucket: &[u32] = if outside {
            &[]
        } else {
            &self.buckets[by * self.nx + bx]
        };
        bucket.iter().map(|&i| i as usize).filter(move |&i| {
            let [a, b, c] = self.tris[i];
            point_in_triangle(p, a, b, c, eps)
        })
    }

    pub fn triangle(&self, i: usize) -> [Point; 3] {
        self.tris[i]
    }

    pub fn len(&self) -> usize {
        self.tris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }
}

/// Nearest-site queries over a static point set.
#[derive(Debug, Clone)]
pub struct SiteIndex {
    min: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
    sites: Vec<Point>,
}

impl SiteIndex {
    pub fn new(sites: &[Point]) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in sites {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        if sites.is_empty() {
            min = Point::default();
            max = Point::new(1.0, 1.0);
        }
        let cell = 4.0;
        let nx = ((max.x - min.x) / cell).floor() as usize + 1;
        let ny = ((max.y - min.y) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for (i, p) in sites.iter().enumerate() {
            let bx = ((p.x - min.x) / cell) as usize;
            let by = ((p.y - min.y) / cell) as usize;
            buckets[by * nx + bx].push(i as u32);
        }
        SiteIndex {
            min,
            cell,
            nx,
            ny,
            buckets,
            sites: sites.to_vec(),
        }
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    /// Nearest site and its distance, searching rings of buckets outward.
    pub fn nearest(&self, p: Point) -> Option<(usize, f64)> {
        self.nearest_where(p, |_| true)
    }

    /// Nearest site satisfying `keep`.
    pub fn nearest_where(&self, p: Point, keep: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
        if self.sites.is_empty() {
            return None;
        }
        let fx = (p.x - self.min.x) / self.cell;
        let fy = (p.y - self.min.y) / self.cell;
        let cx = fx.floor() as i64;
        let cy = fy.floor() as i64;
        let mut best: Option<(usize, f64)> = None;
        let max_ring = self.nx.max(self.ny) as i64 + (fx.abs() + fy.abs()) as i64 + 2;
        for ring in 0..=max_ring {
            // distance from p to the nearest cell of this ring bounds what it can hold
            if let Some((_, d)) = best {
                let reach = (ring - 1).max(0) as f64 * self.cell;
                if reach > d {
                    break;
                }
            }
            for by in (cy - ring)..=(cy + ring) {
                if by < 0 || by >= self.ny as i64 {
                    continue;
                }
                let on_edge_row = by == cy - ring || by == cy + ring;
                let step = if on_edge_row { 1 } else { (2 * ring).max(1) };
                let mut bx = cx - ring;
                while bx <= cx + ring {
                    if bx >= 0 && bx < self.nx as i64 {
                        for &i in &self.buckets[by as usize * self.nx + bx as usize] {
                            let i = i as usize;
                            let d = self.sites[i].dist(p);
                            if best.is_none_or(|(_, b)| d < b) && keep(i) {
                                best = Some((i, d));
                            }
                        }
                    }
                    bx += step;
                }
            }
        }
        best
    }

    /// Sites within `radius` of `p`.
    pub fn within(&self, p: Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let x0 = (((p.x - radius - self.min.x) / self.cell).floor().max(0.0)) as usize;
        let y0 = (((p.y - radius - self.min.y) / self.cell).floor().max(0.0)) as usize;
        let x1 = ((p.x + radius - self.min.x) / self.cell).floor();
        let y1 = ((p.y + radius - self.min.y) / self.cell).floor();
        if x1 < 0.0 || y1 < 0.0 {
            return out;
        }
        let x1 = (x1 as usize).min(self.nx - 1);
        let y1 = (y1 as usize).min(self.ny - 1);
        for by in y0..=y1 {
            for bx in x0..=x1 {
                for &i in &self.buckets[by * self.nx + bx] {
                    if self.sites[i as usize].dist(p) <= radius {
                        out.push(i as usize);
                    }
                }
            }
        }
        out
    }
}
