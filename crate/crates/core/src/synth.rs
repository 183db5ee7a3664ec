//! Seeded synthetic floor plans with ground-truth room and corridor regions.
//!
//! Band layout: `bands` horizontal corridors, each flanked by a row of rooms
//! above and below. With more than one band, a vertical corridor on the left
//! joins them. Every room has one door onto its corridor.
//!
//! Lattice layout: a grid of rooms with no corridors; each room has a door to
//! its right and lower neighbors, so long routes cross many rooms.
//!
//! Furniture blocks hug the walls, and occupied speckles are scattered in the
//! unknown margin around the building.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapio::{GridMap, Occupancy, Pose2};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Corridors flanked by rows of rooms.
    #[default]
    Bands,
    /// A grid of rooms without corridors, each with doors to its right and
    /// lower neighbors; `rooms` is rounded up to fill the grid.
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub layout: Layout,
    pub rooms: usize,
    pub bands: usize,
    pub door_px: usize,
    pub corridor_px: usize,
    pub room_min_px: usize,
    pub room_max_px: usize,
    pub wall_px: usize,
    /// Maximum furniture blocks per room.
    pub furniture: usize,
    /// Probability of an occupied speckle per margin cell.
    pub noise_density: f64,
    pub margin_px: usize,
    /// Minimum canvas size; extra space stays unknown.
    pub canvas: Option<(usize, usize)>,
    pub resolution: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            layout: Layout::Bands,
            rooms: 4,
            bands: 1,
            door_px: 12,
            corridor_px: 24,
            room_min_px: 60,
            room_max_px: 85,
            wall_px: 2,
            furniture: 2,
            noise_density: 0.02,
            margin_px: 15,
            canvas: None,
            resolution: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Room,
    Corridor,
}

/// Half-open cell rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn contains(&self, c: usize, r: usize) -> bool {
        c >= self.x0 && c < self.x1 && r >= self.y0 && r < self.y1
    }

    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.y0..self.y1).flat_map(move |r| (self.x0..self.x1).map(move |c| (c, r)))
    }
}

/// A ground-truth region: the free cells of its rectangles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub rects: Vec<Rect>,
    /// Straight sections (corridors only).
    pub sections: Vec<Rect>,
}

#[derive(Debug, Clone)]
pub struct SynthMap {
    pub spec: SynthSpec,
    pub map: GridMap,
    pub regions: Vec<Region>,
    pub doors: Vec<Rect>,
}

impl SynthMap {
    /// Free cell indices of region `k`.
    pub fn region_cells(&self, k: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.regions[k]
            .rects
            .iter()
            .flat_map(|r| r.cells())
            .filter(|&(c, r)| self.map.is_free(c, r))
            .map(|(c, r)| self.map.index(c, r))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn count(&self, kind: RegionKind) -> usize {
        self.regions.iter().filter(|r| r.kind == kind).count()
    }

    /// Per-cell region label, `None` for walls, doors and the margin.
    pub fn labels(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.map.cells.len()];
        for k in 0..self.regions.len() {
            for i in self.region_cells(k) {
                out[i] = Some(k);
            }
        }
        out
    }
}

struct Canvas {
    w: usize,
    h: usize,
    cells: Vec<Occupancy>,
}

impl Canvas {
    fn fill(&mut self, r: &Rect, v: Occupancy) {
        for (c, row) in r.cells() {
            self.cells[row * self.w + c] = v;
        }
    }
}

fn validate(spec: &SynthSpec) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidParameter(format!("synthetic map: {m}")));
    if spec.rooms == 0 || spec.bands == 0 {
        return bad("needs at least one room and one band");
    }
    if spec.door_px == 0 || spec.corridor_px == 0 || spec.wall_px == 0 {
        return bad("door, corridor and wall widths must be positive");
    }
    if spec.room_min_px > spec.room_max_px {
        return bad("room_min_px exceeds room_max_px");
    }
    if spec.door_px + 8 > spec.room_min_px {
        return bad("door wider than room");
    }
    if spec.furniture > 0 && spec.room_min_px < spec.corridor_px + 2 * FURNITURE_REACH + 4 {
        return bad("rooms too small for furniture");
    }
    if !(0.0..=1.0).contains(&spec.noise_density) {
        return bad("noise density outside [0, 1]");
    }
    if !(spec.resolution > 0.0) {
        return Err(Error::NonPositiveResolution(spec.resolution));
    }
    Ok(())
}

const FURNITURE_MAX: usize = 8;
const FURNITURE_GAP: (usize, usize) = (3, 5);
const FURNITURE_REACH: usize = FURNITURE_MAX + FURNITURE_GAP.1;

/// Rooms, corridors and doors before rasterization.
struct Plan {
    size: (usize, usize),
    building: Rect,
    rooms: Vec<Rect>,
    /// Door indices per room.
    room_doors: Vec<Vec<usize>>,
    doors: Vec<Rect>,
    corridor: Option<Region>,
}

fn door_along(rng: &mut ChaCha8Rng, lo: usize, hi: usize, door: usize) -> usize {
    rng.gen_range(lo + 4..=hi - 4 - door)
}

fn plan_bands(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Plan {
    let (m, w, c) = (spec.margin_px, spec.wall_px, spec.corridor_px);
    let rows = 2 * spec.bands;
    let mut row_rooms = vec![spec.rooms / rows; rows];
    for r in row_rooms.iter_mut().take(spec.rooms % rows) {
        *r += 1;
    }
    let connector = spec.bands > 1;
    let left = m + w;
    let rooms_x0 = if connector { left + c + w } else { left };

    let mut widths: Vec<Vec<usize>> = row_rooms
        .iter()
        .map(|&k| (0..k).map(|_| rng.gen_range(spec.room_min_px..=spec.room_max_px)).collect())
        .collect();
    let row_len = |ws: &Vec<usize>| ws.iter().sum::<usize>() + ws.len().saturating_sub(1) * w;
    let span = widths.iter().map(row_len).max().unwrap_or(0).max(spec.room_min_px);
    for ws in widths.iter_mut() {
        if ws.is_empty() {
            continue;
        }
        let len = row_len(ws);
        *ws.last_mut().unwrap() += span - len;
    }
    let heights: Vec<usize> = (0..rows).map(|_| rng.gen_range(spec.room_min_px..=spec.room_max_px)).collect();

    let right = rooms_x0 + span;
    let mut y = m + w;
    let mut row_y = Vec::with_capacity(rows);
    let mut corridors = Vec::with_capacity(spec.bands);
    for b in 0..spec.bands {
        row_y.push(y);
        y += heights[2 * b] + w;
        corridors.push(Rect::new(if connector { left } else { rooms_x0 }, y, right, y + c));
        y += c + w;
        row_y.push(y);
        y += heights[2 * b + 1] + w;
    }
    let bottom = y;

    let mut corridor = Region {
        kind: RegionKind::Corridor,
        rects: corridors.clone(),
        sections: corridors.clone(),
    };
    if connector {
        let v = Rect::new(left, corridors[0].y0, left + c, corridors[spec.bands - 1].y1);
        corridor.rects.push(v);
        corridor.sections.push(v);
    }

    let mut rooms = Vec::new();
    let mut doors = Vec::new();
    let mut room_doors = Vec::new();
    for row in 0..rows {
        let above = row % 2 == 0;
        let mut x = rooms_x0;
        for &rw in &widths[row] {
            let room = Rect::new(x, row_y[row], x + rw, row_y[row] + heights[row]);
            let dx = door_along(rng, room.x0, room.x1, spec.door_px);
            let door = if above {
                Rect::new(dx, room.y1, dx + spec.door_px, room.y1 + w)
            } else {
                Rect::new(dx, room.y0 - w, dx + spec.door_px, room.y0)
            };
            room_doors.push(vec![doors.len()]);
            doors.push(door);
            rooms.push(room);
            x += rw + w;
        }
    }
    Plan {
        size: (right + w + m, bottom + m),
        building: Rect::new(m, m, right + w, bottom),
        rooms,
        room_doors,
        doors,
        corridor: Some(corridor),
    }
}

fn plan_lattice(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Plan {
    let (m, w) = (spec.margin_px, spec.wall_px);
    let cols = ((spec.rooms as f64 * 4.0 / 3.0).sqrt().round() as usize).max(1);
    let rows = spec.rooms.div_ceil(cols);
    let widths: Vec<usize> = (0..cols).map(|_| rng.gen_range(spec.room_min_px..=spec.room_max_px)).collect();
    let heights: Vec<usize> = (0..rows).map(|_| rng.gen_range(spec.room_min_px..=spec.room_max_px)).collect();
    let mut xs = vec![m + w];
    for &cw in &widths {
        xs.push(xs.last().unwrap() + cw + w);
    }
    let mut ys = vec![m + w];
    for &rh in &heights {
        ys.push(ys.last().unwrap() + rh + w);
    }
    let room = |c: usize, r: usize| Rect::new(xs[c], ys[r], xs[c] + widths[c], ys[r] + heights[r]);
    let mut rooms = Vec::with_capacity(rows * cols);
    let mut room_doors = vec![Vec::new(); rows * cols];
    let mut doors = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let here = room(c, r);
            rooms.push(here);
            if c + 1 < cols {
                let y = door_along(rng, here.y0, here.y1, spec.door_px);
                room_doors[r * cols + c].push(doors.len());
                room_doors[r * cols + c + 1].push(doors.len());
                doors.push(Rect::new(here.x1, y, here.x1 + w, y + spec.door_px));
            }
            if r + 1 < rows {
                let x = door_along(rng, here.x0, here.x1, spec.door_px);
                room_doors[r * cols + c].push(doors.len());
                room_doors[(r + 1) * cols + c].push(doors.len());
                doors.push(Rect::new(x, here.y1, x + spec.door_px, here.y1 + w));
            }
        }
    }
    let (right, bottom) = (*xs.last().unwrap(), *ys.last().unwrap());
    Plan {
        size: (right + m, bottom + m),
        building: Rect::new(m, m, right, bottom),
        rooms,
        room_doors,
        doors,
        corridor: None,
    }
}

/// Generates a synthetic map from `spec`.
pub fn generate(spec: &SynthSpec) -> Result<SynthMap> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let plan = match spec.layout {
        Layout::Bands => plan_bands(spec, &mut rng),
        Layout::Lattice => plan_lattice(spec, &mut rng),
    };
    let (mut cw, mut ch) = plan.size;
    if let Some((mw, mh)) = spec.canvas {
        if mw < cw || mh < ch {
            return Err(Error::InvalidParameter(format!("synthetic map: layout {cw}x{ch} exceeds canvas {mw}x{mh}")));
        }
        cw = mw;
        ch = mh;
    }

    let mut canvas = Canvas {
        w: cw,
        h: ch,
        cells: vec![Occupancy::Unknown; cw * ch],
    };
    canvas.fill(&plan.building, Occupancy::Occupied);
    for r in plan.corridor.iter().flat_map(|c| c.rects.iter()).chain(&plan.rooms).chain(&plan.doors) {
        canvas.fill(r, Occupancy::Free);
    }

    let mut furniture = Vec::new();
    for (k, room) in plan.rooms.iter().enumerate() {
        let n = if spec.furniture > 0 { rng.gen_range(0..=spec.furniture) } else { 0 };
        let doors: Vec<Rect> = plan.room_doors[k].iter().map(|&d| plan.doors[d]).collect();
        let first = furniture.len();
        for _ in 0..n {
            if let Some(f) = place_furniture(&mut rng, room, &doors) {
                // blocks closer than a corridor width could fence off a pocket
                if furniture[first..].iter().all(|g| rect_gap(&f, g) > spec.corridor_px + 2) {
                    furniture.push(f);
                }
            }
        }
    }
    for f in &furniture {
        canvas.fill(f, Occupancy::Occupied);
    }
    if spec.noise_density > 0.0 {
        for i in 0..canvas.cells.len() {
            if canvas.cells[i] == Occupancy::Unknown && rng.gen_bool(spec.noise_density) {
                canvas.cells[i] = Occupancy::Occupied;
            }
        }
    }

    let mut regions: Vec<Region> = plan
        .rooms
        .iter()
        .map(|&r| Region {
            kind: RegionKind::Room,
            rects: vec![r],
            sections: Vec::new(),
        })
        .collect();
    regions.extend(plan.corridor);
    let map = GridMap::new(canvas.w, canvas.h, spec.resolution, Pose2::default(), canvas.cells)?;
    Ok(SynthMap {
        spec: spec.clone(),
        map,
        regions,
        doors: plan.doors,
    })
}

/// Chebyshev gap between two rectangles.
fn rect_gap(a: &Rect, b: &Rect) -> usize {
    let dx = a.x0.saturating_sub(b.x1).max(b.x0.saturating_sub(a.x1));
    let dy = a.y0.saturating_sub(b.y1).max(b.y0.saturating_sub(a.y1));
    dx.max(dy)
}

/// A block a few cells off one wall, away from the doors.
fn place_furniture(rng: &mut ChaCha8Rng, room: &Rect, doors: &[Rect]) -> Option<Rect> {
    let sx = rng.gen_range(4..=FURNITURE_MAX);
    let sy = rng.gen_range(4..=FURNITURE_MAX);
    let gap = rng.gen_range(FURNITURE_GAP.0..=FURNITURE_GAP.1);
    let side = rng.gen_range(0..4);
    let along = |lo: usize, hi: usize, size: usize, rng: &mut ChaCha8Rng| {
        (hi >= lo + size + 2 * FURNITURE_REACH).then(|| rng.gen_range(lo + FURNITURE_REACH..=hi - FURNITURE_REACH - size))
    };
    let f = match side {
        0 => {
            let x = along(room.x0, room.x1, sx, rng)?;
            Rect::new(x, room.y0 + gap, x + sx, room.y0 + gap + sy)
        }
        1 => {
            let x = along(room.x0, room.x1, sx, rng)?;
            Rect::new(x, room.y1 - gap - sy, x + sx, room.y1 - gap)
        }
        2 => {
            let y = along(room.y0, room.y1, sy, rng)?;
            Rect::new(room.x0 + gap, y, room.x0 + gap + sx, y + sy)
        }
        _ => {
            let y = along(room.y0, room.y1, sy, rng)?;
            Rect::new(room.x1 - gap - sx, y, room.x1 - gap, y + sy)
        }
    };
    let clear = 2 * FURNITURE_REACH;
    let near_door = doors
        .iter()
        .any(|d| f.x1 + clear > d.x0 && f.x0 < d.x1 + clear && f.y1 + clear > d.y0 && f.y0 < d.y1 + clear);
    (!near_door).then_some(f)
}

/// The seeded test suite: `n` maps with 2–8 rooms, doors 10–16 px and
/// corridors 20–30 px.
pub fn suite(n: usize, seed: u64) -> Vec<SynthSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let corridor_px = rng.gen_range(20..=30);
            SynthSpec {
                rooms: 2 + i % 7,
                bands: 1,
                door_px: rng.gen_range(10..=16),
                corridor_px,
                room_min_px: corridor_px + 32,
                room_max_px: corridor_px + 60,
                seed: rng.gen(),
                ..SynthSpec::default()
            }
        })
        .collect()
}

/// Corridor-heavy maps: several bands joined by a vertical corridor.
pub fn corridor_suite(n: usize, seed: u64) -> Vec<SynthSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let corridor_px = rng.gen_range(20..=30);
            SynthSpec {
                rooms: 6 + 2 * (i % 4),
                bands: 2 + i % 2,
                door_px: rng.gen_range(10..=16),
                corridor_px,
                room_min_px: corridor_px + 32,
                room_max_px: corridor_px + 50,
                seed: rng.gen(),
                ..SynthSpec::default()
            }
        })
        .collect()
}

/// A 2000×1500 lattice of 140 rooms.
pub fn large_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        layout: Layout::Lattice,
        rooms: 140,
        door_px: 20,
        corridor_px: 40,
        room_min_px: 105,
        room_max_px: 135,
        furniture: 2,
        noise_density: 0.02,
        canvas: Some((2000, 1500)),
        resolution: 0.05,
        seed,
        ..SynthSpec::default()
    }
}
