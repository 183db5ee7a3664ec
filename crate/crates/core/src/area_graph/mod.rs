//! Area Graph: edge polygons grouped into rooms and corridor pieces, joined
//! by passages.
//!
//! Room detection follows the alpha shapes: every topology edge is cut into
//! fragments where it leaves a room shape, fragments inside one room are merged
//! into a single area, and leftovers stay individual areas. Passages are the
//! cut points (room mouths) plus every other place two areas touch through
//! traversable space.

pub mod export;
pub mod mosaic;
pub mod polyline;
mod rooms;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{orient, AlphaShapeSet, Point, Polygon, SiteIndex, TriangleLocator};
use crate::mapio::{meters_to_pixels, Pose2};
use crate::topology::TopologyGraph;

pub use mosaic::{build_half_polygons, merge_joined_polygons, PolyEdge, Tri};
pub use polyline::Polyline;
pub use rooms::merge_rooms;

pub use crate::topology::merge_deadend_polygon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeClass {
    Inside,
    Crossing,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FragEnd {
    /// A topology vertex.
    Vertex(usize),
    /// A passage point created by a room cut.
    Passage(usize),
}

/// A piece of a topology edge between two parameters.
#[derive(Debug, Clone, Serialize)]
pub struct Fragment {
    pub edge: usize,
    pub t0: f64,
    pub t1: f64,
    pub start: FragEnd,
    pub end: FragEnd,
    pub room: Option<usize>,
    pub area: usize,
    /// Polyline from the `start` end to the `end` end.
    pub points: Vec<Point>,
    #[serde(skip)]
    pub tris: Vec<Tri>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PassageKind {
    /// Where an edge leaves a room shape.
    RoomMouth,
    /// A topology vertex shared by two areas.
    Junction,
    /// Areas touching along polygon boundary only.
    SharedBoundary,
}

#[derive(Debug, Clone, Serialize)]
pub struct Passage {
    pub id: usize,
    /// Area ids, lower first.
    pub areas: [usize; 2],
    /// Fragments on either side, in the order of `areas`.
    pub fragments: [usize; 2],
    pub segment: [Point; 2],
    /// Passage vertex in pixel coordinates.
    pub waypoint: Point,
    pub kind: PassageKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct Area {
    pub id: usize,
    /// Index of the room shape (1-based into the alpha shape set).
    pub room: Option<usize>,
    pub fragments: Vec<usize>,
    #[serde(skip)]
    pub triangles: Vec<[Point; 3]>,
    pub polygons: Vec<Polygon>,
    /// Square pixels.
    pub area_px: f64,
}

/// Polygon area totals (square pixels) through the pipeline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AreaStats {
    pub half_polygons: f64,
    pub after_dead_ends: f64,
    pub after_vertex_merge: f64,
    pub after_split: f64,
    pub final_areas: f64,
}

#[derive(Debug, Clone)]
pub struct AreaGraph {
    pub resolution: f64,
    pub origin: Pose2,
    pub areas: Vec<Area>,
    pub passages: Vec<Passage>,
    pub fragments: Vec<Fragment>,
    pub stats: AreaStats,
    locator: TriangleLocator,
    tri_area: Vec<usize>,
}

impl AreaGraph {
    pub(crate) fn assemble(
        resolution: f64,
        origin: Pose2,
        areas: Vec<Area>,
        passages: Vec<Passage>,
        fragments: Vec<Fragment>,
        stats: AreaStats,
    ) -> Self {
        let mut tris = Vec::new();
        let mut tri_area = Vec::new();
        for a in &areas {
            for t in &a.triangles {
                tris.push(*t);
                tri_area.push(a.id);
            }
        }
        AreaGraph {
            resolution,
            origin,
            areas,
            passages,
            fragments,
            stats,
            locator: TriangleLocator::new(tris, 8.0),
            tri_area,
        }
    }

    pub fn area_m2(&self, a: usize) -> f64 {
        self.areas[a].area_px * self.resolution * self.resolution
    }

    pub fn total_area_px(&self) -> f64 {
        self.areas.iter().map(|a| a.area_px).sum()
    }

    /// Distinct neighbor areas, sorted.
    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .passages
            .iter()
            .filter_map(|p| {
                if p.areas[0] == a {
                    Some(p.areas[1])
                } else if p.areas[1] == a {
                    Some(p.areas[0])
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn passages_of(&self, a: usize) -> impl Iterator<Item = &Passage> + '_ {
        self.passages.iter().filter(move |p| p.areas.contains(&a))
    }

    /// Lowest id of the areas containing a pixel-frame point (boundary inclusive).
    pub fn locate_px(&self, p: Point) -> Option<usize> {
        self.locator.containing(p, 1e-9).map(|t| self.tri_area[t]).min()
    }

    pub fn room_count(&self) -> usize {
        let mut rooms: Vec<usize> = self.areas.iter().filter_map(|a| a.room).collect();
        rooms.sort_unstable();
        rooms.dedup();
        rooms.len()
    }
}

/// Classifies a whole topology edge against room shape `room`.
pub fn classify_edge_room(g: &TopologyGraph, e: usize, shapes: &AlphaShapeSet, room: usize) -> EdgeClass {
    let ed = g.edge(e);
    let ia = shapes.contains(room, g.vertex(ed.a).pos);
    let ib = shapes.contains(room, g.vertex(ed.b).pos);
    match (ia, ib) {
        (true, true) => EdgeClass::Inside,
        (false, false) => EdgeClass::Outside,
        _ if g.is_dead_end(e) => EdgeClass::Inside,
        _ => EdgeClass::Crossing,
    }
}

/// Parameter where the polyline first leaves `inside`, walking from `from`
/// toward `to` (both arc-length parameters, `from` inside).
pub(crate) fn exit_param(pl: &Polyline, from: f64, to: f64, inside: impl Fn(Point) -> bool) -> Option<f64> {
    let span = to - from;
    if span == 0.0 {
        return None;
    }
    let steps = (span.abs() / 0.25).ceil().max(1.0) as usize;
    let mut prev = from;
    for k in 1..=steps {
        let t = from + span * k as f64 / steps as f64;
        if !inside(pl.at(t)) {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if inside(pl.at(mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = t;
    }
    None
}

/// The two sites flanking the polyline at parameter `t` (left, right along
/// the polyline direction).
pub(crate) fn flank_sites(g: &TopologyGraph, e: usize, t: f64, index: &SiteIndex) -> (Point, Point) {
    let ed = g.edge(e);
    let pl = Polyline::new(&ed.points);
    let seg = pl.segment_at(t);
    if let Some((l, r)) = ed.flanks.get(seg).copied().flatten() {
        return (g.sites[l], g.sites[r]);
    }
    let (u, v) = (ed.points[seg], ed.points[(seg + 1).min(ed.points.len() - 1)]);
    let x = pl.at(t);
    let sites = index.sites();
    let left = index.nearest_where(x, |i| orient(u, v, sites[i]) > 0.0).map_or(x, |(i, _)| sites[i]);
    let right = index.nearest_where(x, |i| orient(u, v, sites[i]) < 0.0).map_or(x, |(i, _)| sites[i]);
    (left, right)
}

/// Passage line of a crossing edge: (left site, right site) and the crossing
/// waypoint nearest the inside endpoint.
pub fn passage_line(g: &TopologyGraph, e: usize, shapes: &AlphaShapeSet, room: usize) -> Result<([Point; 2], Point)> {
    if classify_edge_room(g, e, shapes, room) != EdgeClass::Crossing {
        return Err(Error::InvalidParameter(format!("edge {e} does not cross room {room}")));
    }
    let ed = g.edge(e);
    let pl = Polyline::new(&ed.points);
    let a_in = shapes.contains(room, g.vertex(ed.a).pos);
    let (from, to) = if a_in { (0.0, pl.length()) } else { (pl.length(), 0.0) };
    let t = exit_param(&pl, from, to, |p| shapes.contains(room, p))
        .ok_or_else(|| Error::Polygon(format!("edge {e} never leaves room {room}")))?;
    let (l, r) = flank_sites(g, e, t, &SiteIndex::new(&g.sites));
    Ok(([l, r], pl.at(t)))
}

/// Alpha interval in square pixels from door and corridor widths in pixels.
pub fn alpha_bounds_px(door_px: f64, corridor_px: f64) -> Result<(f64, f64)> {
    if !(door_px > 0.0) || door_px >= corridor_px {
        return Err(Error::EmptyAlphaInterval { door_px, corridor_px });
    }
    Ok(((door_px / 2.0).powi(2), (corridor_px / 2.0).powi(2)))
}

/// Alpha interval from metric door and corridor widths.
pub fn alpha_bounds(door_width: f64, corridor_width: f64, resolution: f64) -> Result<(f64, f64)> {
    let d = meters_to_pixels(door_width, resolution)?;
    let c = meters_to_pixels(corridor_width, resolution)?;
    alpha_bounds_px(d, c)
}
