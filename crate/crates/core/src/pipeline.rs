//! End-to-end segmentation: map → sites → Voronoi + alpha shapes → topology
//! graph → area graph.

use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::area_graph::{alpha_bounds, merge_rooms, AreaGraph};
use crate::error::{Error, Result};
use crate::geometry::{AlphaShapeSet, Delaunay, VoronoiGraph};
use crate::mapio::{extract_sites, GridMap};
use crate::topology::{build_topology, StageAreas, TopologyGraph, TopologyParams};

/// How α is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaChoice {
    /// Square pixels.
    Value(f64),
    /// Door and corridor widths in meters; α is the middle of their interval.
    Widths { door: f64, corridor: f64 },
}

impl AlphaChoice {
    pub fn resolve(&self, resolution: f64) -> Result<f64> {
        match *self {
            AlphaChoice::Value(a) if a > 0.0 && a.is_finite() => Ok(a),
            AlphaChoice::Value(a) => Err(Error::InvalidParameter(format!("alpha must be positive, got {a}"))),
            AlphaChoice::Widths { door, corridor } => {
                let (lo, hi) = alpha_bounds(door, corridor, resolution)?;
                Ok(0.5 * (lo + hi))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentParams {
    pub alpha: AlphaChoice,
    /// Pixel units; `None` uses the metric defaults for the map resolution.
    pub topology: Option<TopologyParams>,
}

impl SegmentParams {
    pub fn with_alpha(alpha: f64) -> Self {
        SegmentParams {
            alpha: AlphaChoice::Value(alpha),
            topology: None,
        }
    }
}

/// Stage wall-clock times in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub sites_ms: f64,
    pub voronoi_ms: f64,
    pub alpha_ms: f64,
    pub topology_ms: f64,
    pub areas_ms: f64,
    pub total_ms: f64,
}

pub struct Segmentation {
    pub alpha: f64,
    pub params: TopologyParams,
    pub voronoi: VoronoiGraph,
    pub shapes: AlphaShapeSet,
    pub topology: TopologyGraph,
    pub stages: StageAreas,
    pub areas: AreaGraph,
    pub timings: Timings,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs the whole segmentation pipeline.
pub fn segment(map: &GridMap, params: &SegmentParams) -> Result<Segmentation> {
    let start = Instant::now();
    let alpha = params.alpha.resolve(map.resolution)?;
    let tp = params.topology.unwrap_or_else(|| TopologyParams::from_resolution(map.resolution));
    let mut timings = Timings::default();

    let t = Instant::now();
    let sites = extract_sites(map).map_err(|e| e.in_stage("site extraction"))?;
    timings.sites_ms = ms(t);

    let t = Instant::now();
    let del = Delaunay::new(sites.sites).map_err(|e| e.in_stage("voronoi"))?;
    let voronoi = VoronoiGraph::from_delaunay(&del);
    timings.voronoi_ms = ms(t);

    let t = Instant::now();
    let shapes = AlphaShapeSet::compute(&del, alpha).map_err(|e| e.in_stage("alpha shapes"))?;
    timings.alpha_ms = ms(t);
    drop(del);

    let t = Instant::now();
    let (topology, stages) = build_topology(&voronoi, &shapes, &tp).map_err(|e| e.in_stage("topology graph"))?;
    timings.topology_ms = ms(t);

    let t = Instant::now();
    let mut areas = merge_rooms(&topology, &shapes, tp.min_clearance, map.resolution, map.origin).map_err(|e| e.in_stage("area graph"))?;
    areas.stats.half_polygons = stages.half_polygons;
    areas.stats.after_dead_ends = stages.after_dead_ends;
    areas.stats.after_vertex_merge = stages.after_vertex_merge;
    timings.areas_ms = ms(t);
    timings.total_ms = ms(start);

    info!(
        "alpha {alpha:.2}: {} rooms, {} areas, {} passages in {:.0} ms",
        shapes.room_count(),
        areas.areas.len(),
        areas.passages.len(),
        timings.total_ms
    );
    Ok(Segmentation {
        alpha,
        params: tp,
        voronoi,
        shapes,
        topology,
        stages,
        areas,
        timings,
    })
}
