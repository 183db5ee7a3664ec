//! JSON document for an Area Graph, in world coordinates (meters).

use serde::{Deserialize, Serialize};

use super::{AreaGraph, PassageKind};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mapio::GridMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingJson {
    pub outer: Vec<[f64; 2]>,
    pub holes: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaJson {
    pub id: usize,
    pub room_id: Option<usize>,
    pub area_m2: f64,
    pub polygons: Vec<RingJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageJson {
    pub id: usize,
    pub areas: [usize; 2],
    pub segment: [[f64; 2]; 2],
    pub waypoint: [f64; 2],
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaGraphJson {
    pub resolution: f64,
    pub origin: [f64; 3],
    pub areas: Vec<AreaJson>,
    pub passages: Vec<PassageJson>,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

impl AreaGraph {
    fn world(&self, p: Point) -> [f64; 2] {
        let frame = GridMap {
            width: 1,
            height: 1,
            resolution: self.resolution,
            origin: self.origin,
            cells: Vec::new(),
        };
        let w = frame.pixel_to_world(p);
        [round6(w.x), round6(w.y)]
    }

    pub fn to_json_doc(&self) -> AreaGraphJson {
        AreaGraphJson {
            resolution: self.resolution,
            origin: [self.origin.x, self.origin.y, self.origin.theta],
            areas: self
                .areas
                .iter()
                .map(|a| AreaJson {
                    id: a.id,
                    room_id: a.room,
                    area_m2: round6(self.area_m2(a.id)),
                    polygons: a
                        .polygons
                        .iter()
                        .map(|p| RingJson {
                            outer: p.outer.iter().map(|&q| self.world(q)).collect(),
                            holes: p.holes.iter().map(|h| h.iter().map(|&q| self.world(q)).collect()).collect(),
                        })
                        .collect(),
                })
                .collect(),
            passages: self
                .passages
                .iter()
                .map(|p| PassageJson {
                    id: p.id,
                    areas: p.areas,
                    segment: [self.world(p.segment[0]), self.world(p.segment[1])],
                    waypoint: self.world(p.waypoint),
                    kind: match p.kind {
                        PassageKind::RoomMouth => "room_mouth",
                        PassageKind::Junction => "junction",
                        PassageKind::SharedBoundary => "shared_boundary",
                    }
                    .to_string(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = self.to_json_doc();
        validate(&doc)?;
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Structural checks applied before writing.
pub fn validate(doc: &AreaGraphJson) -> Result<()> {
    for (i, a) in doc.areas.iter().enumerate() {
        if a.id != i {
            return Err(Error::Serialize(format!("area {i} has id {}", a.id)));
        }
        if !(a.area_m2 >= 0.0) {
            return Err(Error::Serialize(format!("area {i} has invalid size")));
        }
        for p in &a.polygons {
            if p.outer.len() < 3 || p.holes.iter().any(|h| h.len() < 3) {
                return Err(Error::Serialize(format!("area {i} has a degenerate ring")));
            }
        }
    }
    let n = doc.areas.len();
    for (i, p) in doc.passages.iter().enumerate() {
        if p.id != i || p.areas[0] >= p.areas[1] || p.areas[1] >= n {
            return Err(Error::Serialize(format!("passage {i} is inconsistent")));
        }
    }
    Ok(())
}
