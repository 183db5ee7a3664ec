//! Occupancy grid maps: loading ROS map_server style PGM/PNG + YAML pairs,
//! cell classification and obstacle site extraction.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub const DEFAULT_OCCUPIED_THRESH: f64 = 0.65;
pub const DEFAULT_FREE_THRESH: f64 = 0.196;

/// Gray values written by [`save_map`].
pub const PIXEL_FREE: u8 = 254;
pub const PIXEL_OCCUPIED: u8 = 0;
pub const PIXEL_UNKNOWN: u8 = 205;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Occupancy {
    Free,
    Occupied,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    /// Meters per cell.
    pub resolution: f64,
    /// World pose of the corner of cell (0, 0).
    pub origin: Pose2,
    /// Row-major, row 0 first.
    pub cells: Vec<Occupancy>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Pose2, cells: Vec<Occupancy>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMap(format!("empty map {width}x{height}")));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::NonPositiveResolution(resolution));
        }
        if cells.len() != width * height {
            return Err(Error::InvalidMap(format!(
                "{} cells for a {width}x{height} map",
                cells.len()
            )));
        }
        Ok(GridMap {
            width,
            height,
            resolution,
            origin,
            cells,
        })
    }

    /// Map filled with one state.
    pub fn filled(width: usize, height: usize, resolution: f64, state: Occupancy) -> Result<Self> {
        GridMap::new(width, height, resolution, Pose2::default(), vec![state; width * height])
    }

    /// Parses an ASCII sketch: `#` occupied, `.` free, `?` unknown. Row 0 is
    /// the first line.
    pub fn from_ascii(rows: &[&str], resolution: f64) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut cells = Vec::with_capacity(width * height);
        for (r, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::InvalidMap(format!("row {r} has a different width")));
            }
            for ch in row.chars() {
                cells.push(match ch {
                    '#' => Occupancy::Occupied,
                    '.' => Occupancy::Free,
                    '?' => Occupancy::Unknown,
                    other => return Err(Error::InvalidMap(format!("unexpected character {other:?}"))),
                });
            }
        }
        GridMap::new(width, height, resolution, Pose2::default(), cells)
    }

    #[inline]
    pub fn index(&self, c: usize, r: usize) -> usize {
        r * self.width + c
    }

    #[inline]
    pub fn get(&self, c: usize, r: usize) -> Occupancy {
        self.cells[r * self.width + c]
    }

    pub fn set(&mut self, c: usize, r: usize, v: Occupancy) {
        let i = self.index(c, r);
        self.cells[i] = v;
    }

    #[inline]
    pub fn is_free(&self, c: usize, r: usize) -> bool {
        self.get(c, r) == Occupancy::Free
    }

    /// Free check with signed coordinates; anything off-map is not free.
    #[inline]
    pub fn is_free_i(&self, c: i64, r: i64) -> bool {
        c >= 0 && r >= 0 && (c as usize) < self.width && (r as usize) < self.height && self.is_free(c as usize, r as usize)
    }

    pub fn count(&self, state: Occupancy) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    /// Cell whose square contains the pixel-frame point.
    pub fn cell_at(&self, p: Point) -> Option<(usize, usize)> {
        if p.x < 0.0 || p.y < 0.0 {
            return None;
        }
        let (c, r) = (p.x.floor() as usize, p.y.floor() as usize);
        (c < self.width && r < self.height).then_some((c, r))
    }

    pub fn cell_center(c: usize, r: usize) -> Point {
        Point::new(c as f64 + 0.5, r as f64 + 0.5)
    }

    /// Pixel coordinates to world meters.
    pub fn pixel_to_world(&self, p: Point) -> Point {
        let (s, c) = self.origin.theta.sin_cos();
        let (x, y) = (p.x * self.resolution, p.y * self.resolution);
        Point::new(self.origin.x + c * x - s * y, self.origin.y + s * x + c * y)
    }

    /// World meters to pixel coordinates.
    pub fn world_to_pixel(&self, w: Point) -> Point {
        let (s, c) = self.origin.theta.sin_cos();
        let (dx, dy) = (w.x - self.origin.x, w.y - self.origin.y);
        Point::new((c * dx + s * dy) / self.resolution, (-s * dx + c * dy) / self.resolution)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Flag {
    Bool(bool),
    Int(i64),
}

/// ROS map_server metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub image: String,
    pub resolution: f64,
    pub origin: [f64; 3],
    #[serde(default = "default_occupied")]
    pub occupied_thresh: f64,
    #[serde(default = "default_free")]
    pub free_thresh: f64,
    #[serde(default, with = "negate_flag")]
    pub negate: bool,
    /// Optional expected dimensions, checked against the image.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
}

fn default_occupied() -> f64 {
    DEFAULT_OCCUPIED_THRESH
}

fn default_free() -> f64 {
    DEFAULT_FREE_THRESH
}

mod negate_flag {
    use super::Flag;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(*v as i64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        Ok(match Flag::deserialize(d)? {
            Flag::Bool(b) => b,
            Flag::Int(i) => i != 0,
        })
    }
}

impl MapMetadata {
    pub fn from_yaml_str(s: &str) -> Result<Self> {
        let m: MapMetadata = serde_yaml::from_str(s).map_err(|e| Error::Metadata(e.to_string()))?;
        if !(m.resolution > 0.0) {
            return Err(Error::NonPositiveResolution(m.resolution));
        }
        if !(0.0..=1.0).contains(&m.free_thresh) || !(0.0..=1.0).contains(&m.occupied_thresh) || m.free_thresh > m.occupied_thresh {
            return Err(Error::Metadata(format!(
                "thresholds must satisfy 0 <= free ({}) <= occupied ({}) <= 1",
                m.free_thresh, m.occupied_thresh
            )));
        }
        Ok(m)
    }

    /// Classifies an 8-bit gray value.
    pub fn classify(&self, v: u8) -> Occupancy {
        let p = if self.negate {
            v as f64 / 255.0
        } else {
            (255.0 - v as f64) / 255.0
        };
        if p > self.occupied_thresh {
            Occupancy::Occupied
        } else if p < self.free_thresh {
            Occupancy::Free
        } else {
            Occupancy::Unknown
        }
    }
}

/// Loads a map from an image and a metadata file; the `image` field of the
/// metadata is ignored in favor of `image_path`.
pub fn load_grid_map(image_path: &Path, meta_path: &Path) -> Result<GridMap> {
    let text = fs::read_to_string(meta_path).map_err(|e| Error::io(meta_path, e))?;
    let meta = MapMetadata::from_yaml_str(&text)?;
    let bytes = fs::read(image_path).map_err(|e| Error::io(image_path, e))?;
    let img = image::load_from_memory(&bytes).map_err(|e| Error::Image {
        path: image_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let gray = img.to_luma8();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    if meta.width.is_some_and(|mw| mw != w) || meta.height.is_some_and(|mh| mh != h) {
        return Err(Error::InvalidMap(format!(
            "image is {w}x{h} but metadata declares {}x{}",
            meta.width.map_or("?".into(), |v| v.to_string()),
            meta.height.map_or("?".into(), |v| v.to_string())
        )));
    }
    let cells = gray.pixels().map(|p| meta.classify(p.0[0])).collect();
    GridMap::new(
        w,
        h,
        meta.resolution,
        Pose2 {
            x: meta.origin[0],
            y: meta.origin[1],
            theta: meta.origin[2],
        },
        cells,
    )
}

/// Loads a map from its metadata file, resolving `image` relative to it.
pub fn load_map_yaml(meta_path: &Path) -> Result<GridMap> {
    let text = fs::read_to_string(meta_path).map_err(|e| Error::io(meta_path, e))?;
    let meta = MapMetadata::from_yaml_str(&text)?;
    let image = resolve_image(meta_path, &meta.image);
    load_grid_map(&image, meta_path)
}

fn resolve_image(meta_path: &Path, image: &str) -> PathBuf {
    let p = Path::new(image);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        meta_path.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// Writes the map as binary PGM plus metadata YAML.
pub fn save_map(map: &GridMap, pgm_path: &Path, yaml_path: &Path) -> Result<()> {
    let mut data = format!("P5\n{} {}\n255\n", map.width, map.height).into_bytes();
    data.extend(map.cells.iter().map(|c| match c {
        Occupancy::Free => PIXEL_FREE,
        Occupancy::Occupied => PIXEL_OCCUPIED,
        Occupancy::Unknown => PIXEL_UNKNOWN,
    }));
    fs::write(pgm_path, data).map_err(|e| Error::io(pgm_path, e))?;
    let image = match (pgm_path.parent(), yaml_path.parent()) {
        (Some(a), Some(b)) if a == b => pgm_path.file_name().unwrap().to_string_lossy().into_owned(),
        _ => pgm_path.to_string_lossy().into_owned(),
    };
    let meta = MapMetadata {
        image,
        resolution: map.resolution,
        origin: [map.origin.x, map.origin.y, map.origin.theta],
        occupied_thresh: DEFAULT_OCCUPIED_THRESH,
        free_thresh: DEFAULT_FREE_THRESH,
        negate: false,
        width: Some(map.width),
        height: Some(map.height),
    };
    let text = serde_yaml::to_string(&meta).map_err(|e| Error::Serialize(e.to_string()))?;
    fs::write(yaml_path, text).map_err(|e| Error::io(yaml_path, e))
}

/// Obstacle points: one per occupied cell, at the cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet {
    pub sites: Vec<Point>,
}

impl SiteSet {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Collects occupied cell centers without validating them.
pub fn occupied_centers(map: &GridMap) -> Vec<Point> {
    let mut sites = Vec::new();
    for r in 0..map.height {
        for c in 0..map.width {
            if map.get(c, r) == Occupancy::Occupied {
                sites.push(GridMap::cell_center(c, r));
            }
        }
    }
    sites
}

/// Site set for triangulation. Fewer than three or collinear sites are
/// rejected later, by the triangulation.
pub fn extract_sites(map: &GridMap) -> Result<SiteSet> {
    let sites = occupied_centers(map);
    if sites.is_empty() {
        return Err(Error::Degenerate("the map has no occupied cells".into()));
    }
    Ok(SiteSet { sites })
}

/// Converts a metric width to pixels, without rounding.
pub fn meters_to_pixels(width_m: f64, resolution: f64) -> Result<f64> {
    if !(resolution > 0.0) {
        return Err(Error::NonPositiveResolution(resolution));
    }
    if width_m < 0.0 {
        return Err(Error::InvalidParameter(format!("negative width {width_m}")));
    }
    Ok(width_m / resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Delaunay;

    fn meta() -> MapMetadata {
        MapMetadata::from_yaml_str("image: m.pgm\nresolution: 0.05\norigin: [0, 0, 0]\nnegate: 0\n").unwrap()
    }

    #[test]
    fn classification_thresholds() {
        let m = meta();
        assert_eq!(m.classify(255), Occupancy::Free);
        assert_eq!(m.classify(PIXEL_FREE), Occupancy::Free);
        assert_eq!(m.classify(0), Occupancy::Occupied);
        assert_eq!(m.classify(PIXEL_UNKNOWN), Occupancy::Unknown);
        let mut n = m.clone();
        n.negate = true;
        assert_eq!(n.classify(255), Occupancy::Occupied);
    }

    #[test]
    fn negate_accepts_bool_or_int() {
        let m = MapMetadata::from_yaml_str("image: a.png\nresolution: 1\norigin: [1, 2, 0]\nnegate: true\n").unwrap();
        assert!(m.negate);
        assert_eq!(m.occupied_thresh, 0.65);
        assert_eq!(m.free_thresh, 0.196);
    }

    #[test]
    fn rejects_bad_resolution() {
        assert!(matches!(
            MapMetadata::from_yaml_str("image: a\nresolution: 0\norigin: [0,0,0]\n"),
            Err(Error::NonPositiveResolution(_))
        ));
    }

    #[test]
    fn border_sites() {
        let mut rows = vec!["##########".to_string()];
        for _ in 0..8 {
            rows.push("#........#".into());
        }
        rows.push("##########".into());
        let rows: Vec<&str> = rows.iter().map(|s| s.as_str()).collect();
        let map = GridMap::from_ascii(&rows, 0.1).unwrap();
        assert_eq!(extract_sites(&map).unwrap().len(), 36);
    }

    #[test]
    fn single_site_is_degenerate() {
        let mut map = GridMap::filled(9, 9, 0.1, Occupancy::Free).unwrap();
        map.set(4, 4, Occupancy::Occupied);
        let sites = extract_sites(&map).unwrap();
        assert_eq!(sites.sites, vec![Point::new(4.5, 4.5)]);
        assert!(matches!(Delaunay::new(sites.sites), Err(Error::Degenerate(_))));
        let empty = GridMap::filled(4, 4, 0.1, Occupancy::Free).unwrap();
        assert!(extract_sites(&empty).is_err());
    }

    #[test]
    fn world_pixel_round_trip() {
        let mut map = GridMap::filled(4, 4, 0.05, Occupancy::Free).unwrap();
        map.origin = Pose2 {
            x: -3.0,
            y: 2.0,
            theta: 0.3,
        };
        let p = Point::new(12.25, 7.5);
        let q = map.world_to_pixel(map.pixel_to_world(p));
        assert!(p.dist(q) < 1e-9);
    }

    #[test]
    fn meters_to_pixels_values() {
        assert!((meters_to_pixels(1.64, 0.05).unwrap() - 32.8).abs() < 1e-12);
        assert!((meters_to_pixels(2.42, 0.05).unwrap() - 48.4).abs() < 1e-12);
        assert_eq!(meters_to_pixels(0.0, 0.1).unwrap(), 0.0);
        assert!(meters_to_pixels(1.0, 0.0).is_err());
    }
}
