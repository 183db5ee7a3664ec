//! SVG rendering of maps, segmentations and paths, in the pixel frame.
//! PNG output rasterizes the SVG.

use std::fmt::Write;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use areagraph::area_graph::AreaGraph;
use areagraph::geometry::{AlphaShapeSet, Point, VoronoiGraph};
use areagraph::mapio::{GridMap, Occupancy};
use areagraph::topology::TopologyGraph;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    Voronoi,
    Alpha,
    Topology,
    Areas,
    Passages,
}

pub struct Svg {
    body: String,
    width: usize,
    height: usize,
}

fn f(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn ring_d(out: &mut String, ring: &[Point]) {
    for (i, p) in ring.iter().enumerate() {
        let _ = write!(out, "{}{} {} ", if i == 0 { 'M' } else { 'L' }, f(p.x), f(p.y));
    }
    out.push_str("Z ");
}

fn polyline(points: &[Point]) -> String {
    points.iter().map(|p| format!("{},{}", f(p.x), f(p.y))).collect::<Vec<_>>().join(" ")
}

/// Stable fill color: rooms by room id, other areas by area id.
pub fn area_color(room: Option<usize>, area: usize) -> String {
    let key = match room {
        Some(r) => (r as u64) << 1,
        None => ((area as u64) << 1) | 1,
    };
    let mut z = key.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    let hue = z % 360;
    let (sat, light) = if room.is_some() { (65, 62) } else { (25, 80) };
    format!("hsl({hue},{sat}%,{light}%)")
}

impl Svg {
    /// Map raster: unknown gray, free white, occupied black.
    pub fn new(map: &GridMap) -> Self {
        let mut body = String::new();
        let _ = writeln!(body, r##"<rect width="{}" height="{}" fill="#9e9e9e"/>"##, map.width, map.height);
        for (state, color) in [(Occupancy::Free, "#ffffff"), (Occupancy::Occupied, "#000000")] {
            let _ = write!(body, r#"<path fill="{color}" d=""#);
            for r in 0..map.height {
                let mut c = 0;
                while c < map.width {
                    if map.get(c, r) != state {
                        c += 1;
                        continue;
                    }
                    let start = c;
                    while c < map.width && map.get(c, r) == state {
                        c += 1;
                    }
                    let _ = write!(body, "M{start} {r}h{}v1h-{}Z", c - start, c - start);
                }
            }
            body.push_str("\"/>\n");
        }
        Svg {
            body,
            width: map.width,
            height: map.height,
        }
    }

    pub fn voronoi(&mut self, vg: &VoronoiGraph) {
        let mut d = String::new();
        for (h, he) in vg.halfedges.iter().enumerate() {
            if h < he.twin {
                let (a, b) = (vg.waypoints[he.origin], vg.waypoints[vg.halfedges[he.twin].origin]);
                let _ = write!(d, "M{} {} L{} {} ", f(a.x), f(a.y), f(b.x), f(b.y));
            }
        }
        let _ = writeln!(self.body, r##"<path d="{}" fill="none" stroke="#1e88e5" stroke-width="0.3"/>"##, d.trim_end());
    }

    pub fn alpha_shapes(&mut self, shapes: &AlphaShapeSet) {
        for (i, s) in shapes.shapes.iter().enumerate() {
            let mut d = String::new();
            for ring in &s.rings {
                ring_d(&mut d, ring);
            }
            let color = if i == 0 { "#ff9800" } else { "#8e24aa" };
            let _ = writeln!(
                self.body,
                r#"<path d="{}" fill="{color}" fill-opacity="0.15" fill-rule="evenodd" stroke="{color}" stroke-width="0.6"/>"#,
                d.trim_end()
            );
        }
    }

    pub fn topology(&mut self, g: &TopologyGraph) {
        for e in g.edges.iter().flatten() {
            let _ = writeln!(
                self.body,
                r##"<polyline points="{}" fill="none" stroke="#43a047" stroke-width="0.8"/>"##,
                polyline(&e.points)
            );
        }
        for v in g.vertices.iter().flatten() {
            let _ = writeln!(self.body, r##"<circle cx="{}" cy="{}" r="1.2" fill="#2e7d32"/>"##, f(v.pos.x), f(v.pos.y));
        }
    }

    pub fn areas(&mut self, ag: &AreaGraph) {
        for a in &ag.areas {
            let mut d = String::new();
            for poly in &a.polygons {
                ring_d(&mut d, &poly.outer);
                for h in &poly.holes {
                    ring_d(&mut d, h);
                }
            }
            let _ = writeln!(
                self.body,
                r##"<path id="area-{}" d="{}" fill="{}" fill-opacity="0.85" fill-rule="evenodd" stroke="#424242" stroke-width="0.4"/>"##,
                a.id,
                d.trim_end(),
                area_color(a.room, a.id)
            );
        }
    }

    pub fn passages(&mut self, ag: &AreaGraph) {
        for p in &ag.passages {
            let [a, b] = p.segment;
            let _ = writeln!(
                self.body,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#e53935" stroke-width="1"/><circle cx="{}" cy="{}" r="2" fill="#e53935"/>"##,
                f(a.x),
                f(a.y),
                f(b.x),
                f(b.y),
                f(p.waypoint.x),
                f(p.waypoint.y)
            );
        }
    }

    /// Path overlay with start and goal markers; `points` in pixels.
    pub fn path(&mut self, points: &[Point], color: &str) {
        if points.is_empty() {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-linejoin="round"/>"#,
            polyline(points)
        );
        for p in [points[0], points[points.len() - 1]] {
            let _ = writeln!(self.body, r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#, f(p.x), f(p.y));
        }
    }

    pub fn finish(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Rasterizes an SVG document to PNG bytes at its nominal size.
pub fn svg_to_png(svg: &str) -> Result<Vec<u8>> {
    let tree = resvg::usvg::Tree::from_str(svg, &resvg::usvg::Options::default()).context("parsing SVG")?;
    let size = tree.size().to_int_size();
    let mut pixmap = resvg::tiny_skia::Pixmap::new(size.width(), size.height()).ok_or_else(|| anyhow!("empty SVG canvas"))?;
    resvg::render(&tree, resvg::tiny_skia::Transform::default(), &mut pixmap.as_mut());
    pixmap.encode_png().context("encoding PNG")
}

pub fn write_svg_and_png(svg: &str, svg_path: &Path, png_path: Option<&Path>) -> Result<()> {
    std::fs::write(svg_path, svg).with_context(|| format!("writing {}", svg_path.display()))?;
    if let Some(p) = png_path {
        std::fs::write(p, svg_to_png(svg)?).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
