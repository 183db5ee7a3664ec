mod common;

use areagraph::area_graph::{alpha_bounds, PassageKind};
use areagraph::geometry::{AlphaShapeSet, Delaunay, Point};
use areagraph::mapio::{extract_sites, GridMap};
use areagraph::passage_graph::locate_area;
use areagraph::pipeline::{segment, SegmentParams};
use areagraph::synth::{generate, RegionKind, SynthSpec};
use areagraph::topology::{filter_outside_boundary, remove_low_clearance_edges, TopologyGraph};
use areagraph::Error;
use common::*;

fn three_rooms(noise: f64) -> SynthSpec {
    SynthSpec {
        rooms: 3,
        furniture: 0,
        noise_density: noise,
        seed: 11,
        ..SynthSpec::default()
    }
}

/// A straight corridor `w` cells wide and `l` long, closed at both ends.
fn corridor(w: usize, l: usize) -> GridMap {
    let rows: Vec<String> = (0..w + 2)
        .map(|r| (0..l + 2).map(|c| if r == 0 || r == w + 1 || c == 0 || c == l + 1 { '#' } else { '.' }).collect())
        .collect();
    let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
    GridMap::from_ascii(&refs, 0.05).unwrap()
}

#[test]
fn alpha_bound_errors() {
    assert!(matches!(alpha_bounds(2.0, 2.0, 0.1), Err(Error::EmptyAlphaInterval { .. })));
    assert!(alpha_bounds(2.5, 2.0, 0.1).is_err());
    assert!(alpha_bounds(1.0, 2.0, 0.0).is_err());
}

#[test]
fn three_rooms_one_corridor_gives_four_areas() {
    let spec = three_rooms(0.02);
    let (s, seg) = run(&spec, mid_alpha(&spec));
    let ag = &seg.areas;
    assert_eq!(ag.areas.len(), 4);
    assert_eq!(ag.passages.len(), 3);
    assert_eq!(ag.areas.len(), expected_area_count(&s, seg.alpha));
    // every door hosts one passage, close to its center
    for door in &s.doors {
        let center = Point::new((door.x0 + door.x1) as f64 / 2.0, (door.y0 + door.y1) as f64 / 2.0);
        let p = ag
            .passages
            .iter()
            .min_by(|a, b| a.waypoint.dist(center).total_cmp(&b.waypoint.dist(center)))
            .unwrap();
        assert!(p.waypoint.dist(center) <= 2.0, "waypoint {:?} vs door center {center:?}", p.waypoint);
        assert_eq!(p.kind, PassageKind::RoomMouth);
        // the passage line spans the opening between the jamb sites
        let len = p.segment[0].dist(p.segment[1]);
        let gap = (door.width().max(door.height()) + 1) as f64;
        assert!((len - gap).abs() <= 2.0, "passage {len} vs gap {gap}");
    }
}

#[test]
fn larger_alpha_never_adds_areas_inside_the_bounds() {
    let spec = three_rooms(0.02);
    let (lo, hi) = site_gap_bounds(&spec);
    let mut last = usize::MAX;
    for k in 1..8 {
        let alpha = lo + (hi - lo) * k as f64 / 8.0;
        let (_, seg) = run(&spec, alpha);
        let n = seg.areas.areas.len();
        assert!(n <= last, "alpha {alpha}: {n} areas after {last}");
        last = n;
    }
}

#[test]
fn corridor_falls_apart_above_the_bounds() {
    let spec = three_rooms(0.02);
    let (lo, hi) = site_gap_bounds(&spec);
    let (_, inside) = run(&spec, 0.5 * (lo + hi));
    assert_eq!(inside.shapes.room_count(), 4);
    for alpha in [hi * 1.2, hi * 2.0, hi * 4.0] {
        let (s, seg) = run(&spec, alpha);
        // the three rooms remain; whatever else opens up is a pocket where
        // the two facing doors widen the corridor
        let c = s.regions.iter().find(|r| r.kind == RegionKind::Corridor).unwrap().rects[0];
        let corridor = (c.width() * c.height()) as f64;
        let (big, pockets): (Vec<f64>, Vec<f64>) =
            seg.shapes.shapes[1..].iter().map(|sh| sh.area).partition(|&a| a > corridor / 4.0);
        assert_eq!(big.len(), 3, "alpha {alpha}");
        let pockets: f64 = pockets.iter().sum();
        assert!(pockets < 0.15 * corridor, "alpha {alpha}: pockets {pockets}");
        // corridor edges outside any room stay per-edge areas
        assert!(seg.areas.areas.len() > inside.areas.areas.len());
    }
}

#[test]
fn segmentation_is_deterministic() {
    let spec = three_rooms(0.05);
    let s = generate(&spec).unwrap();
    let params = SegmentParams::with_alpha(mid_alpha(&spec));
    let a = segment(&s.map, &params).unwrap().areas.to_json().unwrap();
    let b = segment(&s.map, &params).unwrap().areas.to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn exterior_noise_is_filtered_and_interior_kept() {
    let count_inside = |noise: f64| {
        let s = generate(&three_rooms(noise)).unwrap();
        let sites = extract_sites(&s.map).unwrap();
        let del = Delaunay::new(sites.sites).unwrap();
        let shapes = AlphaShapeSet::compute(&del, mid_alpha(&s.spec)).unwrap();
        let vg = areagraph::geometry::VoronoiGraph::from_delaunay(&del);
        let mut g = TopologyGraph::from_voronoi(&vg);
        filter_outside_boundary(&mut g, &shapes).unwrap();
        let m = s.spec.margin_px as f64;
        let (w, h) = (s.map.width as f64 - m, s.map.height as f64 - m);
        let building = |p: Point| p.x > m && p.y > m && p.x < w && p.y < h;
        for e in g.edge_ids() {
            let ed = g.edge(e);
            assert!(shapes.in_boundary(g.vertex(ed.a).pos) && shapes.in_boundary(g.vertex(ed.b).pos));
        }
        g.edge_ids().filter(|&e| g.edge(e).points.iter().all(|&p| building(p))).count()
    };
    assert_eq!(count_inside(0.0), count_inside(0.05));
}

#[test]
fn low_clearance_removal_keeps_the_spine() {
    let (w, l) = (20, 120);
    let map = corridor(w, l);
    let sites = extract_sites(&map).unwrap();
    let vg = areagraph::geometry::compute_voronoi(&sites.sites).unwrap();
    let full = TopologyGraph::from_voronoi(&vg);

    let mut same = full.clone();
    remove_low_clearance_edges(&mut same, 0.0);
    assert_eq!(same.edge_count(), full.edge_count());

    let mut g = full.clone();
    let half = (w + 1) as f64 / 2.0;
    remove_low_clearance_edges(&mut g, half / 2.0);
    assert!(g.edge_count() < full.edge_count());
    for e in g.edge_ids() {
        assert!(g.edge(e).min_clearance() >= half / 2.0);
    }
    // the spine along the corridor axis survives end to end (less the
    // corner wedges)
    let mid = (w + 2) as f64 / 2.0;
    let spine: f64 = g
        .edge_ids()
        .map(|e| g.edge(e))
        .filter(|ed| ed.points.iter().all(|p| (p.y - mid).abs() < 1e-6))
        .map(|ed| ed.length())
        .sum();
    assert!(spine >= (l - w) as f64 - 2.0, "spine {spine}");

    let diag = ((map.width * map.width + map.height * map.height) as f64).sqrt();
    let mut none = full.clone();
    remove_low_clearance_edges(&mut none, diag);
    assert_eq!(none.edge_count(), 0);
}

#[test]
fn corridor_half_polygons_cover_the_corridor() {
    let (w, l) = (20, 120);
    let map = corridor(w, l);
    let seg = segment(&map, &SegmentParams::with_alpha(5000.0)).unwrap();
    let free = (w * l) as f64;
    let got = seg.stages.half_polygons;
    assert!((got - free).abs() / free <= 0.10, "half polygons {got} vs corridor {free}");
    assert_eq!(seg.areas.areas.len(), 1);
}

#[test]
fn locating_points() {
    let spec = three_rooms(0.0);
    let (s, seg) = run(&spec, mid_alpha(&spec));
    let ag = &seg.areas;
    let map = &s.map;
    for (k, region) in s.regions.iter().enumerate() {
        if region.kind != RegionKind::Room {
            continue;
        }
        let r = region.rects[0];
        let c = Point::new((r.x0 + r.x1) as f64 / 2.0, (r.y0 + r.y1) as f64 / 2.0);
        let a = locate_area(ag, map, map.pixel_to_world(c)).unwrap();
        let cells = s.region_cells(k);
        let areas = rasterize_areas(ag, map);
        assert!(overlap(&cells, &areas[a]) * 2 > cells.len());
    }
    // a wall cell belongs to no area
    let d = s.doors[0];
    let wall = Point::new(d.x0 as f64 - 2.5, (d.y0 + d.y1) as f64 / 2.0);
    assert!(matches!(locate_area(ag, map, map.pixel_to_world(wall)), Err(Error::NoArea(..))));
    // a point on a passage line goes to the lower area id
    for p in &ag.passages {
        assert_eq!(ag.locate_px(p.waypoint), Some(p.areas[0]));
        for f in [0.25, 0.75] {
            let q = p.waypoint.lerp(p.segment[0], f);
            assert_eq!(ag.locate_px(q), Some(p.areas[0]), "{q:?} on passage {}", p.id);
        }
    }
}
