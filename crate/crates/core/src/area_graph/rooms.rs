use std::collections::{BTreeMap, HashMap};

use log::{debug, warn};

use super::mosaic::Tri;
use super::{exit_param, flank_sites, Area, AreaGraph, AreaStats, FragEnd, Fragment, Passage, PassageKind, Polyline};
use crate::error::{Error, Result};
use crate::geometry::voronoi::UnionFind;
use crate::geometry::{polygons_from_triangles, AlphaShapeSet, Point, SiteIndex, EPS_SNAP};
use crate::mapio::Pose2;
use crate::topology::TopologyGraph;

struct Cut {
    segment: [Point; 2],
    waypoint: Point,
}

fn split_tris(tris: Vec<Tri>, t: f64) -> (Vec<Tri>, Vec<Tri>) {
    let (mut before, mut after) = (Vec::new(), Vec::new());
    for tri in tris {
        if !tri.own {
            if tri.anchor <= t {
                before.push(tri);
            } else {
                after.push(tri);
            }
            continue;
        }
        let len = tri.b.dist(tri.c);
        let end = tri.anchor + len;
        if end <= t + 1e-12 {
            before.push(tri);
        } else if tri.anchor >= t - 1e-12 || len == 0.0 {
            after.push(tri);
        } else {
            let x = tri.b.lerp(tri.c, (t - tri.anchor) / len);
            before.push(Tri { c: x, ..tri });
            after.push(Tri {
                b: x,
                anchor: t,
                ..tri
            });
        }
    }
    (before, after)
}

/// Anchor parameter and position of the own-fan segment point nearest to
/// `x`. Vertex merging moves edge ends, so polyline arc length and fan
/// anchors can disagree near them.
fn anchor_at(tris: &[Tri], x: Point) -> Option<(f64, Point)> {
    tris.iter()
        .filter(|t| t.own)
        .map(|t| {
            let d = t.c - t.b;
            let len2 = d.norm2();
            let s = if len2 > 0.0 { ((x - t.b).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let q = t.b.lerp(t.c, s);
            (q.dist(x), t.anchor + s * len2.sqrt(), q)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .map(|(_, a, q)| (a, q))
}

/// Cuts fragment `i` at edge parameter `t` and records the passage there.
/// `i` keeps the part before `t`; the part after is pushed and its index
/// returned. Both parts keep the room of `i`.
fn split_fragment(g: &TopologyGraph, sites: &SiteIndex, frags: &mut Vec<Fragment>, cuts: &mut Vec<Cut>, i: usize, t: f64) -> usize {
    let mut f = frags[i].clone();
    let pl = Polyline::new(&g.edge(f.edge).points);
    let (l, r) = flank_sites(g, f.edge, t, sites);
    let (ta, waypoint) = anchor_at(&f.tris, pl.at(t)).unwrap_or((t, pl.at(t)));
    let pid = cuts.len();
    cuts.push(Cut { segment: [l, r], waypoint });
    let (before, after) = split_tris(std::mem::take(&mut f.tris), ta);
    let second = Fragment {
        t0: t,
        start: FragEnd::Passage(pid),
        tris: after,
        ..f.clone()
    };
    frags[i] = Fragment {
        t1: t,
        end: FragEnd::Passage(pid),
        tris: before,
        ..f
    };
    frags.push(second);
    frags.len() - 1
}

type Key = (i64, i64);

fn key(p: Point) -> Key {
    ((p.x / EPS_SNAP).round() as i64, (p.y / EPS_SNAP).round() as i64)
}

/// Splits topology edges at room shapes, assigns room ids, merges same-room
/// fragments into areas and records passages. Rooms are visited by
/// descending area; `min_clearance` (pixels) decides which shared polygon
/// boundaries are traversable.
pub fn merge_rooms(g: &TopologyGraph, shapes: &AlphaShapeSet, min_clearance: f64, resolution: f64, origin: Pose2) -> Result<AreaGraph> {
    if g.edge_count() == 0 {
        return Err(Error::Empty("room merging"));
    }
    let site_index = SiteIndex::new(&g.sites);

    let mut frags: Vec<Fragment> = Vec::new();
    for e in g.edge_ids() {
        let ed = g.edge(e);
        let tris: Vec<Tri> = ed.poly.as_ref().map(|p| p.triangles().copied().collect()).unwrap_or_default();
        frags.push(Fragment {
            edge: e,
            t0: 0.0,
            t1: ed.length(),
            start: FragEnd::Vertex(ed.a),
            end: FragEnd::Vertex(ed.b),
            room: None,
            area: usize::MAX,
            points: Vec::new(),
            tris,
        });
    }
    let mut cuts: Vec<Cut> = Vec::new();

    for room in 1..shapes.shapes.len() {
        let count = frags.len();
        for i in 0..count {
            if frags[i].room.is_some() {
                continue;
            }
            let f = &frags[i];
            let ed = g.edge(f.edge);
            let end_in = |end: FragEnd| match end {
                FragEnd::Vertex(v) => shapes.contains(room, g.vertex(v).pos),
                FragEnd::Passage(_) => false,
            };
            let (in0, in1) = (end_in(f.start), end_in(f.end));
            if in0 && in1 {
                frags[i].room = Some(room);
                continue;
            }
            if !in0 && !in1 {
                // an edge may cross the room with both ends outside it
                let pl = Polyline::new(&ed.points);
                let (t0, t1) = (f.t0, f.t1);
                let Some(t_in) = exit_param(&pl, t0, t1, |p| !shapes.contains(room, p)) else {
                    continue;
                };
                let t_out = exit_param(&pl, t_in, t1, |p| shapes.contains(room, p)).unwrap_or(t1);
                if t_out - t_in < 1e-6 {
                    continue;
                }
                let mut j = i;
                if t_in - t0 > 1e-6 {
                    j = split_fragment(g, &site_index, &mut frags, &mut cuts, i, t_in);
                }
                if t1 - t_out > 1e-6 {
                    split_fragment(g, &site_index, &mut frags, &mut cuts, j, t_out);
                }
                frags[j].room = Some(room);
                continue;
            }
            let outer = if in0 { f.end } else { f.start };
            let unsplit = matches!(f.start, FragEnd::Vertex(_)) && matches!(f.end, FragEnd::Vertex(_));
            // an already cut fragment reaching into the room belongs to it whole
            if matches!(outer, FragEnd::Passage(_)) || (unsplit && g.is_dead_end(f.edge)) {
                frags[i].room = Some(room);
                continue;
            }
            let pl = Polyline::new(&ed.points);
            let (from, to) = if in0 { (f.t0, f.t1) } else { (f.t1, f.t0) };
            let Some(t) = exit_param(&pl, from, to, |p| shapes.contains(room, p)) else {
                frags[i].room = Some(room);
                continue;
            };
            if (t - from).abs() < 1e-6 {
                continue;
            }
            if (to - t).abs() < 1e-6 {
                frags[i].room = Some(room);
                continue;
            }
            let second = split_fragment(g, &site_index, &mut frags, &mut cuts, i, t);
            frags[if in0 { i } else { second }].room = Some(room);
        }
    }

    let after_split: f64 = frags.iter().flat_map(|f| f.tris.iter()).map(Tri::area).sum();
    for f in &mut frags {
        let ed = g.edge(f.edge);
        f.points = Polyline::new(&ed.points).slice(f.t0, f.t1);
    }

    // contacts between fragments
    let nf = frags.len();
    let mut cut_sides: Vec<Vec<usize>> = vec![Vec::new(); cuts.len()];
    let mut at_vertex: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, f) in frags.iter().enumerate() {
        for end in [f.start, f.end] {
            match end {
                FragEnd::Passage(p) => cut_sides[p].push(i),
                FragEnd::Vertex(v) => at_vertex.entry(v).or_default().push(i),
            }
        }
    }
    // shared triangle edges between different fragments
    let mut edge_owner: HashMap<(Key, Key), (usize, Point, Point)> = HashMap::new();
    let mut shared: BTreeMap<(usize, usize), Vec<(Point, Point)>> = BTreeMap::new();
    for (i, f) in frags.iter().enumerate() {
        for t in &f.tris {
            let [a, b, c] = t.points();
            for (p, q) in [(a, b), (b, c), (c, a)] {
                let (kp, kq) = (key(p), key(q));
                if kp == kq {
                    continue;
                }
                let k = if kp < kq { (kp, kq) } else { (kq, kp) };
                match edge_owner.get(&k) {
                    Some(&(j, _, _)) if j != i => {
                        shared.entry((j.min(i), j.max(i))).or_default().push((p, q));
                    }
                    Some(_) => {}
                    None => {
                        edge_owner.insert(k, (i, p, q));
                    }
                }
            }
        }
    }
    drop(edge_owner);
    let clearance = |p: Point| site_index.nearest(p).map_or(0.0, |(_, d)| d);
    let traversable: BTreeMap<(usize, usize), Vec<(Point, Point)>> = shared
        .into_iter()
        .filter_map(|(k, es)| {
            let es: Vec<_> = es
                .into_iter()
                .filter(|&(p, q)| clearance(p).max(clearance(q)) >= min_clearance)
                .collect();
            (!es.is_empty()).then_some((k, es))
        })
        .collect();

    let mut contacts: Vec<(usize, usize)> = Vec::new();
    for sides in &cut_sides {
        if sides.len() == 2 {
            contacts.push((sides[0], sides[1]));
        }
    }
    for list in at_vertex.values() {
        for x in 0..list.len() {
            for y in x + 1..list.len() {
                contacts.push((list[x], list[y]));
            }
        }
    }
    contacts.extend(traversable.keys().copied());
    absorb_pockets(&mut frags, &contacts);

    // same-room fragments in contact form one area
    let mut uf = UnionFind::new(nf);
    let same_room = |i: usize, j: usize| frags[i].room.is_some() && frags[i].room == frags[j].room;
    for sides in &cut_sides {
        if sides.len() == 2 && same_room(sides[0], sides[1]) {
            uf.union(sides[0], sides[1]);
        }
    }
    for list in at_vertex.values() {
        for x in 0..list.len() {
            for y in x + 1..list.len() {
                if same_room(list[x], list[y]) {
                    uf.union(list[x], list[y]);
                }
            }
        }
    }
    for &(i, j) in traversable.keys() {
        if same_room(i, j) {
            uf.union(i, j);
        }
    }

    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for i in 0..nf {
        let r = uf.find(i);
        let room = frags[i].room.map_or(usize::MAX, |r| r);
        groups.entry((room, r)).or_default().push(i);
    }
    let mut ordered: Vec<(Option<usize>, Vec<usize>)> = groups
        .into_iter()
        .map(|((room, _), mut members)| {
            members.sort_unstable();
            ((room != usize::MAX).then_some(room), members)
        })
        .collect();
    ordered.sort_by_key(|(room, members)| (room.is_none(), room.unwrap_or(0), members[0]));
    let mut pieces_per_room: HashMap<usize, usize> = HashMap::new();
    let mut areas = Vec::with_capacity(ordered.len());
    for (id, (room, members)) in ordered.into_iter().enumerate() {
        if let Some(r) = room {
            *pieces_per_room.entry(r).or_default() += 1;
        }
        let mut triangles = Vec::new();
        for &i in &members {
            frags[i].area = id;
            triangles.extend(frags[i].tris.iter().filter(|t| t.area() > 0.0).map(|t| t.points()));
        }
        let area_px = frags_area(&members, &frags);
        let polygons = polygons_from_triangles(&triangles);
        areas.push(Area {
            id,
            room,
            fragments: members,
            triangles,
            polygons,
            area_px,
        });
    }
    for (r, n) in &pieces_per_room {
        if *n > 1 {
            warn!("room {r} is split into {n} disconnected areas");
        }
    }

    // passages
    let mut passages: Vec<Passage> = Vec::new();
    fn push(passages: &mut Vec<Passage>, fa: usize, fb: usize, segment: [Point; 2], waypoint: Point, kind: PassageKind, frags: &[Fragment]) {
        let (aa, ab) = (frags[fa].area, frags[fb].area);
        if aa == ab {
            return;
        }
        let (areas, fragments) = if aa < ab { ([aa, ab], [fa, fb]) } else { ([ab, aa], [fb, fa]) };
        passages.push(Passage {
            id: 0,
            areas,
            fragments,
            segment,
            waypoint,
            kind,
        });
    }
    for (p, sides) in cut_sides.iter().enumerate() {
        if sides.len() != 2 {
            warn!("passage {p} touches {} fragments", sides.len());
            continue;
        }
        push(&mut passages, sides[0], sides[1], cuts[p].segment, cuts[p].waypoint, PassageKind::RoomMouth, &frags);
    }
    for (&v, list) in &at_vertex {
        let pos = g.vertex(v).pos;
        let mut done: Vec<(usize, usize)> = Vec::new();
        for x in 0..list.len() {
            for y in x + 1..list.len() {
                let (i, j) = (list[x], list[y]);
                let pair = (frags[i].area.min(frags[j].area), frags[i].area.max(frags[j].area));
                if pair.0 == pair.1 || done.contains(&pair) {
                    continue;
                }
                done.push(pair);
                let segment = traversable
                    .get(&(i.min(j), i.max(j)))
                    .and_then(|es| {
                        es.iter()
                            .filter(|(p, q)| p.dist(pos) < 1e-6 || q.dist(pos) < 1e-6)
                            .max_by(|x, y| x.0.dist(x.1).total_cmp(&y.0.dist(y.1)))
                            .map(|&(p, q)| [p, q])
                    })
                    .unwrap_or([pos, pos]);
                push(&mut passages, i, j, segment, pos, PassageKind::Junction, &frags);
            }
        }
    }
    let connected: std::collections::HashSet<[usize; 2]> = passages.iter().map(|p| p.areas).collect();
    let mut shared_pairs: BTreeMap<[usize; 2], (f64, usize, usize, Point, Point)> = BTreeMap::new();
    for (&(i, j), es) in &traversable {
        let (ai, aj) = (frags[i].area, frags[j].area);
        if ai == aj {
            continue;
        }
        let pair = [ai.min(aj), ai.max(aj)];
        if connected.contains(&pair) {
            continue;
        }
        for &(p, q) in es {
            let l = p.dist(q);
            let better = shared_pairs.get(&pair).is_none_or(|b| l > b.0 + 1e-12);
            if better {
                shared_pairs.insert(pair, (l, i, j, p, q));
            }
        }
    }
    for (_, (_, i, j, p, q)) in shared_pairs {
        let m = p.midpoint(q);
        let (ti, di) = Polyline::new(&frags[i].points).project(m);
        let (tj, dj) = Polyline::new(&frags[j].points).project(m);
        let waypoint = if di <= dj {
            Polyline::new(&frags[i].points).at(ti)
        } else {
            Polyline::new(&frags[j].points).at(tj)
        };
        push(&mut passages, i, j, [p, q], waypoint, PassageKind::SharedBoundary, &frags);
    }
    for (k, p) in passages.iter_mut().enumerate() {
        p.id = k;
    }

    let final_areas = areas.iter().map(|a| a.area_px).sum();
    debug!(
        "area graph: {} areas ({} rooms), {} passages, {} fragments",
        areas.len(),
        pieces_per_room.len(),
        passages.len(),
        frags.len()
    );
    Ok(AreaGraph::assemble(
        resolution,
        origin,
        areas,
        passages,
        frags,
        AreaStats {
            after_split,
            final_areas,
            ..Default::default()
        },
    ))
}

/// Unassigned fragment groups whose only neighbor room is a single room join
/// that room (corner and furniture pockets just outside its alpha shape).
fn absorb_pockets(frags: &mut [Fragment], contacts: &[(usize, usize)]) {
    let n = frags.len();
    let mut uf = UnionFind::new(n);
    for &(i, j) in contacts {
        if frags[i].room.is_none() && frags[j].room.is_none() {
            uf.union(i, j);
        }
    }
    let mut rooms: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(i, j) in contacts {
        for (u, v) in [(i, j), (j, i)] {
            if frags[u].room.is_none() {
                if let Some(r) = frags[v].room {
                    rooms.entry(uf.find(u)).or_default().push(r);
                }
            }
        }
    }
    let mut target: BTreeMap<usize, usize> = BTreeMap::new();
    for (root, mut rs) in rooms {
        rs.sort_unstable();
        rs.dedup();
        if rs.len() == 1 {
            target.insert(root, rs[0]);
        }
    }
    for i in 0..n {
        if frags[i].room.is_none() {
            if let Some(&r) = target.get(&uf.find(i)) {
                frags[i].room = Some(r);
            }
        }
    }
}

fn frags_area(members: &[usize], frags: &[Fragment]) -> f64 {
    members.iter().flat_map(|&i| frags[i].tris.iter()).map(Tri::area).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_own_fan_exactly() {
        let t = Tri {
            a: Point::new(0., 5.),
            b: Point::new(0., 0.),
            c: Point::new(10., 0.),
            anchor: 2.0,
            own: true,
        };
        let absorbed = Tri {
            anchor: 9.0,
            own: false,
            ..t
        };
        let (before, after) = split_tris(vec![t, absorbed], 6.0);
        assert_eq!(before.len(), 1);
        assert_eq!(after.len(), 2);
        assert_eq!(before[0].c, Point::new(4., 0.));
        assert!((before[0].area() + after[0].area() - t.area()).abs() < 1e-12);
    }
}
