use areagraph::grid_planner::{bfs_oracle, bfs_oracle_cost, grid_astar, is_valid_path, path_cost, Cell};
use areagraph::mapio::{GridMap, Occupancy};
use proptest::prelude::*;

/// Relaxes every cell until nothing changes; slow but obviously correct.
fn relaxation_oracle(map: &GridMap, start: Cell, goal: Cell) -> f64 {
    let (w, h) = (map.width as i64, map.height as i64);
    let free = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && map.is_free(x as usize, y as usize);
    if !free(start.0 as i64, start.1 as i64) || !free(goal.0 as i64, goal.1 as i64) {
        return f64::INFINITY;
    }
    let mut d = vec![f64::INFINITY; map.cells.len()];
    d[start.1 * map.width + start.0] = 0.0;
    let mut changed = true;
    while changed {
        changed = false;
        for y in 0..h {
            for x in 0..w {
                let here = d[(y * w + x) as usize];
                if !free(x, y) || here.is_infinite() {
                    continue;
                }
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let (nx, ny) = (x + dx, y + dy);
                    if !free(nx, ny) || (dx != 0 && dy != 0 && !(free(x + dx, y) && free(x, y + dy))) {
                        continue;
                    }
                    let step = if dx != 0 && dy != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                    let k = (ny * w + nx) as usize;
                    if here + step < d[k] - 1e-12 {
                        d[k] = here + step;
                        changed = true;
                    }
                }
            }
        }
    }
    d[goal.1 * map.width + goal.0] * map.resolution
}

fn arb_map() -> impl Strategy<Value = (GridMap, Cell, Cell)> {
    (2usize..14, 2usize..14).prop_flat_map(|(w, h)| {
        let cells = prop::collection::vec(prop_oneof![6 => Just(Occupancy::Free), 3 => Just(Occupancy::Occupied), 1 => Just(Occupancy::Unknown)], w * h);
        (cells, 0..w, 0..h, 0..w, 0..h).prop_map(move |(cells, sc, sr, gc, gr)| {
            let mut map = GridMap::filled(w, h, 0.1, Occupancy::Free).unwrap();
            map.cells = cells;
            map.set(sc, sr, Occupancy::Free);
            map.set(gc, gr, Occupancy::Free);
            (map, (sc, sr), (gc, gr))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn astar_matches_the_oracles((map, s, g) in arb_map()) {
        let want = relaxation_oracle(&map, s, g);
        match grid_astar(&map, s, g, None) {
            None => {
                prop_assert!(want.is_infinite());
                prop_assert_eq!(bfs_oracle_cost(&map, s, g), None);
            }
            Some(p) => {
                prop_assert!((p.length - want).abs() <= 1e-6 * want.max(1.0), "{} vs {}", p.length, want);
                prop_assert_eq!(Some(p.cost), bfs_oracle_cost(&map, s, g));
                prop_assert!(is_valid_path(&map, &p.cells));
                prop_assert_eq!(path_cost(&p.cells), p.cost);
                prop_assert_eq!(p.cells.first().copied(), Some(s));
                prop_assert_eq!(p.cells.last().copied(), Some(g));
            }
        }
    }

    #[test]
    fn masked_search_stays_in_the_mask((map, s, g) in arb_map(), keep in prop::collection::vec(any::<bool>(), 196)) {
        let mut mask: Vec<bool> = (0..map.cells.len()).map(|i| keep[i % keep.len()]).collect();
        mask[s.1 * map.width + s.0] = true;
        mask[g.1 * map.width + g.0] = true;
        let mut masked = map.clone();
        for (i, &m) in mask.iter().enumerate() {
            if !m {
                masked.cells[i] = Occupancy::Occupied;
            }
        }
        let want = relaxation_oracle(&masked, s, g);
        match grid_astar(&map, s, g, Some(&mask)) {
            None => prop_assert!(want.is_infinite()),
            Some(p) => {
                prop_assert!((p.length - want).abs() <= 1e-6 * want.max(1.0));
                prop_assert!(p.cells.iter().all(|&(c, r)| mask[r * map.width + c]));
            }
        }
    }
}

#[test]
fn empty_square_diagonal() {
    let map = GridMap::filled(10, 10, 0.05, Occupancy::Free).unwrap();
    let p = grid_astar(&map, (0, 0), (9, 9), None).unwrap();
    assert!((p.length - 9.0 * 2f64.sqrt() * 0.05).abs() < 1e-6);
    assert_eq!(p.cells.len(), 10);
    assert!((bfs_oracle(&map, (0, 0), (9, 9)) - p.length).abs() < 1e-12);
}

#[test]
fn start_equals_goal() {
    let map = GridMap::filled(4, 4, 0.05, Occupancy::Free).unwrap();
    let p = grid_astar(&map, (2, 1), (2, 1), None).unwrap();
    assert_eq!(p.length, 0.0);
    assert_eq!(p.cells, vec![(2, 1)]);
}

#[test]
fn walled_off_goal() {
    let map = GridMap::from_ascii(&["..#..", "..#..", "..#.."], 0.05).unwrap();
    assert!(grid_astar(&map, (0, 0), (4, 2), None).is_none());
    assert_eq!(bfs_oracle(&map, (0, 0), (4, 2)), f64::INFINITY);
}

#[test]
fn no_corner_cutting() {
    // the only diagonal gap is pinched by two wall cells
    let map = GridMap::from_ascii(&[".#", "#."], 1.0).unwrap();
    assert!(grid_astar(&map, (0, 0), (1, 1), None).is_none());
    let map = GridMap::from_ascii(&["..", "#."], 1.0).unwrap();
    let p = grid_astar(&map, (0, 0), (1, 1), None).unwrap();
    assert_eq!(p.length, 2.0);
}

#[test]
fn occupied_or_unknown_endpoints() {
    let map = GridMap::from_ascii(&[".#?"], 1.0).unwrap();
    assert!(grid_astar(&map, (0, 0), (1, 0), None).is_none());
    assert!(grid_astar(&map, (2, 0), (0, 0), None).is_none());
}
