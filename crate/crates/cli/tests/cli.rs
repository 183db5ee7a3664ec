use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use areagraph::area_graph::export::{validate, AreaGraphJson};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_areagraph"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn areagraph")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Three rooms on one corridor, 0.1 m cells.
fn synth_map(dir: &Path, seed: &str) -> PathBuf {
    let prefix = dir.join("m");
    ok(&["synth", "--rooms", "3", "--seed", seed, "--out", s(&prefix)]);
    dir.join("m.yaml")
}

const WIDTHS: [&str; 4] = ["--door-width", "1.3", "--corridor-width", "2.2"];

/// Two walled rooms with no door between them.
fn split_map(dir: &Path) -> PathBuf {
    let (w, h) = (70usize, 36usize);
    let mut px = vec![254u8; w * h];
    for r in 0..h {
        for c in 0..w {
            if r < 2 || r >= h - 2 || c < 2 || c >= w - 2 || (34..36).contains(&c) {
                px[r * w + c] = 0;
            }
        }
    }
    let mut data = format!("P5\n{w} {h}\n255\n").into_bytes();
    data.extend(px);
    std::fs::write(dir.join("split.pgm"), data).unwrap();
    std::fs::write(
        dir.join("split.yaml"),
        "image: split.pgm\nresolution: 0.1\norigin: [0.0, 0.0, 0.0]\noccupied_thresh: 0.65\nfree_thresh: 0.196\nnegate: 0\n",
    )
    .unwrap();
    dir.join("split.yaml")
}

#[test]
fn synth_is_deterministic_and_writes_truth() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    synth_map(a.path(), "7");
    synth_map(b.path(), "7");
    for f in ["m.pgm", "m.yaml", "m.truth.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let truth: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("m.truth.json")).unwrap()).unwrap();
    assert_eq!(truth["regions"].as_array().unwrap().len(), 4);
}

#[test]
fn synth_rejects_infeasible_door() {
    let d = TempDir::new().unwrap();
    let out = run(&["synth", "--door-px", "80", "--out", s(&d.path().join("m"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("door"));
}

#[test]
fn segment_outputs_are_byte_identical() {
    let d = TempDir::new().unwrap();
    let map = synth_map(d.path(), "2");
    let (o1, o2) = (d.path().join("o1"), d.path().join("o2"));
    for o in [&o1, &o2] {
        let mut args = vec!["segment", "--map", s(&map), "--out", s(o)];
        args.extend(WIDTHS);
        ok(&args);
    }
    for f in ["areas.json", "stats.json", "segmentation.svg", "segmentation.png"] {
        assert_eq!(std::fs::read(o1.join(f)).unwrap(), std::fs::read(o2.join(f)).unwrap(), "{f}");
    }
    let doc: AreaGraphJson = serde_json::from_slice(&std::fs::read(o1.join("areas.json")).unwrap()).unwrap();
    validate(&doc).unwrap();
    let stats: serde_json::Value = serde_json::from_slice(&std::fs::read(o1.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["area_count"].as_u64().unwrap() as usize, doc.areas.len());
    assert_eq!(stats["passage_count"].as_u64().unwrap() as usize, doc.passages.len());
    let png = std::fs::read(o1.join("segmentation.png")).unwrap();
    assert_eq!(&png[1..4], b"PNG");
}

#[test]
fn segment_needs_exactly_one_alpha_source() {
    let d = TempDir::new().unwrap();
    let map = synth_map(d.path(), "2");
    let out = run(&["segment", "--map", s(&map), "--out", s(&d.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["segment", "--map", s(&map), "--alpha", "-3", "--out", s(&d.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn config_file_supplies_parameters() {
    let d = TempDir::new().unwrap();
    synth_map(d.path(), "4");
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "map = \"m.yaml\"\ndoor_width = 1.3\ncorridor_width = 2.2\niterations = 2\n").unwrap();
    let out = ok(&["--config", s(&cfg), "segment", "--out", s(&d.path().join("o"))]);
    assert!(out.contains("areas"), "{out}");
    std::fs::write(&cfg, "map = \"m.yaml\"\nalpha = 80.0\nbogus = 1\n").unwrap();
    let out = run(&["--config", s(&cfg), "segment", "--out", s(&d.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
}

fn lengths(stdout: &str) -> Vec<(String, f64, usize)> {
    stdout
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[0].to_string(), f[2].parse().unwrap(), f[f.len() - 1].parse().unwrap())
        })
        .collect()
}

#[test]
fn plan_same_room_methods_agree() {
    let d = TempDir::new().unwrap();
    let map = synth_map(d.path(), "5");
    let svg = d.path().join("plan.svg");
    // both points in the first room (top left)
    let mut args = vec!["plan", "--map", s(&map), "--start", "2.3,2.3", "--goal", "4.8,4.1", "--out", s(&svg)];
    args.extend(WIDTHS);
    let rows = lengths(&ok(&args));
    assert_eq!(rows.len(), 3);
    let (grid, astar, voro) = (rows[0].1, rows[1].1, rows[2].1);
    assert!((astar - grid).abs() <= 0.1 + 1e-9, "{rows:?}");
    assert!(voro + 1e-9 >= grid, "{rows:?}");
    assert!(rows.iter().all(|r| r.2 == 0), "{rows:?}");
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn plan_without_path_exits_2() {
    let d = TempDir::new().unwrap();
    let map = split_map(d.path());
    for method in ["grid", "astar-passage", "voronoi-passage"] {
        let out = run(&["plan", "--map", s(&map), "--alpha", "40", "--method", method, "--start", "1,1.8", "--goal", "5,1.8"]);
        assert_eq!(out.status.code(), Some(2), "{method}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("no path"));
    }
}

#[test]
fn plan_rejects_bad_input() {
    let d = TempDir::new().unwrap();
    let map = synth_map(d.path(), "5");
    let out = run(&["plan", "--map", s(&map), "--alpha", "80", "--start", "2.3", "--goal", "4,4"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["plan", "--map", s(&d.path().join("missing.yaml")), "--alpha", "80", "--start", "1,1", "--goal", "2,2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_writes_table() {
    let d = TempDir::new().unwrap();
    let map = synth_map(d.path(), "6");
    let csv = d.path().join("t.csv");
    let mut args = vec!["bench", "--map", s(&map), "--count", "7", "--seed", "3", "--threads", "2", "--out", s(&csv)];
    args.extend(WIDTHS);
    ok(&args);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "id,grid_m,astarp_m,vorop_m,grid_ms,astarp_ms,vorop_ms,rooms_crossed");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 7);
    for r in &rows {
        assert!(r[1] <= r[2] + 1e-9 && r[1] <= r[3] + 1e-9, "{r:?}");
    }
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("t.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["queries"], 7);
    assert_eq!(summary["failed_queries"], 0);

    // same seed: same distances
    let csv2 = d.path().join("t2.csv");
    let mut args = vec!["bench", "--map", s(&map), "--count", "7", "--seed", "3", "--out", s(&csv2)];
    args.extend(WIDTHS);
    ok(&args);
    let dist = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| l.split(',').take(4).collect::<Vec<_>>().join(","))
            .collect()
    };
    assert_eq!(dist(&csv), dist(&csv2));
}

#[test]
fn bench_reads_query_file() {
    let d = TempDir::new().unwrap();
    let map = synth_map(d.path(), "6");
    let q = d.path().join("q.csv");
    std::fs::write(&q, "id,start_x,start_y,goal_x,goal_y\n").unwrap();
    let csv = d.path().join("empty.csv");
    let mut args = vec!["bench", "--map", s(&map), "--queries", s(&q), "--out", s(&csv)];
    args.extend(WIDTHS);
    ok(&args);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1);

    // a query from inside a wall is recorded without lengths
    std::fs::write(&q, "id,start_x,start_y,goal_x,goal_y\nwall,0.0,0.0,2.3,2.3\nroom,2.3,2.3,4.8,4.1\n").unwrap();
    let csv = d.path().join("two.csv");
    let mut args = vec!["bench", "--map", s(&map), "--queries", s(&q), "--out", s(&csv)];
    args.extend(WIDTHS);
    ok(&args);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("wall,,,,"), "{}", lines[1]);
    assert!(lines[2].starts_with("room,"));
}

#[test]
fn render_layers() {
    let d = TempDir::new().unwrap();
    let map = synth_map(d.path(), "8");
    let (svg, png) = (d.path().join("r.svg"), d.path().join("r.png"));
    ok(&["render", "--map", s(&map), "--alpha", "80", "--layers", "voronoi,alpha,topology,areas,passages", "--out", s(&svg), "--png", s(&png)]);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("area-0") && text.contains("<circle"));
    assert_eq!(&std::fs::read(&png).unwrap()[1..4], b"PNG");
}
