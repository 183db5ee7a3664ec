//! `areagraph`: segment occupancy maps into Area Graphs, plan over passage
//! graphs, benchmark planners, generate synthetic maps and render results.

mod config;
mod render;

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use areagraph::area_graph::export;
use areagraph::geometry::Point;
use areagraph::mapio::{load_map_yaml, save_map, GridMap, Occupancy};
use areagraph::passage_graph::{build_passage_graph, grid_plan, Method, PassageGraph, PlanResult, Variant};
use areagraph::pipeline::{segment, Segmentation};
use areagraph::synth::{generate, large_spec, Layout};
use clap::{Args, Parser, Subcommand};
use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use config::{PipelineArgs, RunConfig};
use render::{write_svg_and_png, Layer, Svg};

#[derive(Parser)]
#[command(name = "areagraph", version, about = "Area Graph segmentation and passage-graph planning for occupancy grid maps")]
struct Cli {
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a map; writes areas.json, stats.json, segmentation.svg and segmentation.png.
    Segment {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan one query with one or more methods.
    Plan {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Comma-separated: grid, astar-passage, voronoi-passage.
        #[arg(long, value_delimiter = ',', value_parser = parse_method)]
        method: Vec<Method>,
        /// Start in world meters, `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        start: Point,
        /// Goal in world meters, `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        goal: Point,
        /// Optional SVG overlay of the paths.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a batch of queries with all three methods; writes a CSV table.
    Bench(BenchArgs),
    /// Generate a synthetic map: <out>.pgm, <out>.yaml and <out>.truth.json.
    Synth(SynthArgs),
    /// Render map layers to SVG (and optionally PNG).
    Render {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Comma-separated layers drawn over the map.
        #[arg(long, value_delimiter = ',', default_value = "areas,passages")]
        layers: Vec<Layer>,
        /// SVG output path.
        #[arg(long)]
        out: PathBuf,
        /// Also rasterize to this PNG.
        #[arg(long)]
        png: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// CSV with columns id,start_x,start_y,goal_x,goal_y (world meters).
    /// Without it, random queries between free cells are generated.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Number of generated queries.
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Seed for generated queries.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the queries.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output CSV; a construction-time summary is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Start from the 2000×1500 large-map preset.
    #[arg(long)]
    large: bool,
    /// Rooms along corridor bands, or a grid of rooms without corridors.
    #[arg(long, value_enum)]
    layout: Option<LayoutArg>,
    /// Number of rooms.
    #[arg(long)]
    rooms: Option<usize>,
    /// Corridor bands (bands layout).
    #[arg(long)]
    bands: Option<usize>,
    /// Door width in cells.
    #[arg(long)]
    door_px: Option<usize>,
    /// Corridor width in cells.
    #[arg(long)]
    corridor_px: Option<usize>,
    /// Smallest room side in cells.
    #[arg(long)]
    room_min_px: Option<usize>,
    /// Largest room side in cells.
    #[arg(long)]
    room_max_px: Option<usize>,
    /// Maximum furniture blocks per room.
    #[arg(long)]
    furniture: Option<usize>,
    /// Speckle density in the unknown margin.
    #[arg(long)]
    noise: Option<f64>,
    /// Meters per cell.
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path prefix.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum LayoutArg {
    Bands,
    Lattice,
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "grid" => Ok(Method::Grid),
        "astar-passage" => Ok(Method::AstarPassage),
        "voronoi-passage" => Ok(Method::VoronoiPassage),
        _ => Err(format!("unknown method `{s}` (grid, astar-passage, voronoi-passage)")),
    }
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok(Point::new(parse(x)?, parse(y)?))
}

/// Marker for a query without a path.
struct NoPath;

fn main() -> ExitCode {
    // usage errors exit with 1; 2 is reserved for "no path"
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(NoPath)) => {
            eprintln!("no path");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<Result<(), NoPath>> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Segment { pipeline, out } => cmd_segment(&cfg.merged(&pipeline), &out).map(Ok),
        Command::Plan {
            pipeline,
            method,
            start,
            goal,
            out,
        } => {
            let cfg = cfg.merged(&pipeline);
            let methods = if method.is_empty() { cfg.methods()? } else { method };
            cmd_plan(&cfg, &methods, start, goal, out.as_deref())
        }
        Command::Bench(args) => cmd_bench(&cfg.merged(&args.pipeline), &args).map(Ok),
        Command::Synth(args) => cmd_synth(&cfg, &args).map(Ok),
        Command::Render {
            pipeline,
            layers,
            out,
            png,
        } => cmd_render(&cfg.merged(&pipeline), &layers, &out, png.as_deref()).map(Ok),
    }
}

fn load(cfg: &RunConfig) -> Result<GridMap> {
    let path = cfg.map.as_ref().context("no map given (--map or `map` in the config)")?;
    load_map_yaml(path).with_context(|| format!("loading map {}", path.display()))
}

fn run_segmentation(cfg: &RunConfig, map: &GridMap) -> Result<Segmentation> {
    let params = cfg.segment_params(map.resolution)?;
    segment(map, &params).context("segmentation failed")
}

fn write_file(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct AreaStat {
    id: usize,
    room_id: Option<usize>,
    area_m2: f64,
}

#[derive(Serialize)]
struct SegmentStats {
    alpha: f64,
    area_count: usize,
    room_count: usize,
    passage_count: usize,
    total_area_m2: f64,
    areas: Vec<AreaStat>,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn cmd_segment(cfg: &RunConfig, out: &Path) -> Result<()> {
    let map = load(cfg)?;
    let seg = run_segmentation(cfg, &map)?;
    let ag = &seg.areas;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let doc = ag.to_json_doc();
    export::validate(&doc).context("area graph JSON failed validation")?;
    write_file(&out.join("areas.json"), serde_json::to_string_pretty(&doc)?)?;

    let stats = SegmentStats {
        alpha: round6(seg.alpha),
        area_count: ag.areas.len(),
        room_count: ag.room_count(),
        passage_count: ag.passages.len(),
        total_area_m2: round6(ag.areas.iter().map(|a| ag.area_m2(a.id)).sum()),
        areas: ag
            .areas
            .iter()
            .map(|a| AreaStat {
                id: a.id,
                room_id: a.room,
                area_m2: round6(ag.area_m2(a.id)),
            })
            .collect(),
    };
    write_file(&out.join("stats.json"), serde_json::to_string_pretty(&stats)?)?;

    let mut svg = Svg::new(&map);
    svg.areas(ag);
    svg.passages(ag);
    write_svg_and_png(&svg.finish(), &out.join("segmentation.svg"), Some(&out.join("segmentation.png")))?;

    println!(
        "alpha {:.2}: {} areas ({} rooms), {} passages, {:.2} m2 in {:.0} ms",
        seg.alpha, stats.area_count, stats.room_count, stats.passage_count, stats.total_area_m2, seg.timings.total_ms
    );
    for a in &stats.areas {
        println!("area {:>3}  room {:>4}  {:>9.2} m2", a.id, a.room_id.map_or("-".into(), |r| r.to_string()), a.area_m2);
    }
    Ok(())
}

fn path_color(m: Method) -> &'static str {
    match m {
        Method::Grid => "#212121",
        Method::AstarPassage => "#1565c0",
        Method::VoronoiPassage => "#c62828",
    }
}

fn cmd_plan(cfg: &RunConfig, methods: &[Method], start: Point, goal: Point, out: Option<&Path>) -> Result<Result<(), NoPath>> {
    let map = load(cfg)?;
    // grid-only runs still segment when α is configured, to count rooms
    let seg = if methods.iter().any(|m| m.variant().is_some()) || cfg.segment_params(map.resolution).is_ok() {
        Some(run_segmentation(cfg, &map)?)
    } else {
        None
    };
    let mut svg = out.map(|_| Svg::new(&map));
    if let (Some(svg), Some(seg)) = (svg.as_mut(), seg.as_ref()) {
        svg.areas(&seg.areas);
    }
    let mut missing = false;
    for &m in methods {
        let result = match (m.variant(), seg.as_ref()) {
            (Some(v), Some(seg)) => build_passage_graph(&seg.areas, v, &map)?.plan(start, goal),
            _ => grid_plan(&map, start, goal),
        }
        .with_context(|| format!("{} planning failed", m.name()))?;
        match result {
            Some(mut r) => {
                if let (Method::Grid, Some(seg)) = (m, seg.as_ref()) {
                    // grid paths carry no areas; read them off the path cells
                    let mut areas: Vec<usize> = r
                        .path
                        .iter()
                        .filter_map(|&p| seg.areas.locate_px(map.world_to_pixel(p)))
                        .collect();
                    areas.dedup();
                    r.rooms_crossed = areas.len().saturating_sub(1);
                    r.areas = areas;
                }
                println!(
                    "{:<16} length {:>9.3} m  time {:>9.3} ms  rooms crossed {}",
                    m.name(),
                    r.length,
                    r.time_ms,
                    r.rooms_crossed
                );
                if let Some(svg) = svg.as_mut() {
                    let px: Vec<Point> = r.path.iter().map(|&p| map.world_to_pixel(p)).collect();
                    svg.path(&px, path_color(m));
                }
            }
            None => {
                println!("{:<16} no path", m.name());
                missing = true;
            }
        }
    }
    if let (Some(svg), Some(path)) = (svg, out) {
        write_file(path, svg.finish())?;
    }
    Ok(if missing { Err(NoPath) } else { Ok(()) })
}

#[derive(Debug, Clone, Deserialize)]
struct Query {
    id: String,
    start_x: f64,
    start_y: f64,
    goal_x: f64,
    goal_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BenchRow {
    id: String,
    grid_m: Option<f64>,
    astarp_m: Option<f64>,
    vorop_m: Option<f64>,
    grid_ms: Option<f64>,
    astarp_ms: Option<f64>,
    vorop_ms: Option<f64>,
    rooms_crossed: Option<usize>,
}

const BENCH_COLUMNS: [&str; 8] = ["id", "grid_m", "astarp_m", "vorop_m", "grid_ms", "astarp_ms", "vorop_ms", "rooms_crossed"];

#[derive(Debug, Serialize)]
struct BenchSummary {
    map_width: usize,
    map_height: usize,
    areas: usize,
    passages: usize,
    segmentation_ms: f64,
    astar_passage_build_ms: f64,
    voronoi_passage_build_ms: f64,
    queries: usize,
    failed_queries: usize,
}

/// Free cells of the largest 4-connected free component.
fn largest_free_component(map: &GridMap) -> Vec<usize> {
    let mut comp = vec![usize::MAX; map.cells.len()];
    let mut best: Vec<usize> = Vec::new();
    for s in 0..map.cells.len() {
        if map.cells[s] != Occupancy::Free || comp[s] != usize::MAX {
            continue;
        }
        comp[s] = s;
        let mut cells = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % map.width) as i64, (i / map.width) as i64);
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                if map.is_free_i(x + dx, y + dy) {
                    let j = (y + dy) as usize * map.width + (x + dx) as usize;
                    if comp[j] == usize::MAX {
                        comp[j] = s;
                        cells.push(j);
                        queue.push_back(j);
                    }
                }
            }
        }
        if cells.len() > best.len() {
            best = cells;
        }
    }
    best.sort_unstable();
    best
}

fn generated_queries(map: &GridMap, count: usize, seed: u64) -> Result<Vec<Query>> {
    let free = largest_free_component(map);
    if free.is_empty() && count > 0 {
        bail!("the map has no free cells to place queries");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let world = |i: usize| map.pixel_to_world(GridMap::cell_center(i % map.width, i / map.width));
    Ok((0..count)
        .map(|k| {
            let (a, b) = (world(free[rng.gen_range(0..free.len())]), world(free[rng.gen_range(0..free.len())]));
            Query {
                id: k.to_string(),
                start_x: round6(a.x),
                start_y: round6(a.y),
                goal_x: round6(b.x),
                goal_y: round6(b.y),
            }
        })
        .collect())
}

fn read_queries(path: &Path) -> Result<Vec<Query>> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    rd.deserialize()
        .enumerate()
        .map(|(k, r)| r.with_context(|| format!("{} row {}", path.display(), k + 1)))
        .collect()
}

fn bench_row(q: &Query, map: &GridMap, pa: &PassageGraph, pv: &PassageGraph) -> BenchRow {
    let (s, g) = (Point::new(q.start_x, q.start_y), Point::new(q.goal_x, q.goal_y));
    let report = |m: &str, r: areagraph::Result<Option<PlanResult>>| match r {
        Ok(Some(r)) => Some(r),
        Ok(None) => {
            warn!("query {}: {m} found no path", q.id);
            None
        }
        Err(e) => {
            warn!("query {}: {m} failed: {e}", q.id);
            None
        }
    };
    let grid = report("grid", grid_plan(map, s, g));
    let astar = report("astar-passage", pa.plan(s, g));
    let voro = report("voronoi-passage", pv.plan(s, g));
    let len = |r: &Option<PlanResult>| r.as_ref().map(|r| round6(r.length));
    let ms = |r: &Option<PlanResult>| r.as_ref().map(|r| round6(r.time_ms));
    BenchRow {
        id: q.id.clone(),
        grid_m: len(&grid),
        astarp_m: len(&astar),
        vorop_m: len(&voro),
        grid_ms: ms(&grid),
        astarp_ms: ms(&astar),
        vorop_ms: ms(&voro),
        rooms_crossed: astar.as_ref().or(voro.as_ref()).map(|r| r.rooms_crossed),
    }
}

fn validate_rows(rows: &[BenchRow]) -> Result<()> {
    for r in rows {
        for v in [r.grid_m, r.astarp_m, r.vorop_m, r.grid_ms, r.astarp_ms, r.vorop_ms].into_iter().flatten() {
            if !v.is_finite() || v < 0.0 {
                bail!("query {}: invalid value {v}", r.id);
            }
        }
        if r.id.is_empty() {
            bail!("empty query id");
        }
    }
    Ok(())
}

fn bench_csv(rows: &[BenchRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(BENCH_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner()?)
}

fn cmd_bench(cfg: &RunConfig, args: &BenchArgs) -> Result<()> {
    let map = load(cfg)?;
    let queries = match &args.queries {
        Some(p) => read_queries(p)?,
        None => generated_queries(&map, args.count, args.seed.or(cfg.seed).unwrap_or(0))?,
    };
    let seg = run_segmentation(cfg, &map)?;
    let pa = build_passage_graph(&seg.areas, Variant::GridAStar, &map)?;
    let pv = build_passage_graph(&seg.areas, Variant::TopoVoronoi, &map)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads.max(1)).build()?;
    let rows: Vec<BenchRow> = pool.install(|| queries.par_iter().map(|q| bench_row(q, &map, &pa, &pv)).collect());
    validate_rows(&rows)?;
    let failed = rows
        .iter()
        .filter(|r| r.grid_m.is_none() || r.astarp_m.is_none() || r.vorop_m.is_none())
        .count();
    write_file(&args.out, bench_csv(&rows)?)?;

    let summary = BenchSummary {
        map_width: map.width,
        map_height: map.height,
        areas: seg.areas.areas.len(),
        passages: seg.areas.passages.len(),
        segmentation_ms: round6(seg.timings.total_ms),
        astar_passage_build_ms: round6(pa.build_ms),
        voronoi_passage_build_ms: round6(pv.build_ms),
        queries: rows.len(),
        failed_queries: failed,
    };
    let text = serde_json::to_string_pretty(&summary)?;
    write_file(&args.out.with_extension("summary.json"), &text)?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct GroundTruth<'a> {
    width: usize,
    height: usize,
    resolution: f64,
    spec: &'a areagraph::synth::SynthSpec,
    regions: &'a [areagraph::synth::Region],
    doors: &'a [areagraph::synth::Rect],
}

fn cmd_synth(cfg: &RunConfig, args: &SynthArgs) -> Result<()> {
    let mut spec = if args.large {
        large_spec(0)
    } else {
        cfg.synth.clone().unwrap_or_default()
    };
    if let Some(l) = args.layout {
        spec.layout = match l {
            LayoutArg::Bands => Layout::Bands,
            LayoutArg::Lattice => Layout::Lattice,
        };
    }
    macro_rules! set {
        ($($field:ident <- $arg:ident),*) => {$(
            if let Some(v) = args.$arg {
                spec.$field = v;
            }
        )*};
    }
    set!(rooms <- rooms, bands <- bands, door_px <- door_px, corridor_px <- corridor_px, room_min_px <- room_min_px,
        room_max_px <- room_max_px, furniture <- furniture, noise_density <- noise, resolution <- resolution);
    if let Some(s) = args.seed.or(cfg.seed) {
        spec.seed = s;
    }
    let s = generate(&spec).context("synthetic map generation failed")?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let with_ext = |ext: &str| {
        let mut p = args.out.clone().into_os_string();
        p.push(ext);
        PathBuf::from(p)
    };
    save_map(&s.map, &with_ext(".pgm"), &with_ext(".yaml"))?;
    let truth = GroundTruth {
        width: s.map.width,
        height: s.map.height,
        resolution: s.map.resolution,
        spec: &s.spec,
        regions: &s.regions,
        doors: &s.doors,
    };
    write_file(&with_ext(".truth.json"), serde_json::to_string_pretty(&truth)?)?;
    println!(
        "{}x{} map with {} rooms and {} corridors written to {}.pgm",
        s.map.width,
        s.map.height,
        s.count(areagraph::synth::RegionKind::Room),
        s.count(areagraph::synth::RegionKind::Corridor),
        args.out.display()
    );
    Ok(())
}

fn cmd_render(cfg: &RunConfig, layers: &[Layer], out: &Path, png: Option<&Path>) -> Result<()> {
    let map = load(cfg)?;
    let mut svg = Svg::new(&map);
    if !layers.is_empty() {
        let seg = run_segmentation(cfg, &map)?;
        // fixed drawing order, fills first
        for layer in [Layer::Alpha, Layer::Areas, Layer::Voronoi, Layer::Topology, Layer::Passages] {
            if !layers.contains(&layer) {
                continue;
            }
            match layer {
                Layer::Voronoi => svg.voronoi(&seg.voronoi),
                Layer::Alpha => svg.alpha_shapes(&seg.shapes),
                Layer::Topology => svg.topology(&seg.topology),
                Layer::Areas => svg.areas(&seg.areas),
                Layer::Passages => svg.passages(&seg.areas),
            }
        }
    }
    write_svg_and_png(&svg.finish(), out, png)
}
