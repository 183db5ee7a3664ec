//! Run configuration: TOML file merged with command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use areagraph::passage_graph::Method;
use areagraph::pipeline::{AlphaChoice, SegmentParams};
use areagraph::synth::SynthSpec;
use areagraph::topology::TopologyParams;
use clap::Args;
use serde::Deserialize;

/// Map and pipeline flags shared by the map-reading commands.
#[derive(Args, Debug, Clone, Default)]
pub struct PipelineArgs {
    /// Map metadata YAML (its `image` is a PGM or PNG).
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// α in square pixels.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["door_width", "corridor_width"])]
    pub alpha: Option<f64>,
    /// Widest door in meters; with --corridor-width picks α.
    #[arg(long, requires = "corridor_width")]
    pub door_width: Option<f64>,
    /// Narrowest corridor in meters.
    #[arg(long, requires = "door_width")]
    pub corridor_width: Option<f64>,
    /// Meters; edges with lower clearance are removed.
    #[arg(long)]
    pub min_clearance: Option<f64>,
    /// Meters; shorter dead ends are pruned.
    #[arg(long)]
    pub deadend_min_length: Option<f64>,
    /// Dead-end pruning rounds.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Meters; closer topology vertices are merged.
    #[arg(long)]
    pub merge_dist: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub map: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub door_width: Option<f64>,
    pub corridor_width: Option<f64>,
    pub min_clearance: Option<f64>,
    pub deadend_min_length: Option<f64>,
    pub iterations: Option<usize>,
    pub merge_dist: Option<f64>,
    /// Planning methods by name.
    pub methods: Option<Vec<String>>,
    pub seed: Option<u64>,
    /// Synthetic map parameters for `synth`.
    pub synth: Option<SynthSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        // map paths are relative to the config file
        if let (Some(m), Some(dir)) = (cfg.map.as_mut(), path.parent()) {
            if m.is_relative() {
                *m = dir.join(&*m);
            }
        }
        Ok(cfg)
    }

    /// Flags override the file; an α flag replaces configured widths and
    /// vice versa.
    pub fn merged(&self, a: &PipelineArgs) -> Self {
        let mut c = self.clone();
        if a.map.is_some() {
            c.map = a.map.clone();
        }
        if a.alpha.is_some() {
            c.alpha = a.alpha;
            c.door_width = None;
            c.corridor_width = None;
        }
        if a.door_width.is_some() {
            c.alpha = None;
            c.door_width = a.door_width;
            c.corridor_width = a.corridor_width;
        }
        c.min_clearance = a.min_clearance.or(c.min_clearance);
        c.deadend_min_length = a.deadend_min_length.or(c.deadend_min_length);
        c.iterations = a.iterations.or(c.iterations);
        c.merge_dist = a.merge_dist.or(c.merge_dist);
        c
    }

    pub fn segment_params(&self, resolution: f64) -> Result<SegmentParams> {
        let alpha = match (self.alpha, self.door_width, self.corridor_width) {
            (Some(a), None, None) => AlphaChoice::Value(a),
            (None, Some(door), Some(corridor)) => AlphaChoice::Widths { door, corridor },
            (None, None, None) => bail!("give either --alpha or both --door-width and --corridor-width"),
            _ => bail!("give exactly one of --alpha or the --door-width/--corridor-width pair"),
        };
        let mut tp = TopologyParams::from_resolution(resolution);
        let px = |m: f64, name: &str| -> Result<f64> {
            if m.is_finite() && m >= 0.0 {
                Ok(m / resolution)
            } else {
                bail!("{name} must be a non-negative length in meters, got {m}")
            }
        };
        if let Some(m) = self.min_clearance {
            tp.min_clearance = px(m, "min_clearance")?;
        }
        if let Some(m) = self.deadend_min_length {
            tp.deadend_min_length = px(m, "deadend_min_length")?;
        }
        if let Some(m) = self.merge_dist {
            tp.merge_dist = px(m, "merge_dist")?;
        }
        if let Some(n) = self.iterations {
            tp.iterations = n;
        }
        Ok(SegmentParams { alpha, topology: Some(tp) })
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        match &self.methods {
            None => Ok(vec![Method::Grid, Method::AstarPassage, Method::VoronoiPassage]),
            Some(names) => names.iter().map(|n| crate::parse_method(n).map_err(anyhow::Error::msg)).collect(),
        }
    }
}
