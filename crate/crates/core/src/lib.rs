//! Area Graph extraction from 2D occupancy grid maps and passage-graph path
//! planning.
//!
//! The pipeline: obstacle sites from a [`mapio::GridMap`], their Voronoi
//! graph and alpha shapes ([`geometry`]), pruning into a
//! [`topology::TopologyGraph`], room segmentation into an
//! [`area_graph::AreaGraph`], and a [`passage_graph::PassageGraph`] roadmap
//! for planning, benchmarked against [`grid_planner`].

pub mod area_graph;
pub mod error;
pub mod geometry;
pub mod grid_planner;
pub mod mapio;
pub mod passage_graph;
pub mod pipeline;
pub mod synth;
pub mod topology;

pub use error::{Error, Result};
