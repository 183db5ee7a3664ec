use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while building or querying an Area Graph.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode image {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("invalid map metadata: {0}")]
    Metadata(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("resolution must be positive, got {0}")]
    NonPositiveResolution(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("empty result after {0}")]
    Empty(&'static str),

    #[error("invalid alpha interval: door width {door_px:.3} px is not below corridor width {corridor_px:.3} px")]
    EmptyAlphaInterval { door_px: f64, corridor_px: f64 },

    #[error("polygon operation failed: {0}")]
    Polygon(String),

    #[error("edges {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),

    #[error("point ({0:.3}, {1:.3}) is not inside any area")]
    NoArea(f64, f64),

    #[error("point ({0:.3}, {1:.3}) cannot reach any passage of its area")]
    IsolatedPoint(f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("serialization failed: {0}")]
    Serialize(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
