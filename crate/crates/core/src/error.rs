use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("mesh has no faces after cleanup")]
    EmptyMesh,

    #[error("labeling has {got} entries but the mesh has {expected} faces")]
    LengthMismatch { expected: usize, got: usize },

    #[error("faces {0} and {1} do not share an edge")]
    NotAdjacent(usize, usize),

    #[error("unsupported view count {0}; expected 12, 42 or 162")]
    UnsupportedViewCount(usize),

    #[error("only {hit_rate:.3} of inward rays hit the surface (need {required:.3})")]
    NotWatertightEnough { hit_rate: f64, required: f64 },

    #[error("missing mask manifest {0}")]
    MissingManifest(PathBuf),

    #[error("raster is {got:?} but {expected:?} was expected")]
    ResolutionMismatch {
        expected: (u32, u32),
        got: (u32, u32),
    },

    #[error("corrupt mask {path}: {message}")]
    CorruptMask { path: PathBuf, message: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("every face is unlabeled")]
    AllUnlabeled,

    #[error("face {0} has no label with finite cost")]
    InfeasibleUnary(usize),

    #[error("{got} values cannot support {k} mixture components")]
    TooFewValues { k: usize, got: usize },

    #[error("no output labeling for: {}", .0.join(", "))]
    MissingOutput(Vec<String>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

pub(crate) trait IoContext<T> {
    fn at(self, path: &std::path::Path) -> Result<T>;
}

impl<T> IoContext<T> for std::result::Result<T, std::io::Error> {
    fn at(self, path: &std::path::Path) -> Result<T> {
        self.map_err(|e| Error::io(path, e))
    }
}
