use thiserror::Error;

use crate::map::VoxelKey;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x:.4}, {y:.4}, {z:.4}) lies outside the map bounds")]
    OutOfBounds { x: f64, y: f64, z: f64 },

    #[error("voxel key {0:?} lies outside the grid")]
    KeyOutOfBounds(VoxelKey),

    #[error("degenerate probability {0}: expected a value strictly inside (0, 1)")]
    DegenerateProbability(f64),

    #[error("semantic update produced an all-zero class vector")]
    DegenerateUpdate,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("root pose is in collision")]
    InvalidRoot,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Config and scenario problems are reported separately from runtime
    /// failures by the CLI.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Json(_) | Error::InvalidParams(_)
        )
    }
}
