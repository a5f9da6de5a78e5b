use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the shell engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate deformation gradient (det = {det:e})")]
    DegenerateDeformationGradient { det: f64 },

    #[error("singular matrix (det = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("inverted element {element} (det J = {det:e})")]
    InvertedElement { element: usize, det: f64 },

    #[error("degenerate surface tangents (|g1 x g2| = {norm:e})")]
    DegenerateSurfaceTangents { norm: f64 },

    #[error("degenerate fiber frame: director parallel to both previous in-plane axes")]
    DegenerateFiberFrame,

    #[error("non-positive stretch {0}")]
    NonPositiveStretch(f64),

    #[error("degenerate in-plane state (cofactor = {cofactor:e})")]
    DegenerateInPlaneState { cofactor: f64 },

    #[error("energy overflow (Q = {q}) - reduce load increment")]
    EnergyOverflow { q: f64 },

    #[error("invalid material parameter `{field}`: {reason}")]
    InvalidMaterial { field: &'static str, reason: String },

    #[error("instability at step {step} (t = {time:e} s) - reduce dt")]
    Instability { step: usize, time: f64 },

    #[error("root find did not converge (residual = {residual:e})")]
    RootNotConverged { residual: f64 },

    #[error("invalid experiment id {0} (expected 1..=5)")]
    InvalidExperiment(u32),

    #[error("non-positive stiffness estimate in element {element}")]
    NonPositiveStiffness { element: usize },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("domain error in `{field}`: {message}")]
    Domain { field: String, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
