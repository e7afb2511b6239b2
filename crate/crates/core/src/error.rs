//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix expected to have full column rank is numerically rank
    /// deficient (smallest singular value below the relative threshold).
    #[error("rank-deficient matrix: smallest singular value {smallest:.3e} below {threshold:.3e} times the largest ({largest:.3e})")]
    DegenerateMatrix {
        smallest: f64,
        largest: f64,
        threshold: f64,
    },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("point is not on the Stiefel manifold: orthogonality residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotFeasible { residual: f64, tolerance: f64 },

    #[error("backtracking line search exhausted its budget of {budget} trials at iteration {iteration}")]
    LineSearchExhausted { iteration: usize, budget: usize },

    #[error("graph is disconnected (second-smallest Laplacian eigenvalue {fiedler:.3e})")]
    DisconnectedGraph { fiedler: f64 },

    #[error("Laplacian initialization requires an undirected graph")]
    DirectedGraph,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("failed to generate a connected graph after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("{path}:{line}: {message}")]
    EdgeListFormat {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration field `{field}`: {message}")]
    InvalidConfig { field: &'static str, message: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
