//! Plumbing behind the `sphere-layout` binary: hierarchy ingestion, layout
//! and mesh serialization, and the surface-utilization report.

pub mod document;
pub mod ingest;
pub mod mesh;
pub mod report;

/// Everything the command-line layer can fail with.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Input document did not parse or failed validation.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    /// Geometry or solver failure from the layout library.
    #[error(transparent)]
    Core(#[from] sphere_layout::Error),
}
