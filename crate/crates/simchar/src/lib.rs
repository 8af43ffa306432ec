//! Command line tools, file formats, the manifold catalog and the
//! convergence harness around [`simchar_core`].

pub mod catalog;
pub mod cli;
pub mod format;
pub mod harness;
pub mod plan;
pub mod report;

pub use catalog::{catalog, CatalogEntry, ManifoldId, ReferenceData};
pub use harness::{run_convergence, Check, ConvergenceOutcome};
pub use plan::ExperimentPlan;
pub use report::{emit_report, parse_report, ConvergenceRow, Format};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] simchar_core::Error),
    #[error("unknown manifold `{0}`")]
    UnknownManifold(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("fullness {fullness:e} at level {level} is below the floor {floor:e}")]
    FullnessBelowFloor { level: u32, fullness: f64, floor: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
