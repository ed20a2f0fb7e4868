//! Campaign runner, report documents and output formats for the SO(n) chain lab.

use std::path::PathBuf;

pub mod campaign;
pub mod config;
pub mod document;
pub mod emit;

pub use campaign::run_campaign;
pub use config::{parse_list, Campaign, CampaignConfig, Caps, Format, Tolerances};
pub use document::ReportDocument;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// Process exit code: 2 for usage and configuration, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }
}
