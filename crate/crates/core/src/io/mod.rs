//! File formats: text instances, JSON layout documents and SVG.

mod document;
mod instance;
mod svg;

use thiserror::Error;

use crate::reconcile::ReconError;
use crate::tree::TreeError;

pub use document::{emit_json, parse_json, InstanceMeta, LayoutDocument, LayoutParams};
pub use instance::{parse_instance, parse_instance_with, CophyInstance, NamedGamma, ParseOptions};
pub use svg::{emit_svg, SvgStyle, STYLE_ENV};

#[derive(Error, Debug)]
pub enum IoError {
    #[error("missing #{0} section")]
    MissingSection(&'static str),
    #[error("section #{0} appears twice")]
    DuplicateSection(String),
    #[error("mapping name `{0}` appears twice")]
    DuplicateGamma(String),
    #[error("no mapping named `{0}`")]
    UnknownGamma(String),
    #[error("line {line}: cannot read `{text}`")]
    BadLine { line: usize, text: String },
    #[error("#{section}: {source}")]
    Newick {
        section: &'static str,
        source: TreeError,
    },
    #[error("mapping `{name}`: {source}")]
    Gamma { name: String, source: ReconError },
    #[error(transparent)]
    Reconciliation(#[from] ReconError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("document does not match its instance: {0}")]
    InvalidDocument(String),
}
