//! Pluggable QA backends.

pub mod baseline;
pub mod external;
mod service;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::DocId;
use crate::geometry::BBox;
use crate::store::StoreError;

pub use baseline::{baseline_infer, baseline_train, BaselineState};
pub use external::ExternalClient;
pub use service::QaService;

pub const BUILTIN_BACKEND: &str = "builtin-lexical";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QaError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend failed: {0}")]
    BackendFailure(String),
    #[error("backend broke the protocol: {0}")]
    BackendProtocolViolation(String),
    #[error("unknown backend {0}")]
    UnknownBackend(String),
    #[error("unknown model {0}")]
    UnknownModel(String),
    #[error("model {0} is not ready")]
    ModelNotReady(String),
    #[error("document {0} has no text to answer from")]
    EmptyDocument(String),
    #[error(transparent)]
    Store(StoreError),
}

impl From<StoreError> for QaError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownModel(m) => QaError::UnknownModel(m),
            e => QaError::Store(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackendKind {
    #[serde(rename = "builtin-lexical")]
    BuiltinLexical,
    #[serde(rename = "external")]
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub backend_id: String,
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub supports_layout: bool,
}

impl BackendDescriptor {
    pub fn builtin() -> Self {
        BackendDescriptor {
            backend_id: BUILTIN_BACKEND.into(),
            kind: BackendKind::BuiltinLexical,
            endpoint: None,
            supports_layout: false,
        }
    }

    pub fn external(backend_id: impl Into<String>, endpoint: impl Into<String>, supports_layout: bool) -> Self {
        BackendDescriptor {
            backend_id: backend_id.into(),
            kind: BackendKind::External,
            endpoint: Some(endpoint.into()),
            supports_layout,
        }
    }
}

/// One answer for one (question, document).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub question: String,
    pub doc_id: DocId,
    pub page_index: usize,
    pub answer_text: String,
    pub char_start: usize,
    pub char_end: usize,
    pub word_span: (usize, usize),
    pub boxes: Vec<BBox>,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelStatus {
    Training,
    Ready,
    Failed,
}

impl ModelStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelStatus::Training => "training",
            ModelStatus::Ready => "ready",
            ModelStatus::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "training" => Some(ModelStatus::Training),
            "ready" => Some(ModelStatus::Ready),
            "failed" => Some(ModelStatus::Failed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRef {
    pub model_id: String,
    pub backend_id: String,
    pub trained_on: String,
    pub created_at: chrono::DateTime<chrono::Utc>,
    pub status: ModelStatus,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}
