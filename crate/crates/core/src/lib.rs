//! Extractive question answering over PDF documents.
//!
//! Documents are parsed into pages of words with word-level boxes
//! ([`pdf`]), user selections are reconciled with that canonical word layer
//! ([`spanmap`]), annotations are stored per session ([`store`]), exported as
//! layout-aware training data ([`dataset`]), answered by pluggable backends
//! ([`qa`]), rendered back onto the PDF as highlights ([`highlight`]) and
//! scored ([`metrics`]).

pub mod dataset;
pub mod document;
pub mod geometry;
pub mod highlight;
pub mod metrics;
pub mod pdf;
pub mod qa;
pub mod sidecar;
pub mod spanmap;
pub mod store;

pub use document::{build_text_map, DocId, Document, Page, TextMap, Word};
pub use geometry::BBox;
pub use pdf::{parse_document, ExtractError};
pub use sidecar::{ingest_sidecar, Sidecar, SidecarError, SidecarPage, SidecarWord};
pub use spanmap::{map_selection, AnswerSpan, Selection, SpanError};
pub use metrics::{evaluate, gestalt_ratio, MetricsReport};
pub use qa::{ModelRef, ModelStatus, Prediction};
pub use dataset::{TrainingExample, TrainingSet};
pub use highlight::{emit_highlights, palette_color, HighlightPlan, Rgb};
pub use store::{QaRecord, Store, StoreError};
