//! Test-only PDF generator.
//!
//! Documents are described as word plans and written with `pdf-writer`; the
//! expected word boxes are computed from this crate's own metric tables, so
//! the extractor under test is checked against an independent model of the
//! same text layout.

pub mod corpus;
pub mod letters;
pub mod oracle;
mod metrics;
pub mod plan;
pub mod render;
pub mod special;

pub use plan::{DocPlan, Face, FontMode, LinePlan, PagePlan, RenderOptions, TextStyle};
pub use render::{expected_document, expected_words, render, render_rotated, ExpectedWord};
