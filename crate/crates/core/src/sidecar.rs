//! Word-list sidecar JSON: an externally supplied word layer for PDFs the
//! built-in extractor cannot handle, and the `extract --json` output format.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{DocId, Document, Page, Word};
use crate::geometry::BBox;
use crate::pdf;

const BOX_TOLERANCE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub pages: Vec<SidecarPage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarPage {
    pub index: usize,
    pub width: f64,
    pub height: f64,
    pub words: Vec<SidecarWord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarWord {
    pub text: String,
    pub bbox: BBox,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SidecarError {
    #[error("sidecar does not match schema: {0}")]
    SchemaMismatch(String),
    #[error("word {word} on page {page} has an invalid box")]
    BoxOutOfBounds { page: usize, word: usize },
}

impl Sidecar {
    pub fn from_json(bytes: &[u8]) -> Result<Self, SidecarError> {
        serde_json::from_slice(bytes).map_err(|e| SidecarError::SchemaMismatch(e.to_string()))
    }

    pub fn from_document(doc: &Document) -> Self {
        Sidecar {
            pages: doc
                .pages
                .iter()
                .map(|p| SidecarPage {
                    index: p.index,
                    width: p.width,
                    height: p.height,
                    words: p
                        .words
                        .iter()
                        .map(|w| SidecarWord {
                            text: w.text.clone(),
                            bbox: w.bbox,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Builds a document from the original bytes and a sidecar word list.
///
/// Word order is taken from the sidecar as given. When the PDF's page tree
/// can be read, the sidecar must cover every page.
pub fn ingest_sidecar(bytes: &[u8], sidecar: &Sidecar, filename: &str) -> Result<Document, SidecarError> {
    if !pdf::has_pdf_header(bytes) {
        return Err(SidecarError::SchemaMismatch("original bytes are not a PDF".into()));
    }
    if let Ok(file) = lopdf::Document::load_mem(bytes) {
        let expected = file.get_pages().len();
        if expected != sidecar.pages.len() {
            return Err(SidecarError::SchemaMismatch(format!(
                "PDF has {expected} pages, sidecar lists {}",
                sidecar.pages.len()
            )));
        }
    }

    let mut pages = Vec::with_capacity(sidecar.pages.len());
    for (i, sp) in sidecar.pages.iter().enumerate() {
        if sp.index != i {
            return Err(SidecarError::SchemaMismatch(format!(
                "page at position {i} has index {}",
                sp.index
            )));
        }
        if !(sp.width > 0.0 && sp.height > 0.0) {
            return Err(SidecarError::SchemaMismatch(format!("page {i} has non-positive size")));
        }
        let mut words = Vec::with_capacity(sp.words.len());
        for (j, w) in sp.words.iter().enumerate() {
            if w.text.is_empty() || w.text.chars().any(char::is_whitespace) {
                return Err(SidecarError::SchemaMismatch(format!(
                    "word {j} on page {i} is empty or contains whitespace"
                )));
            }
            if !w.bbox.is_well_formed() || !w.bbox.within_page(sp.width, sp.height, BOX_TOLERANCE) {
                return Err(SidecarError::BoxOutOfBounds { page: i, word: j });
            }
            words.push(Word {
                text: w.text.clone(),
                bbox: w.bbox,
                word_index: j,
            });
        }
        pages.push(Page {
            index: i,
            width: sp.width,
            height: sp.height,
            rotation: 0,
            words,
        });
    }
    Ok(Document::new(DocId::from_bytes(bytes), filename, pages).with_raw_bytes(bytes.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NOT_LOADABLE: &[u8] = b"%PDF-1.7\n% body the object layer cannot read\n";

    fn one_word(bbox: [f64; 4]) -> Sidecar {
        Sidecar::from_json(
            format!(
                r#"{{"pages":[{{"index":0,"width":100,"height":100,"words":[{{"text":"X","bbox":{bbox:?}}}]}}]}}"#
            )
            .as_bytes(),
        )
        .unwrap()
    }

    #[test]
    fn passes_words_through() {
        let doc = ingest_sidecar(NOT_LOADABLE, &one_word([10.0, 10.0, 20.0, 20.0]), "a.pdf").unwrap();
        assert_eq!(doc.pages.len(), 1);
        assert_eq!(doc.pages[0].words[0].text, "X");
        assert_eq!(doc.pages[0].words[0].bbox, BBox::new(10.0, 10.0, 20.0, 20.0));
        assert!(doc.raw_bytes().is_some());
        assert_eq!(doc.doc_id, DocId::from_bytes(NOT_LOADABLE));
    }

    #[test]
    fn inverted_box_is_rejected() {
        let err = ingest_sidecar(NOT_LOADABLE, &one_word([30.0, 10.0, 20.0, 20.0]), "a.pdf").unwrap_err();
        assert_eq!(err, SidecarError::BoxOutOfBounds { page: 0, word: 0 });
    }

    #[test]
    fn box_outside_page_is_rejected() {
        let err = ingest_sidecar(NOT_LOADABLE, &one_word([10.0, 10.0, 120.0, 20.0]), "a.pdf").unwrap_err();
        assert!(matches!(err, SidecarError::BoxOutOfBounds { .. }));
    }

    #[test]
    fn bad_json_is_schema_mismatch() {
        assert!(matches!(
            Sidecar::from_json(br#"{"pages":[{"index":0}]}"#),
            Err(SidecarError::SchemaMismatch(_))
        ));
    }
}
