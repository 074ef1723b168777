//! PDF → pages of words with word-level boxes.
//!
//! The file structure (cross-reference tables and streams, object streams,
//! stream filters) is read with `lopdf`; text positioning, font metrics,
//! word segmentation and reading order are handled here.

mod cmap;
mod encoding;
mod font;
pub(crate) mod frame;
mod interp;
pub(crate) mod obj;
#[rustfmt::skip]
mod std_fonts;
mod words;

use lopdf::Document as PdfFile;
use thiserror::Error;

use crate::document::{DocId, Document, Page};

pub use frame::PageFrame;
pub use words::{BASELINE_FACTOR, GAP_FACTOR, LINE_MERGE_PT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error("input is not a PDF (missing %PDF- header)")]
    NotAPdf,
    #[error("unsupported PDF feature: {0}")]
    UnsupportedFeature(String),
    #[error("document is encrypted")]
    Encrypted,
    #[error("malformed PDF: {0}")]
    Malformed(String),
}

const HEADER_SEARCH: usize = 1024;

/// True when a `%PDF-` signature appears near the start of the bytes.
pub fn has_pdf_header(bytes: &[u8]) -> bool {
    let head = &bytes[..bytes.len().min(HEADER_SEARCH)];
    head.windows(5).any(|w| w == b"%PDF-")
}

fn mentions_encrypt(bytes: &[u8]) -> bool {
    bytes.windows(8).any(|w| w == b"/Encrypt")
}

/// Opens the object layer, mapping load failures onto extraction errors.
pub(crate) fn open(bytes: &[u8]) -> Result<PdfFile, ExtractError> {
    if !has_pdf_header(bytes) {
        return Err(ExtractError::NotAPdf);
    }
    match PdfFile::load_mem(bytes) {
        Ok(file) => {
            if file.was_encrypted() || file.trailer.has(b"Encrypt") {
                return Err(ExtractError::Encrypted);
            }
            Ok(file)
        }
        Err(_) if mentions_encrypt(bytes) => Err(ExtractError::Encrypted),
        Err(e) => Err(ExtractError::Malformed(e.to_string())),
    }
}

/// Parses PDF bytes into a [`Document`].
pub fn parse_document(bytes: &[u8], filename: &str) -> Result<Document, ExtractError> {
    let file = open(bytes)?;
    let mut pages = Vec::new();
    for (index, page_id) in file.get_pages().into_values().enumerate() {
        pages.push(parse_page(&file, page_id, index)?);
    }
    Ok(Document::new(DocId::from_bytes(bytes), filename, pages).with_raw_bytes(bytes.to_vec()))
}

fn parse_page(file: &PdfFile, page_id: lopdf::ObjectId, index: usize) -> Result<Page, ExtractError> {
    let frame = PageFrame::for_page(file, page_id);
    let mut content = Vec::new();
    for id in file.get_page_contents(page_id) {
        let Ok(obj) = file.get_object(id) else { continue };
        let Ok(stream) = obj.as_stream() else { continue };
        let data = stream
            .get_plain_content()
            .map_err(|e| ExtractError::UnsupportedFeature(format!("content stream filter: {e}")))?;
        content.extend_from_slice(&data);
        content.push(b'\n');
    }
    let resources = page_resources(file, page_id);
    let mut interp = interp::Interpreter::new(file, frame);
    interp.run(&content, resources)?;
    let raw = words::segment(&interp.into_glyphs());
    Ok(Page {
        index,
        width: frame.width(),
        height: frame.height(),
        rotation: frame.rotation,
        words: words::arrange(raw, frame.width(), frame.height()),
    })
}

fn page_resources(file: &PdfFile, page_id: lopdf::ObjectId) -> Option<&lopdf::Dictionary> {
    let mut node = file.get_dictionary(page_id).ok()?;
    for _ in 0..64 {
        if let Some(r) = obj::dict_get(file, node, b"Resources").and_then(|o| o.as_dict().ok()) {
            return Some(r);
        }
        node = obj::dict_get(file, node, b"Parent")?.as_dict().ok()?;
    }
    None
}
