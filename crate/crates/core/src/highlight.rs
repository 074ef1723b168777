//! Highlight annotations written onto a copy of the original PDF.
//!
//! The original bytes are kept verbatim; the annotations and the page
//! dictionaries that reference them are appended as an incremental update.

use lopdf::{dictionary, Dictionary, IncrementalDocument, Object, ObjectId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{DocId, Document};
use crate::geometry::BBox;
use crate::pdf::{self, ExtractError, PageFrame};
use crate::spanmap::AnswerSpan;

pub const OPACITY: f32 = 0.4;
/// Plan boxes may overhang the page by this much.
pub const BOX_TOLERANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn hex(&self) -> String {
        format!("#{:02X}{:02X}{:02X}", self.0, self.1, self.2)
    }
}

/// Red, orange, blue, green.
pub const PALETTE: [Rgb; 4] = [Rgb(0xCF, 0x5A, 0x5A), Rgb(0xF1, 0xA0, 0x5F), Rgb(0x66, 0x97, 0x9F), Rgb(0x7F, 0xB5, 0x6D)];

pub fn palette_color(question_ordinal: usize) -> Rgb {
    PALETTE[question_ordinal % PALETTE.len()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighlightItem {
    pub page_index: usize,
    /// Viewing-frame boxes (top-left origin), as stored for words.
    pub boxes: Vec<BBox>,
    pub color: Rgb,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighlightPlan {
    pub doc_id: DocId,
    pub items: Vec<HighlightItem>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HighlightError {
    #[error("input is not a PDF")]
    NotAPdf,
    #[error("cannot annotate this PDF: {0}")]
    Unreadable(String),
    #[error("page {0} is out of range")]
    PageOutOfRange(usize),
    #[error("box {0:?} lies outside page {1}")]
    BoxOutOfBounds([f64; 4], usize),
}

impl From<ExtractError> for HighlightError {
    fn from(e: ExtractError) -> Self {
        match e {
            ExtractError::NotAPdf => HighlightError::NotAPdf,
            e => HighlightError::Unreadable(e.to_string()),
        }
    }
}

fn unreadable(e: lopdf::Error) -> HighlightError {
    HighlightError::Unreadable(e.to_string())
}

/// One box per text line touched by the span: the union of its words there.
pub fn boxes_for_span(document: &Document, span: &AnswerSpan) -> Vec<BBox> {
    let Some(page) = document.page(span.page_index) else {
        return Vec::new();
    };
    let Some(words) = page.words.get(span.start_word..=span.end_word.min(page.words.len().saturating_sub(1))) else {
        return Vec::new();
    };
    let mut out: Vec<BBox> = Vec::new();
    let mut prev: Option<&BBox> = None;
    for w in words {
        let b = &w.bbox;
        let same_line = prev.is_some_and(|p| {
            let overlap = p.y1.min(b.y1) - p.y0.max(b.y0);
            b.x0 >= p.x0 && overlap > 0.5 * p.height().min(b.height())
        });
        match out.last_mut() {
            Some(last) if same_line => *last = last.union(b),
            _ => out.push(*b),
        }
        prev = Some(b);
    }
    out
}

/// Highlight plan for predictions or annotations: item `i` takes the
/// palette color of its question ordinal.
pub fn plan_for_spans<'a, I>(document: &Document, spans: I) -> HighlightPlan
where
    I: IntoIterator<Item = (usize, &'a str, &'a AnswerSpan)>,
{
    let items = spans
        .into_iter()
        .map(|(ordinal, label, span)| HighlightItem {
            page_index: span.page_index,
            boxes: boxes_for_span(document, span),
            color: palette_color(ordinal),
            label: label.to_owned(),
        })
        .collect();
    HighlightPlan {
        doc_id: document.doc_id.clone(),
        items,
    }
}

/// `[x0 y1 x1 y1 x0 y0 x1 y0]` per box: upper-left, upper-right, lower-left, lower-right.
fn quad(r: &[f64; 4]) -> [f64; 8] {
    let [x0, y0, x1, y1] = *r;
    [x0, y1, x1, y1, x0, y0, x1, y0]
}

fn reals(xs: &[f64]) -> Object {
    Object::Array(xs.iter().map(|&v| Object::Real(v as f32)).collect())
}

/// Appends one Highlight annotation per plan item.
pub fn emit_highlights(original: &[u8], plan: &HighlightPlan) -> Result<Vec<u8>, HighlightError> {
    let file = pdf::open(original)?;
    let pages: Vec<ObjectId> = file.get_pages().into_values().collect();

    let mut by_page: Vec<Vec<ObjectId>> = vec![Vec::new(); pages.len()];
    let mut inc = IncrementalDocument::create_from(original.to_vec(), file);
    for item in &plan.items {
        let page_id = *pages.get(item.page_index).ok_or(HighlightError::PageOutOfRange(item.page_index))?;
        let frame = PageFrame::for_page(inc.get_prev_documents(), page_id);
        let mut quads = Vec::with_capacity(item.boxes.len() * 8);
        let mut rect: Option<BBox> = None;
        for b in &item.boxes {
            if !b.is_well_formed() || !b.within_page(frame.width(), frame.height(), BOX_TOLERANCE) {
                return Err(HighlightError::BoxOutOfBounds((*b).into(), item.page_index));
            }
            let r = frame.box_to_user(b);
            quads.extend_from_slice(&quad(&r));
            let rb = BBox::new(r[0], r[1], r[2], r[3]);
            rect = Some(rect.map_or(rb, |u| u.union(&rb)));
        }
        let rect = rect.unwrap_or(BBox::new(0.0, 0.0, 0.0, 0.0));
        let Rgb(r, g, b) = item.color;
        let annot = dictionary! {
            "Type" => "Annot",
            "Subtype" => "Highlight",
            "Rect" => reals(&[rect.x0, rect.y0, rect.x1, rect.y1]),
            "QuadPoints" => reals(&quads),
            "C" => reals(&[r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0]),
            "CA" => Object::Real(OPACITY),
            "F" => 4,
            "P" => page_id,
            "Contents" => lopdf::text_string(&item.label),
        };
        let id = inc.new_document.add_object(annot);
        by_page[item.page_index].push(id);
    }

    for (page_id, added) in pages.iter().zip(&by_page) {
        if added.is_empty() {
            continue;
        }
        let refs = added.iter().map(|&id| Object::Reference(id));
        let prev = inc.get_prev_documents();
        let page = prev.get_dictionary(*page_id).map_err(unreadable)?;
        match page.get(b"Annots") {
            // the page points at a shared array object: update that object
            Ok(Object::Reference(arr_id)) => {
                let arr_id = *arr_id;
                let mut arr = prev.get_object(arr_id).and_then(Object::as_array).map_err(unreadable)?.clone();
                arr.extend(refs);
                inc.new_document.set_object(arr_id, Object::Array(arr));
            }
            existing => {
                let mut arr = match existing {
                    Ok(Object::Array(a)) => a.clone(),
                    _ => Vec::new(),
                };
                arr.extend(refs);
                let mut page: Dictionary = page.clone();
                page.set("Annots", Object::Array(arr));
                inc.new_document.set_object(*page_id, Object::Dictionary(page));
            }
        }
    }

    let mut out = Vec::with_capacity(original.len() + 1024);
    inc.save_to(&mut out).map_err(|e| HighlightError::Unreadable(e.to_string()))?;
    Ok(out)
}

/// A highlight read back from a PDF, in the viewing frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoundHighlight {
    pub page_index: usize,
    pub boxes: Vec<BBox>,
    pub color: Option<Rgb>,
    pub label: String,
}

fn number(o: &Object) -> Option<f64> {
    match o {
        Object::Integer(i) => Some(*i as f64),
        Object::Real(r) => Some(*r as f64),
        _ => None,
    }
}

/// All Highlight annotations in a PDF, page by page in annotation order.
pub fn read_highlights(bytes: &[u8]) -> Result<Vec<FoundHighlight>, HighlightError> {
    let file = pdf::open(bytes)?;
    let mut out = Vec::new();
    for (index, page_id) in file.get_pages().into_values().enumerate() {
        let frame = PageFrame::for_page(&file, page_id);
        let page = file.get_dictionary(page_id).map_err(unreadable)?;
        let annots = match page.get(b"Annots") {
            Ok(o) => file.dereference(o).map_err(unreadable)?.1.as_array().map_err(unreadable)?.clone(),
            Err(_) => continue,
        };
        for a in &annots {
            let Ok((_, Object::Dictionary(d))) = file.dereference(a) else { continue };
            if d.get(b"Subtype").and_then(Object::as_name).ok() != Some(b"Highlight".as_slice()) {
                continue;
            }
            let nums = |key: &[u8]| -> Vec<f64> {
                d.get(key)
                    .ok()
                    .and_then(|o| file.dereference(o).ok())
                    .and_then(|(_, o)| o.as_array().ok())
                    .map(|a| a.iter().filter_map(number).collect())
                    .unwrap_or_default()
            };
            let boxes = nums(b"QuadPoints")
                .chunks_exact(8)
                .map(|q| {
                    let xs = [q[0], q[2], q[4], q[6]];
                    let ys = [q[1], q[3], q[5], q[7]];
                    let min = |v: [f64; 4]| v.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = |v: [f64; 4]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let (ax, ay) = frame.to_view(min(xs), min(ys));
                    let (bx, by) = frame.to_view(max(xs), max(ys));
                    BBox::new(ax.min(bx), ay.min(by), ax.max(bx), ay.max(by))
                })
                .collect();
            let c = nums(b"C");
            let color = (c.len() == 3).then(|| {
                let ch = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
                Rgb(ch(c[0]), ch(c[1]), ch(c[2]))
            });
            let label = d
                .get(b"Contents")
                .ok()
                .and_then(|o| lopdf::decode_text_string(o).ok())
                .unwrap_or_default();
            out.push(FoundHighlight {
                page_index: index,
                boxes,
                color,
                label,
            });
        }
    }
    Ok(out)
}
