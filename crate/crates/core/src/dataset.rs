//! Training data export: one page-level extractive QA example per stored
//! annotation, carrying the page text, answer offsets and every word's box on
//! the 0–1000 integer grid used by layout-aware models.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::document::{DocId, Document, Page, TextMap};
use crate::geometry::BBox;
use crate::store::QaRecord;

pub const FORMAT_VERSION: u32 = 1;
/// Slack allowed outside the page before a box is rejected.
pub const BOX_TOLERANCE: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("box {0:?} lies outside the {1}x{2} page")]
    BoxOutOfBounds([f64; 4], f64, f64),
    #[error("document {0} is not available")]
    MissingDocument(String),
    #[error("record {record_id} no longer matches document {doc_id}")]
    StaleSpan { record_id: String, doc_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    /// Character (not byte) offset into `context`.
    pub start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordBox {
    pub t: String,
    #[serde(rename = "box")]
    pub bbox: [i64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub id: String,
    pub question: String,
    pub context: String,
    pub answer: Answer,
    pub words: Vec<WordBox>,
    pub doc_id: DocId,
    pub page: usize,
    pub page_size: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub version: u32,
    pub set_id: String,
    #[serde(default)]
    pub created_from: Vec<String>,
    pub created_at: DateTime<Utc>,
    pub examples: Vec<TrainingExample>,
}

impl TrainingSet {
    pub fn new(created_from: Vec<String>, examples: Vec<TrainingExample>) -> Self {
        TrainingSet {
            version: FORMAT_VERSION,
            set_id: Uuid::new_v4().simple().to_string(),
            created_from,
            created_at: Utc::now(),
            examples,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

fn scale(v: f64, extent: f64) -> i64 {
    // round half up, then clamp
    ((v * 1000.0 / extent + 0.5).floor() as i64).clamp(0, 1000)
}

pub fn normalize_box(b: &BBox, page: &Page) -> Result<[i64; 4], DatasetError> {
    let (w, h) = (page.width, page.height);
    let inside = [b.x0, b.x1].iter().all(|x| x.is_finite() && *x >= -BOX_TOLERANCE && *x <= w + BOX_TOLERANCE)
        && [b.y0, b.y1].iter().all(|y| y.is_finite() && *y >= -BOX_TOLERANCE && *y <= h + BOX_TOLERANCE);
    if !inside || w <= 0.0 || h <= 0.0 {
        return Err(DatasetError::BoxOutOfBounds((*b).into(), w, h));
    }
    Ok([scale(b.x0, w), scale(b.y0, h), scale(b.x1, w), scale(b.y1, h)])
}

/// Builds the example for one record against the current parse of its document.
pub fn example_for(record: &QaRecord, doc: &Document) -> Result<TrainingExample, DatasetError> {
    let span = &record.span;
    let stale = || DatasetError::StaleSpan {
        record_id: record.record_id.clone(),
        doc_id: span.doc_id.to_string(),
    };
    if doc.doc_id != span.doc_id {
        return Err(stale());
    }
    let page = doc.page(span.page_index).ok_or_else(stale)?;
    let map = TextMap::build(page);
    if !span.is_consistent_with(&map) {
        return Err(stale());
    }
    let words = page
        .words
        .iter()
        .map(|w| {
            Ok(WordBox {
                t: w.text.clone(),
                bbox: normalize_box(&w.bbox, page)?,
            })
        })
        .collect::<Result<_, DatasetError>>()?;
    Ok(TrainingExample {
        id: record.record_id.clone(),
        question: record.question.clone(),
        context: map.page_text().to_owned(),
        answer: Answer {
            text: span.text.clone(),
            start: span.char_start,
        },
        words,
        doc_id: span.doc_id.clone(),
        page: span.page_index,
        page_size: [page.width, page.height],
    })
}

/// One example per record, in input order.
pub fn export_training_set<F>(
    records: &[QaRecord],
    created_from: Vec<String>,
    mut lookup: F,
) -> Result<TrainingSet, DatasetError>
where
    F: FnMut(&DocId) -> Option<Document>,
{
    let mut examples = Vec::with_capacity(records.len());
    let mut cached: Option<Document> = None;
    for r in records {
        if cached.as_ref().map(|d| &d.doc_id) != Some(&r.span.doc_id) {
            cached = Some(lookup(&r.span.doc_id).ok_or_else(|| DatasetError::MissingDocument(r.span.doc_id.to_string()))?);
        }
        examples.push(example_for(r, cached.as_ref().expect("just filled"))?);
    }
    Ok(TrainingSet::new(created_from, examples))
}

/// Names of the invariants `ex` violates; empty when it is well formed.
pub fn validate_example(ex: &TrainingExample) -> Vec<&'static str> {
    let mut out = Vec::new();
    if ex.question.trim().is_empty() {
        out.push("empty_question");
    }
    let answer_len = ex.answer.text.chars().count();
    let slice: Option<String> = (ex.answer.start + answer_len <= ex.context.chars().count())
        .then(|| ex.context.chars().skip(ex.answer.start).take(answer_len).collect());
    if answer_len == 0 || slice.as_deref() != Some(ex.answer.text.as_str()) {
        out.push("answer_offset_mismatch");
    }
    let context_words: Vec<&str> = ex.context.split(' ').filter(|w| !w.is_empty()).collect();
    if context_words.len() != ex.words.len() {
        out.push("word_count_mismatch");
    } else if context_words.iter().zip(&ex.words).any(|(c, w)| *c != w.t) {
        out.push("word_text_mismatch");
    }
    // an out-of-range box is reported once, as a range problem
    let in_range = |b: &[i64; 4]| b.iter().all(|v| (0..=1000).contains(v));
    if ex.words.iter().any(|w| !in_range(&w.bbox)) {
        out.push("box_range");
    }
    if ex.words.iter().any(|w| in_range(&w.bbox) && (w.bbox[0] > w.bbox[2] || w.bbox[1] > w.bbox[3])) {
        out.push("box_order");
    }
    if !(ex.page_size[0] > 0.0 && ex.page_size[1] > 0.0) {
        out.push("page_size");
    }
    out
}

/// Violations across a whole set, including duplicate example ids.
pub fn validate_set(set: &TrainingSet) -> Vec<(usize, &'static str)> {
    let mut out = Vec::new();
    if set.version != FORMAT_VERSION {
        out.push((0, "version"));
    }
    let mut seen = std::collections::HashSet::new();
    for (i, ex) in set.examples.iter().enumerate() {
        for v in validate_example(ex) {
            out.push((i, v));
        }
        if !seen.insert(ex.id.as_str()) {
            out.push((i, "duplicate_id"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::Word;
    use crate::spanmap::AnswerSpan;

    fn page(words: &[(&str, [f64; 4])]) -> Page {
        Page {
            index: 0,
            width: 612.0,
            height: 792.0,
            rotation: 0,
            words: words
                .iter()
                .enumerate()
                .map(|(i, (t, b))| Word {
                    text: (*t).into(),
                    bbox: (*b).into(),
                    word_index: i,
                })
                .collect(),
        }
    }

    #[test]
    fn normalize_examples() {
        let p = page(&[]);
        assert_eq!(normalize_box(&BBox::new(61.2, 79.2, 122.4, 158.4), &p).unwrap(), [100, 100, 200, 200]);
        assert_eq!(normalize_box(&BBox::new(0.0, 0.0, 612.0, 792.0), &p).unwrap(), [0, 0, 1000, 1000]);
        assert_eq!(normalize_box(&BBox::new(611.9, 0.0, 612.0, 1.0), &p).unwrap(), [1000, 0, 1000, 1]);
        assert_eq!(normalize_box(&BBox::new(612.5, 0.0, 612.9, 1.0), &p).unwrap(), [1000, 0, 1000, 1]);
        assert!(matches!(
            normalize_box(&BBox::new(0.0, 0.0, 614.0, 10.0), &p),
            Err(DatasetError::BoxOutOfBounds(..))
        ));
    }

    #[test]
    fn half_up_rounding() {
        let mut p = page(&[]);
        p.width = 2000.0;
        p.height = 4000.0;
        assert_eq!(normalize_box(&BBox::new(1.0, 2.0, 3.0, 6.0), &p).unwrap(), [1, 1, 2, 2]);
    }

    fn record(doc: &Document, start: usize, end: usize) -> QaRecord {
        QaRecord {
            record_id: format!("r{start}"),
            session_id: "s".into(),
            question: "What?".into(),
            span: AnswerSpan::from_words(doc.doc_id.clone(), 0, &TextMap::build(&doc.pages[0]), start, end).unwrap(),
            created_at: Utc::now(),
        }
    }

    fn doc() -> Document {
        let p = page(&[
            ("Title:", [72.0, 90.0, 100.0, 102.0]),
            ("Software", [104.0, 90.0, 150.0, 102.0]),
            ("Engineer", [154.0, 90.0, 200.0, 102.0]),
        ]);
        Document::new(DocId::from_bytes(b"d"), "d.pdf", vec![p])
    }

    #[test]
    fn export_and_validate() {
        let d = doc();
        let recs = vec![record(&d, 1, 2), record(&d, 0, 0)];
        let set = export_training_set(&recs, vec!["s".into()], |id| (id == &d.doc_id).then(|| d.clone())).unwrap();
        assert_eq!(set.examples.len(), 2);
        let ex = &set.examples[0];
        assert_eq!(ex.context, "Title: Software Engineer");
        assert_eq!(ex.answer, Answer { text: "Software Engineer".into(), start: 7 });
        assert_eq!(ex.words.len(), 3);
        assert!(validate_set(&set).is_empty());

        let mut bad = ex.clone();
        bad.answer.start += 1;
        assert_eq!(validate_example(&bad), ["answer_offset_mismatch"]);
        let mut bad = ex.clone();
        bad.words[0].bbox[0] = 1001;
        assert_eq!(validate_example(&bad), ["box_range"]);
    }

    #[test]
    fn export_errors() {
        let d = doc();
        let recs = vec![record(&d, 1, 2)];
        assert!(matches!(
            export_training_set(&recs, vec![], |_| None),
            Err(DatasetError::MissingDocument(_))
        ));
        let mut changed = d.clone();
        changed.pages[0].words[1].text = "Hardware".into();
        assert!(matches!(
            export_training_set(&recs, vec![], |_| Some(changed.clone())),
            Err(DatasetError::StaleSpan { .. })
        ));
        assert!(export_training_set(&[], vec![], |_| None).unwrap().is_empty());
    }

    #[test]
    fn wire_shape() {
        let d = doc();
        let set = export_training_set(&[record(&d, 2, 2)], vec!["s".into()], |_| Some(d.clone())).unwrap();
        let v = serde_json::to_value(&set).unwrap();
        assert_eq!(v["version"], 1);
        let ex = &v["examples"][0];
        assert_eq!(ex["answer"]["start"], 16);
        assert_eq!(ex["words"][2]["t"], "Engineer");
        assert_eq!(ex["words"][2]["box"], serde_json::json!([252, 114, 327, 129]));
        assert_eq!(ex["page"], 0);
        assert_eq!(ex["page_size"], serde_json::json!([612.0, 792.0]));
        let back: TrainingSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, set);
    }
}
