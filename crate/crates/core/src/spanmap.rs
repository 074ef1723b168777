//! Reconciles a browser selection (text with unreliable whitespace, plus
//! phrase-level rectangles) with the canonical word layer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{DocId, Document, Page, TextMap};
use crate::geometry::{region_area, region_intersection_area, BBox};

/// Selection rectangles may overhang the page by this much.
pub const RECT_TOLERANCE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub doc_id: DocId,
    #[serde(rename = "page")]
    pub page_index: usize,
    #[serde(rename = "text")]
    pub raw_text: String,
    #[serde(default)]
    pub rects: Vec<BBox>,
}

/// A contiguous word range on one page; `end_word` is inclusive and
/// `char_end` exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnswerSpan {
    pub doc_id: DocId,
    pub page_index: usize,
    pub start_word: usize,
    pub end_word: usize,
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpanError {
    #[error("selection is empty after whitespace normalization")]
    EmptySelection,
    #[error("selection text does not occur on the page")]
    NoMatch,
    #[error("page {0} is out of range")]
    PageOutOfRange(usize),
    #[error("selection refers to a different document")]
    WrongDocument,
}

impl AnswerSpan {
    /// Span over words `start..=end` of a page's text map.
    pub fn from_words(doc_id: DocId, page_index: usize, map: &TextMap, start: usize, end: usize) -> Option<Self> {
        let (char_start, char_end) = map.span_range(start, end)?;
        Some(AnswerSpan {
            doc_id,
            page_index,
            start_word: start,
            end_word: end,
            text: map.slice(char_start, char_end)?.to_owned(),
            char_start,
            char_end,
        })
    }

    /// True when the span's indices and text agree with `map`.
    pub fn is_consistent_with(&self, map: &TextMap) -> bool {
        self.start_word <= self.end_word
            && self.end_word < map.word_count()
            && map.span_range(self.start_word, self.end_word) == Some((self.char_start, self.char_end))
            && map.slice(self.char_start, self.char_end) == Some(self.text.as_str())
    }

    pub fn word_count(&self) -> usize {
        self.end_word - self.start_word + 1
    }
}

/// Collapses whitespace runs (normalized) and removes all whitespace (stripped).
pub fn normalize_selection(raw_text: &str) -> Result<(String, String), SpanError> {
    let normalized = raw_text.split_whitespace().collect::<Vec<_>>().join(" ");
    if normalized.is_empty() {
        return Err(SpanError::EmptySelection);
    }
    let stripped = normalized.chars().filter(|c| !c.is_whitespace()).collect();
    Ok((normalized, stripped))
}

/// Start offsets (in chars) of every occurrence of `needle` in `hay`,
/// overlapping occurrences included.
fn occurrences(hay: &[char], needle: &[char]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > hay.len() {
        return Vec::new();
    }
    (0..=hay.len() - needle.len())
        .filter(|&i| hay[i..i + needle.len()] == *needle)
        .collect()
}

fn snap(map: &TextMap, doc_id: &DocId, page_index: usize, first: usize, last: usize) -> Option<AnswerSpan> {
    let start = map.word_at(first)?;
    let end = map.word_at(last)?;
    AnswerSpan::from_words(doc_id.clone(), page_index, map, start, end)
}

/// Candidate spans for a selection, in ascending `char_start` order.
pub fn find_candidates(map: &TextMap, selection: &Selection) -> Result<Vec<AnswerSpan>, SpanError> {
    let (normalized, stripped) = normalize_selection(&selection.raw_text)?;
    let page: Vec<char> = map.page_text().chars().collect();
    let (doc, pi) = (&selection.doc_id, selection.page_index);

    let needle: Vec<char> = normalized.chars().collect();
    let mut found: Vec<AnswerSpan> = occurrences(&page, &needle)
        .into_iter()
        .filter_map(|at| snap(map, doc, pi, at, at + needle.len() - 1))
        .collect();

    if found.is_empty() {
        // whitespace-free view of the page, remembering where each char came from
        let (squeezed, origin): (Vec<char>, Vec<usize>) =
            page.iter().enumerate().filter(|(_, c)| !c.is_whitespace()).map(|(i, c)| (*c, i)).unzip();
        let needle: Vec<char> = stripped.chars().collect();
        found = occurrences(&squeezed, &needle)
            .into_iter()
            .filter_map(|at| snap(map, doc, pi, origin[at], origin[at + needle.len() - 1]))
            .collect();
    }

    found.sort_by_key(|s| (s.char_start, s.char_end));
    found.dedup_by_key(|s| (s.start_word, s.end_word));
    if found.is_empty() {
        Err(SpanError::NoMatch)
    } else {
        Ok(found)
    }
}

/// Fraction of the candidate's word area covered by the selection rects.
pub fn overlap_score(candidate: &AnswerSpan, rects: &[BBox], page: &Page) -> f64 {
    let words: Vec<BBox> = page.words[candidate.start_word..=candidate.end_word].iter().map(|w| w.bbox).collect();
    let area = region_area(&words);
    if area <= 0.0 {
        return 0.0;
    }
    region_intersection_area(&words, rects) / area
}

fn usable_rects(rects: &[BBox], page: &Page) -> Vec<BBox> {
    rects
        .iter()
        .filter(|r| r.is_well_formed() && r.area() > 0.0 && r.within_page(page.width, page.height, RECT_TOLERANCE))
        .copied()
        .collect()
}

/// Picks the candidate best covered by the selection rects; ties go to the
/// earliest candidate.
pub fn resolve_by_rects(candidates: Vec<AnswerSpan>, selection: &Selection, page: &Page) -> AnswerSpan {
    assert!(!candidates.is_empty(), "resolve_by_rects needs at least one candidate");
    if candidates.len() == 1 {
        return candidates.into_iter().next().expect("one candidate");
    }
    let rects = usable_rects(&selection.rects, page);
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let score = overlap_score(c, &rects, page);
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    candidates.into_iter().nth(best).expect("index in range")
}

pub fn map_selection(document: &Document, selection: &Selection) -> Result<AnswerSpan, SpanError> {
    if selection.doc_id != document.doc_id {
        return Err(SpanError::WrongDocument);
    }
    let page = document.page(selection.page_index).ok_or(SpanError::PageOutOfRange(selection.page_index))?;
    let map = TextMap::build(page);
    let candidates = find_candidates(&map, selection)?;
    Ok(resolve_by_rects(candidates, selection, page))
}
