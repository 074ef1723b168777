//! Parsed documents: pages of words with word-level boxes, and the linear
//! text view used for character offsets.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::BBox;

/// Content hash of the original PDF bytes (lowercase hex SHA-256).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocId(String);

impl DocId {
    pub fn from_bytes(bytes: &[u8]) -> Self {
        DocId(hex::encode(Sha256::digest(bytes)))
    }

    /// Accepts an already-computed id. Returns `None` unless it is 32+ lowercase hex digits.
    pub fn parse(s: &str) -> Option<Self> {
        (s.len() >= 32 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)))
            .then(|| DocId(s.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Word {
    pub text: String,
    pub bbox: BBox,
    pub word_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub index: usize,
    /// Viewing-orientation width in points.
    pub width: f64,
    pub height: f64,
    pub rotation: u16,
    /// Words in reading order; `words[i].word_index == i`.
    pub words: Vec<Word>,
}

impl Page {
    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: DocId,
    pub filename: String,
    pub pages: Vec<Page>,
    #[serde(skip)]
    raw: Option<Arc<[u8]>>,
}

impl PartialEq for Document {
    fn eq(&self, other: &Self) -> bool {
        self.doc_id == other.doc_id && self.filename == other.filename && self.pages == other.pages
    }
}

impl Document {
    pub fn new(doc_id: DocId, filename: impl Into<String>, pages: Vec<Page>) -> Self {
        Document {
            doc_id,
            filename: filename.into(),
            pages,
            raw: None,
        }
    }

    pub fn with_raw_bytes(mut self, bytes: impl Into<Arc<[u8]>>) -> Self {
        self.raw = Some(bytes.into());
        self
    }

    /// Original bytes, when this value was built from them or re-attached by the store.
    pub fn raw_bytes(&self) -> Option<&Arc<[u8]>> {
        self.raw.as_ref()
    }

    pub fn page(&self, index: usize) -> Option<&Page> {
        self.pages.get(index)
    }

    pub fn page_count(&self) -> usize {
        self.pages.len()
    }
}

/// Linear text of one page: words joined by single spaces, with maps between
/// character offsets (Unicode scalar values) and word indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TextMap {
    page_text: String,
    /// `None` marks a separator space.
    char_to_word: Vec<Option<usize>>,
    word_to_char: Vec<(usize, usize)>,
    /// Byte offset of every char boundary, `len == chars + 1`.
    byte_offsets: Vec<usize>,
}

impl TextMap {
    pub fn build(page: &Page) -> Self {
        Self::from_words(page.words.iter().map(|w| w.text.as_str()))
    }

    pub fn from_words<'a, I: IntoIterator<Item = &'a str>>(words: I) -> Self {
        let mut page_text = String::new();
        let mut char_to_word = Vec::new();
        let mut word_to_char = Vec::new();
        let mut byte_offsets = vec![0];
        for (i, w) in words.into_iter().enumerate() {
            if i > 0 {
                page_text.push(' ');
                char_to_word.push(None);
                byte_offsets.push(page_text.len());
            }
            let start = char_to_word.len();
            for ch in w.chars() {
                page_text.push(ch);
                char_to_word.push(Some(i));
                byte_offsets.push(page_text.len());
            }
            word_to_char.push((start, char_to_word.len()));
        }
        TextMap {
            page_text,
            char_to_word,
            word_to_char,
            byte_offsets,
        }
    }

    pub fn page_text(&self) -> &str {
        &self.page_text
    }

    /// Length of `page_text` in characters.
    pub fn char_len(&self) -> usize {
        self.char_to_word.len()
    }

    pub fn word_count(&self) -> usize {
        self.word_to_char.len()
    }

    /// Word owning the character at `offset`; `None` for separators or out of range.
    pub fn word_at(&self, offset: usize) -> Option<usize> {
        self.char_to_word.get(offset).copied().flatten()
    }

    pub fn char_to_word(&self) -> &[Option<usize>] {
        &self.char_to_word
    }

    /// Character range `[start, end)` of a word.
    pub fn word_range(&self, word: usize) -> Option<(usize, usize)> {
        self.word_to_char.get(word).copied()
    }

    pub fn word_ranges(&self) -> &[(usize, usize)] {
        &self.word_to_char
    }

    /// Substring by character offsets; `None` if the range is out of bounds.
    pub fn slice(&self, start: usize, end: usize) -> Option<&str> {
        if start > end || end > self.char_len() {
            return None;
        }
        Some(&self.page_text[self.byte_offsets[start]..self.byte_offsets[end]])
    }

    pub fn byte_offset(&self, char_offset: usize) -> Option<usize> {
        self.byte_offsets.get(char_offset).copied()
    }

    /// Character offset of a byte offset that falls on a char boundary.
    pub fn char_offset(&self, byte_offset: usize) -> Option<usize> {
        self.byte_offsets.binary_search(&byte_offset).ok()
    }

    /// Character range covering words `start..=end`.
    pub fn span_range(&self, start_word: usize, end_word: usize) -> Option<(usize, usize)> {
        if start_word > end_word {
            return None;
        }
        Some((self.word_range(start_word)?.0, self.word_range(end_word)?.1))
    }
}

/// Builds the text map of a page.
pub fn build_text_map(page: &Page) -> TextMap {
    TextMap::build(page)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn page_of(words: &[&str]) -> Page {
        Page {
            index: 0,
            width: 612.0,
            height: 792.0,
            rotation: 0,
            words: words
                .iter()
                .enumerate()
                .map(|(i, t)| Word {
                    text: t.to_string(),
                    bbox: BBox::new(10.0 * i as f64, 0.0, 10.0 * i as f64 + 8.0, 10.0),
                    word_index: i,
                })
                .collect(),
        }
    }

    #[test]
    fn hello_world_map() {
        let tm = build_text_map(&page_of(&["Hello", "World"]));
        assert_eq!(tm.page_text(), "Hello World");
        assert_eq!(tm.word_ranges(), &[(0, 5), (6, 11)]);
    }

    #[test]
    fn empty_page_has_empty_text() {
        let tm = build_text_map(&page_of(&[]));
        assert_eq!(tm.page_text(), "");
        assert_eq!(tm.char_len(), 0);
        assert_eq!(tm.span_range(0, 0), None);
    }

    #[test]
    fn separators_are_marked() {
        let tm = build_text_map(&page_of(&["a", "b", "c"]));
        assert_eq!(tm.char_to_word(), &[Some(0), None, Some(1), None, Some(2)]);
    }

    #[test]
    fn char_offsets_count_scalars_not_bytes() {
        let tm = build_text_map(&page_of(&["naïve", "café"]));
        assert_eq!(tm.word_range(1), Some((6, 10)));
        assert_eq!(tm.slice(6, 10), Some("café"));
        assert_eq!(tm.char_len(), 10);
    }

    #[test]
    fn doc_id_is_content_hash() {
        let a = DocId::from_bytes(b"%PDF-1.4 a");
        assert_eq!(a, DocId::from_bytes(b"%PDF-1.4 a"));
        assert_ne!(a, DocId::from_bytes(b"%PDF-1.4 b"));
        assert_eq!(a.as_str().len(), 64);
        assert!(DocId::parse(a.as_str()).is_some());
        assert!(DocId::parse("xyz").is_none());
    }
}
