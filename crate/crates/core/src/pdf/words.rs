//! Glyph runs → words → reading order.

use super::interp::PlacedGlyph;
use crate::document::Word;
use crate::geometry::BBox;

/// Horizontal gap, as a fraction of the font size, that starts a new word.
pub const GAP_FACTOR: f64 = 0.3;
/// Baseline shift, as a fraction of the font size, that starts a new word.
pub const BASELINE_FACTOR: f64 = 0.5;
/// Words whose baselines differ by less than this many points share a line.
pub const LINE_MERGE_PT: f64 = 2.0;

const MIN_EXTENT: f64 = 0.01;

#[derive(Debug, Clone)]
pub(crate) struct RawWord {
    pub text: String,
    pub bbox: BBox,
    pub baseline: f64,
}

struct Builder {
    text: String,
    bbox: BBox,
    baseline: f64,
    last: PlacedGlyph,
}

/// Groups glyphs (in content order) into words.
pub(crate) fn segment(glyphs: &[PlacedGlyph]) -> Vec<RawWord> {
    let mut words = Vec::new();
    let mut current: Option<Builder> = None;
    let flush = |b: Option<Builder>, words: &mut Vec<RawWord>| {
        if let Some(b) = b {
            if !b.text.is_empty() {
                words.push(RawWord {
                    text: b.text,
                    bbox: b.bbox,
                    baseline: b.baseline,
                });
            }
        }
    };

    for g in glyphs {
        let visible: String = g.text.chars().filter(|c| !c.is_whitespace() && !c.is_control()).collect();
        if g.text.chars().any(char::is_whitespace) && visible.is_empty() {
            flush(current.take(), &mut words);
            continue;
        }
        if visible.is_empty() {
            continue;
        }
        let breaks = match &current {
            None => true,
            Some(b) => {
                let size = g.size.max(f64::EPSILON);
                let gap = g.bbox.x0 - b.last.bbox.x1;
                let shift = (g.origin.1 - b.last.origin.1).abs();
                gap > GAP_FACTOR * size || gap < -GAP_FACTOR * size - b.last.bbox.width() || shift > BASELINE_FACTOR * size
            }
        };
        if breaks {
            flush(current.take(), &mut words);
            current = Some(Builder {
                text: visible,
                bbox: g.bbox,
                baseline: g.origin.1,
                last: g.clone(),
            });
        } else if let Some(b) = current.as_mut() {
            b.text.push_str(&visible);
            b.bbox = b.bbox.union(&g.bbox);
            b.last = g.clone();
        }
    }
    flush(current.take(), &mut words);
    words
}

/// Clips to the page, drops invisible words, sorts into reading order and
/// assigns indices.
pub(crate) fn arrange(raw: Vec<RawWord>, width: f64, height: f64) -> Vec<Word> {
    let mut kept: Vec<(usize, RawWord)> = raw
        .into_iter()
        .filter_map(|mut w| {
            let clipped = w.bbox.intersection(&BBox::new(0.0, 0.0, width, height))?;
            w.bbox = clipped;
            if w.bbox.width() < MIN_EXTENT {
                w.bbox.x1 = (w.bbox.x0 + MIN_EXTENT).min(width);
                w.bbox.x0 = w.bbox.x1 - MIN_EXTENT;
            }
            if w.bbox.height() < MIN_EXTENT {
                w.bbox.y1 = (w.bbox.y0 + MIN_EXTENT).min(height);
                w.bbox.y0 = w.bbox.y1 - MIN_EXTENT;
            }
            Some(w)
        })
        .enumerate()
        .collect();

    kept.sort_by(|(ia, a), (ib, b)| {
        a.baseline
            .total_cmp(&b.baseline)
            .then(a.bbox.x0.total_cmp(&b.bbox.x0))
            .then(ia.cmp(ib))
    });

    let mut lines: Vec<Vec<(usize, RawWord)>> = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    for item in kept {
        if lines.is_empty() || item.1.baseline - anchor >= LINE_MERGE_PT {
            anchor = item.1.baseline;
            lines.push(Vec::new());
        }
        lines.last_mut().expect("line pushed above").push(item);
    }

    lines
        .into_iter()
        .flat_map(|mut line| {
            line.sort_by(|(ia, a), (ib, b)| a.bbox.x0.total_cmp(&b.bbox.x0).then(ia.cmp(ib)));
            line
        })
        .enumerate()
        .map(|(i, (_, w))| Word {
            text: w.text,
            bbox: w.bbox,
            word_index: i,
        })
        .collect()
}
