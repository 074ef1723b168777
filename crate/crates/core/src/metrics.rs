//! Evaluation: exact match, token F1, correctness (Corr) and
//! diagonal-normalized box distance (Dist).

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::BBox;
use crate::qa::Prediction;

/// Index-overlap fraction above which a prediction is correct outright.
pub const OVERLAP_THRESHOLD: f64 = 0.2;
/// Gestalt ratio above which a non-overlapping prediction is still correct.
pub const SIMILARITY_THRESHOLD: f64 = 0.5;

/// Longest common block in `a[alo..ahi]` × `b[blo..bhi]`, as `(i, j, len)`.
///
/// Among longest blocks the one starting earliest in `a` wins, then earliest
/// in `b` — the same choice difflib makes, which matters because the choice
/// changes what the recursion can match on either side.
fn longest_match(a: &[char], b: &[char], alo: usize, ahi: usize, blo: usize, bhi: usize) -> (usize, usize, usize) {
    let (mut bi, mut bj, mut bk) = (alo, blo, 0);
    // row[j - blo + 1] = length of the common suffix ending at a[i], b[j]
    let mut prev = vec![0usize; bhi - blo + 1];
    let mut cur = vec![0usize; bhi - blo + 1];
    for i in alo..ahi {
        for j in blo..bhi {
            let k = if a[i] == b[j] { prev[j - blo] + 1 } else { 0 };
            cur[j - blo + 1] = k;
            if k > bk {
                (bi, bj, bk) = (i + 1 - k, j + 1 - k, k);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (bi, bj, bk)
}

/// Total characters matched by recursive longest-block matching.
pub fn matched_chars(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut total = 0;
    let mut stack = vec![(0, a.len(), 0, b.len())];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let (i, j, k) = longest_match(&a, &b, alo, ahi, blo, bhi);
        if k == 0 {
            continue;
        }
        total += k;
        stack.push((alo, i, blo, j));
        stack.push((i + k, ahi, j + k, bhi));
    }
    total
}

/// Ratcliff/Obershelp similarity `2M / (|a| + |b|)` with difflib's match
/// selection and no junk heuristic; two empty strings score 1.
///
/// Not symmetric: `("abbcbcbcab", "cbb")` gives 4/13 while the swapped
/// order gives 6/13.
pub fn gestalt_ratio(a: &str, b: &str) -> f64 {
    let len = a.chars().count() + b.chars().count();
    if len == 0 {
        return 1.0;
    }
    2.0 * matched_chars(a, b) as f64 / len as f64
}

/// An answer located in a page context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledAnswer {
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
    pub union_box: BBox,
    pub page_size: (f64, f64),
    /// When both sides carry a page, offsets on different pages never overlap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_index: Option<usize>,
}

impl LabeledAnswer {
    pub fn from_prediction(p: &Prediction, page_size: (f64, f64)) -> Self {
        LabeledAnswer {
            text: p.answer_text.clone(),
            char_start: p.char_start,
            char_end: p.char_end,
            union_box: BBox::union_all(&p.boxes).unwrap_or(BBox::new(0.0, 0.0, 0.0, 0.0)),
            page_size,
            page_index: Some(p.page_index),
        }
    }
}

pub fn correctness(p: &LabeledAnswer, t: &LabeledAnswer) -> u8 {
    let same_page = match (p.page_index, t.page_index) {
        (Some(a), Some(b)) => a == b,
        _ => true,
    };
    let overlap = if same_page {
        p.char_end.min(t.char_end).saturating_sub(p.char_start.max(t.char_start))
    } else {
        0
    };
    let longest = p.text.chars().count().max(t.text.chars().count());
    if longest > 0 && overlap as f64 / longest as f64 > OVERLAP_THRESHOLD {
        return 1;
    }
    u8::from(gestalt_ratio(&p.text, &t.text) > SIMILARITY_THRESHOLD)
}

/// Centroid distance as a percentage of the page diagonal.
pub fn box_distance(p: &LabeledAnswer, t: &LabeledAnswer) -> f64 {
    let (w, h) = t.page_size;
    let (px, py) = p.union_box.center();
    let (tx, ty) = t.union_box.center();
    100.0 * (px - tx).hypot(py - ty) / w.hypot(h)
}

/// Lowercase, drop punctuation and the articles a/an/the, collapse whitespace.
pub fn normalize_answer(s: &str) -> String {
    let lowered: String = s
        .to_lowercase()
        .chars()
        .filter(|c| !c.is_ascii_punctuation() && !(c.is_ascii() && c.is_ascii_control()))
        .collect();
    lowered
        .split_whitespace()
        .filter(|t| !matches!(*t, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn exact_match(p: &str, t: &str) -> u8 {
    u8::from(normalize_answer(p) == normalize_answer(t))
}

pub fn token_f1(p: &str, t: &str) -> f64 {
    let p = normalize_answer(p);
    let t = normalize_answer(t);
    let pt: Vec<&str> = p.split_whitespace().collect();
    let tt: Vec<&str> = t.split_whitespace().collect();
    if pt.is_empty() && tt.is_empty() {
        return 1.0;
    }
    if pt.is_empty() || tt.is_empty() {
        return 0.0;
    }
    let mut bag: HashMap<&str, usize> = HashMap::new();
    for tok in &tt {
        *bag.entry(tok).or_default() += 1;
    }
    let mut common = 0;
    for tok in &pt {
        if let Some(n) = bag.get_mut(tok) {
            if *n > 0 {
                *n -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / pt.len() as f64;
    let recall = common as f64 / tt.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionMetrics {
    pub question: String,
    pub em: u8,
    pub f1: f64,
    pub corr: u8,
    pub dist_pct: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub acc_pct: f64,
    pub f1_pct: f64,
    pub corr_pct: f64,
    pub mean_dist_pct: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_question: Vec<QuestionMetrics>,
    pub aggregates: Aggregates,
    pub incorrect_mean_dist_pct: f64,
}

/// One prediction paired with its gold answer. Dist uses the gold page size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPair {
    pub prediction: Prediction,
    pub gold: LabeledAnswer,
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    if n == 0 {
        0.0
    } else {
        xs.sum::<f64>() / n as f64
    }
}

pub fn evaluate(pairs: &[EvalPair]) -> MetricsReport {
    let per_question: Vec<QuestionMetrics> = pairs
        .iter()
        .map(|pair| {
            let p = LabeledAnswer::from_prediction(&pair.prediction, pair.gold.page_size);
            let dist_pct = if pair.prediction.boxes.is_empty() {
                // nothing to locate: as far off as the page allows
                100.0
            } else {
                box_distance(&p, &pair.gold)
            };
            QuestionMetrics {
                question: pair.prediction.question.clone(),
                em: exact_match(&p.text, &pair.gold.text),
                f1: token_f1(&p.text, &pair.gold.text),
                corr: correctness(&p, &pair.gold),
                dist_pct,
            }
        })
        .collect();
    let q = &per_question;
    MetricsReport {
        aggregates: Aggregates {
            acc_pct: 100.0 * mean(q.iter().map(|m| m.em as f64)),
            f1_pct: 100.0 * mean(q.iter().map(|m| m.f1)),
            corr_pct: 100.0 * mean(q.iter().map(|m| m.corr as f64)),
            mean_dist_pct: mean(q.iter().map(|m| m.dist_pct)),
        },
        incorrect_mean_dist_pct: mean(
            q.iter().filter(|m| m.corr == 0).map(|m| m.dist_pct).collect::<Vec<_>>().into_iter(),
        ),
        per_question,
    }
}

impl MetricsReport {
    /// Plain-text table with Acc / F1 / Corr / Dist columns.
    pub fn to_table(&self) -> String {
        let width = self.per_question.iter().map(|m| m.question.chars().count()).max().unwrap_or(0).max(8);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>7} {:>7} {:>7} {:>7}", "Question", "Acc", "F1", "Corr", "Dist");
        for m in &self.per_question {
            let _ = writeln!(
                out,
                "{:<width$}  {:>7.2} {:>7.2} {:>7.2} {:>7.2}",
                m.question,
                100.0 * m.em as f64,
                100.0 * m.f1,
                100.0 * m.corr as f64,
                m.dist_pct
            );
        }
        let a = &self.aggregates;
        let _ = writeln!(
            out,
            "{:<width$}  {:>7.2} {:>7.2} {:>7.2} {:>7.2}",
            "Overall", a.acc_pct, a.f1_pct, a.corr_pct, a.mean_dist_pct
        );
        let _ = writeln!(out, "Dist over incorrect predictions: {:.2}", self.incorrect_mean_dist_pct);
        out
    }
}
