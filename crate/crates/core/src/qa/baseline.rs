//! Deterministic lexical baseline: remembers the answers given for each
//! question and picks the page window most similar to one of them.

use serde::{Deserialize, Serialize};

use crate::dataset::TrainingSet;
use crate::document::TextMap;
use crate::metrics::gestalt_ratio;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionEntry {
    pub question: String,
    /// Distinct answer texts in first-seen order.
    pub answers: Vec<String>,
    /// Answer lengths in words.
    pub min_words: usize,
    pub max_words: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BaselineState {
    pub questions: Vec<QuestionEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMatch {
    pub start_word: usize,
    pub end_word: usize,
    pub confidence: f64,
}

fn word_len(s: &str) -> usize {
    s.split_whitespace().count()
}

pub fn baseline_train(set: &TrainingSet) -> BaselineState {
    let mut state = BaselineState::default();
    for ex in &set.examples {
        let n = word_len(&ex.answer.text);
        if n == 0 {
            continue;
        }
        match state.questions.iter_mut().find(|q| q.question == ex.question) {
            Some(q) => {
                if !q.answers.contains(&ex.answer.text) {
                    q.answers.push(ex.answer.text.clone());
                }
                q.min_words = q.min_words.min(n);
                q.max_words = q.max_words.max(n);
            }
            None => state.questions.push(QuestionEntry {
                question: ex.question.clone(),
                answers: vec![ex.answer.text.clone()],
                min_words: n,
                max_words: n,
            }),
        }
    }
    state
}

impl BaselineState {
    /// Stored question most similar to `question`; the first stored wins ties.
    pub fn match_question(&self, question: &str) -> Option<&QuestionEntry> {
        let mut best: Option<(&QuestionEntry, f64)> = None;
        for q in &self.questions {
            let r = gestalt_ratio(question, &q.question);
            if best.map_or(true, |(_, b)| r > b) {
                best = Some((q, r));
            }
        }
        best.map(|(q, _)| q)
    }
}

/// Best window on a page: highest similarity to any stored answer, earliest
/// start on ties, then the shorter window. `None` only when the page has no
/// words or nothing has been trained.
pub fn baseline_infer(state: &BaselineState, map: &TextMap, question: &str) -> Option<WindowMatch> {
    let entry = state.match_question(question)?;
    let n = map.word_count();
    let answers: Vec<(&str, usize)> = entry.answers.iter().map(|a| (a.as_str(), a.chars().count())).collect();
    let mut best: Option<WindowMatch> = None;
    for start in 0..n {
        for len in entry.min_words..=entry.max_words {
            let end = start + len - 1;
            if end >= n {
                break;
            }
            let (cs, ce) = map.span_range(start, end)?;
            let text = map.slice(cs, ce)?;
            let tlen = ce - cs;
            let mut conf = 0.0f64;
            for &(a, alen) in &answers {
                // 2·min/(sum) bounds the ratio; skip answers that cannot improve
                let bound = 2.0 * tlen.min(alen) as f64 / (tlen + alen) as f64;
                if bound <= conf {
                    continue;
                }
                conf = conf.max(gestalt_ratio(text, a));
            }
            if best.map_or(true, |b| conf > b.confidence) {
                best = Some(WindowMatch {
                    start_word: start,
                    end_word: end,
                    confidence: conf,
                });
            }
        }
        if best.is_some_and(|b| b.confidence >= 1.0) {
            break;
        }
    }
    // a page shorter than every stored answer still gets an answer
    if best.is_none() && n > 0 {
        let end = n - 1;
        let (cs, ce) = map.span_range(0, end)?;
        let text = map.slice(cs, ce)?;
        let conf = answers.iter().map(|(a, _)| gestalt_ratio(text, a)).fold(0.0, f64::max);
        best = Some(WindowMatch {
            start_word: 0,
            end_word: end,
            confidence: conf,
        });
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Answer, TrainingExample};
    use crate::document::DocId;

    fn set(pairs: &[(&str, &str)]) -> TrainingSet {
        let examples = pairs
            .iter()
            .enumerate()
            .map(|(i, (q, a))| TrainingExample {
                id: i.to_string(),
                question: (*q).into(),
                context: (*a).into(),
                answer: Answer { text: (*a).into(), start: 0 },
                words: vec![],
                doc_id: DocId::from_bytes(b"x"),
                page: 0,
                page_size: [612.0, 792.0],
            })
            .collect();
        TrainingSet::new(vec![], examples)
    }

    #[test]
    fn training_collects_answers_and_lengths() {
        let s = baseline_train(&set(&[("Q", "a b"), ("Q", "a b c d e"), ("Q", "a b"), ("R", "x")]));
        assert_eq!(s.questions.len(), 2);
        assert_eq!(s.questions[0].answers, ["a b", "a b c d e"]);
        assert_eq!((s.questions[0].min_words, s.questions[0].max_words), (2, 5));
        assert_eq!((s.questions[1].min_words, s.questions[1].max_words), (1, 1));
    }

    #[test]
    fn exact_window_scores_one() {
        let s = baseline_train(&set(&[("What is the job title?", "Software Engineer")]));
        let map = TextMap::from_words(["Title:", "Software", "Engineer", "at", "Acme"]);
        let m = baseline_infer(&s, &map, "What is the job title?").unwrap();
        assert_eq!((m.start_word, m.end_word, m.confidence), (1, 2, 1.0));
    }

    #[test]
    fn ties_go_to_earliest() {
        let s = baseline_train(&set(&[("Q", "red fox")]));
        let map = TextMap::from_words(["a", "red", "fox", "b", "red", "fox"]);
        let m = baseline_infer(&s, &map, "Q").unwrap();
        assert_eq!((m.start_word, m.end_word), (1, 2));
    }

    #[test]
    fn unrelated_page_still_answers() {
        let s = baseline_train(&set(&[("Q", "Software Engineer")]));
        let map = TextMap::from_words(["zzz", "qqq", "123"]);
        let m = baseline_infer(&s, &map, "Q").unwrap();
        assert!(m.confidence < 0.5);
        let short = TextMap::from_words(["x"]);
        assert_eq!(baseline_infer(&s, &short, "Q").unwrap().end_word, 0);
        assert!(baseline_infer(&s, &TextMap::from_words(Vec::<&str>::new()), "Q").is_none());
    }

    #[test]
    fn question_matching_prefers_first_on_ties() {
        let s = baseline_train(&set(&[("abc", "1"), ("abc", "2"), ("abd", "3")]));
        assert_eq!(s.match_question("abc").unwrap().answers, ["1", "2"]);
        assert_eq!(s.match_question("xbd").unwrap().question, "abd");
    }
}
