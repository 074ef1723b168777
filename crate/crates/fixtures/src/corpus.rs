//! Randomized plans for the extraction round-trip suite and span-map trials.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::plan::{DocPlan, Face, FontMode, LinePlan, PagePlan, RenderOptions, TextStyle};

/// Deliberately small so that phrases repeat within a page.
pub const VOCAB: &[&str] = &[
    "cost", "5", "and", "the", "offer", "Intern", "hours", "per", "week", "salary", "$20.00", "San", "Diego,",
    "CA", "title:", "data", "engineer", "review", "(draft)", "office", "2024", "of", "to", "in", "A-1",
];

const MAX_LINE_WIDTH: f64 = 380.0;

pub const FONT_MODES: [FontMode; 4] =
    [FontMode::Standard, FontMode::ExplicitWidths, FontMode::Differences, FontMode::Composite];
pub const STYLES: [TextStyle; 4] = [TextStyle::LineTj, TextStyle::Kerned, TextStyle::WordMatrix, TextStyle::Leading];

fn random_line(rng: &mut ChaCha8Rng, vocab: &[&str], baseline: f64, size: f64, face: Face) -> LinePlan {
    let n = rng.gen_range(1..=8);
    let mut words: Vec<&str> = Vec::new();
    for _ in 0..n {
        let w = *vocab.choose(rng).expect("non-empty vocab");
        let candidate = [words.as_slice(), &[w]].concat().join(" ");
        // leave room for spacing and scaling
        if !words.is_empty() && face.text_width(&candidate, size) > MAX_LINE_WIDTH {
            break;
        }
        words.push(w);
    }
    let mut line = LinePlan::new(&words, 72.0 + rng.gen_range(0..8) as f64 * 4.5, baseline, size, face);
    line.char_spacing = rng.gen_range(0..=2) as f64 * 0.25;
    line.word_spacing = rng.gen_range(0..=4) as f64 * 0.5;
    line.h_scale = [0.9, 1.0, 1.0, 1.1][rng.gen_range(0..4)];
    line
}

/// A page of random lines. Within a page the size is fixed so that line
/// spacing stays regular; faces vary per line.
pub fn random_page(rng: &mut ChaCha8Rng, vocab: &[&str], lines: usize) -> PagePlan {
    let size: f64 = [8.0, 9.5, 10.0, 11.0, 12.0, 14.0, 18.0][rng.gen_range(0..7)];
    let leading = (size * 1.5 * 4.0_f64).round() / 4.0;
    let mut baseline = 60.0 + rng.gen_range(0..20) as f64;
    let mut out = Vec::new();
    for _ in 0..lines {
        let face = Face::ALL[rng.gen_range(0..4)];
        out.push(random_line(rng, vocab, baseline, size, face));
        baseline += leading;
    }
    PagePlan::letter(out)
}

/// Fixture suite for the round-trip criterion: every font mode × text style,
/// alternating compression and cross-reference format, 1–3 pages each.
pub fn round_trip_suite(copies: usize) -> Vec<DocPlan> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    for copy in 0..copies {
        for (mi, &font_mode) in FONT_MODES.iter().enumerate() {
            for (si, &style) in STYLES.iter().enumerate() {
                seed += 1;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pages = (0..rng.gen_range(1..=3)).map(|_| {
                    let lines = rng.gen_range(1..=12);
                    random_page(&mut rng, VOCAB, lines)
                });
                out.push(DocPlan {
                    pages: pages.collect(),
                    options: RenderOptions {
                        font_mode,
                        style,
                        compress: (mi + si + copy) % 2 == 0,
                        xref_stream: (mi + copy) % 2 == 1,
                    },
                });
            }
        }
    }
    out
}
