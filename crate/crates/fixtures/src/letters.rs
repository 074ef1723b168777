//! Synthetic internship offer letters: one template, many filled-in values,
//! with the gold answer span for each of the four review questions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::plan::{wrap, DocPlan, Face, LinePlan, PagePlan, RenderOptions};

pub const QUESTIONS: [&str; 4] = [
    "What is the job title?",
    "What are the work hours per week?",
    "What is the salary or hourly rate?",
    "Where is the internship address?",
];

const COMPANIES: &[&str] = &[
    "Shang Data Lab, Inc.",
    "Harbor Analytics LLC",
    "Pacific Robotics Corp.",
    "Blue Mesa Software",
    "Torrey Pines Biotech",
    "Coastal Energy Partners",
];
const TITLES: &[&str] = &[
    "Software Engineering Intern",
    "Data Science Intern",
    "Machine Learning Intern",
    "Product Design Intern",
    "Hardware Verification Intern",
    "Marketing Analytics Intern",
];
const HOURS: &[u32] = &[10, 12, 15, 16, 20, 24, 25, 30, 32, 40];
const RATES: &[&str] = &["$18.50", "$20.00", "$22.75", "$25.00", "$28.40", "$31.25", "$35.00"];
const ADDRESSES: &[&str] = &[
    "9500 Gilman Drive, La Jolla, CA 92093",
    "4250 Executive Square, San Diego, CA 92037",
    "1200 Harbor Boulevard, Oxnard, CA 93035",
    "77 Massachusetts Avenue, Cambridge, MA 02139",
    "3300 Tech Parkway, Austin, TX 78758",
    "500 Pine Street, Seattle, WA 98101",
];
const FIRST: &[&str] = &["Alex", "Priya", "Jordan", "Wei", "Maria", "Sam", "Noor", "Kenji"];
const LAST: &[&str] = &["Nguyen", "Patel", "Garcia", "Chen", "Okafor", "Silva", "Kim", "Larsen"];
const MONTHS: &[&str] = &["June", "July", "August", "September"];

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub question: &'static str,
    pub answer: String,
    /// Inclusive word range on page 0.
    pub start_word: usize,
    pub end_word: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Letter {
    pub plan: DocPlan,
    pub fields: Vec<Field>,
}

const X: f64 = 72.0;
const SIZE: f64 = 11.0;
const LEADING: f64 = 16.0;
const TEXT_WIDTH: f64 = 460.0;

struct Builder {
    lines: Vec<LinePlan>,
    baseline: f64,
    words: usize,
}

impl Builder {
    fn line(&mut self, text: &str, face: Face, size: f64) -> usize {
        let words: Vec<&str> = text.split(' ').collect();
        let first = self.words;
        self.words += words.len();
        self.lines.push(LinePlan::new(&words, X, self.baseline, size, face));
        self.baseline += LEADING;
        first
    }

    fn paragraph(&mut self, text: &str) {
        for l in wrap(text, Face::Helvetica, SIZE, X, self.baseline, TEXT_WIDTH, LEADING) {
            self.words += l.words.len();
            self.baseline = l.baseline + LEADING;
            self.lines.push(l);
        }
        self.baseline += LEADING / 2.0;
    }

    /// A "Label: value" line; returns the word index of the value.
    fn labeled(&mut self, label: &str, value: &str) -> usize {
        self.line(&format!("{label} {value}"), Face::Helvetica, SIZE) + label.split(' ').count()
    }
}

impl Letter {
    pub fn generate(seed: u64) -> Letter {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pick = |rng: &mut ChaCha8Rng, xs: &[&'static str]| *xs.choose(rng).expect("non-empty pool");
        let company = pick(&mut rng, COMPANIES);
        let title = pick(&mut rng, TITLES);
        let hours = format!("{} hours per week", HOURS.choose(&mut rng).expect("non-empty pool"));
        let rate = format!("{} per hour", pick(&mut rng, RATES));
        let address = pick(&mut rng, ADDRESSES);
        let student = format!("{} {}", pick(&mut rng, FIRST), pick(&mut rng, LAST));
        let supervisor = format!("{} {}", pick(&mut rng, FIRST), pick(&mut rng, LAST));
        let start_month = rng.gen_range(0..MONTHS.len() - 1);
        let start = format!("{} {}, 2024", MONTHS[start_month], rng.gen_range(1..=28));
        let end = format!("{} {}, 2024", MONTHS[start_month + 1], rng.gen_range(1..=28));

        let mut b = Builder {
            lines: Vec::new(),
            baseline: 72.0,
            words: 0,
        };
        b.line(company, Face::HelveticaBold, 14.0);
        b.line("Human Resources Department", Face::Helvetica, SIZE);
        b.baseline += LEADING;
        b.line(&format!("Dear {student},"), Face::Helvetica, SIZE);
        b.baseline += LEADING / 2.0;
        b.paragraph(&format!(
            "We are pleased to confirm your internship with {company}. This letter summarizes the terms \
             of your appointment for the purposes of your work authorization review."
        ));
        let t = b.labeled("Position:", title);
        let h = b.labeled("Schedule:", &hours);
        let r = b.labeled("Compensation:", &rate);
        let a = b.labeled("Work location:", address);
        b.labeled("Start date:", &start);
        b.labeled("End date:", &end);
        b.baseline += LEADING / 2.0;
        b.paragraph(&format!(
            "Your supervisor will be {supervisor}, who will meet with you during the first week. \
             Please sign and return a copy of this letter before your first day."
        ));
        b.line("Sincerely,", Face::Helvetica, SIZE);
        b.line("Recruiting Coordinator", Face::TimesRoman, SIZE);

        let field = |question, answer: &str, start: usize| Field {
            question,
            answer: answer.to_string(),
            start_word: start,
            end_word: start + answer.split(' ').count() - 1,
        };
        let fields = vec![
            field(QUESTIONS[0], title, t),
            field(QUESTIONS[1], &hours, h),
            field(QUESTIONS[2], &rate, r),
            field(QUESTIONS[3], address, a),
        ];
        Letter {
            plan: DocPlan {
                pages: vec![PagePlan::letter(b.lines)],
                options: RenderOptions::default(),
            },
            fields,
        }
    }
}

/// Letters after `from_seed` whose four field values all occur in `training`:
/// new documents (names, companies, dates, layout positions) drawn from the
/// same template and the same answer vocabulary the model was shown.
pub fn template_matched(training: &[Letter], from_seed: u64, count: usize) -> Vec<(u64, Letter)> {
    let known = |i: usize, answer: &str| training.iter().any(|t| t.fields[i].answer == answer);
    (from_seed..)
        .map(|seed| (seed, Letter::generate(seed)))
        .filter(|(_, l)| l.fields.iter().enumerate().all(|(i, f)| known(i, &f.answer)))
        .take(count)
        .collect()
}
