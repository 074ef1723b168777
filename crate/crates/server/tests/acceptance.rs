//! Acceptance checks: one PASS/FAIL line per criterion; exits non-zero if
//! any fails. Runs without the libtest harness so the lines always print.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::e2e;
use common::*;
use pdfqa_core::geometry::BBox;
use pdfqa_core::highlight::{emit_highlights, plan_for_spans, read_highlights, PALETTE};
use pdfqa_core::metrics::{box_distance, correctness, gestalt_ratio, LabeledAnswer};
use pdfqa_core::{map_selection, parse_document, AnswerSpan, DocId, Document, Page, Selection, TextMap, Word};
use pdfqa_fixtures::corpus::{random_page, round_trip_suite, VOCAB};
use pdfqa_fixtures::letters::Letter;
use pdfqa_fixtures::special::{cost_twice, software_sentence};
use pdfqa_fixtures::{expected_document, oracle, render, render_rotated, DocPlan, Face, LinePlan, PagePlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---- gestalt ----

fn gestalt_oracle() -> Outcome {
    const PAIRS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e57);
    let mut s = || -> String {
        let n = rng.gen_range(0..=12);
        (0..n).map(|_| ['a', 'b', 'c'][rng.gen_range(0..3)]).collect()
    };
    let pairs: Vec<(String, String)> = (0..PAIRS).map(|_| (s(), s())).collect();
    let started = Instant::now();
    let mut mismatches = Vec::new();
    for (a, b) in &pairs {
        let (got, want) = (gestalt_ratio(a, b), oracle::gestalt_ratio(a, b));
        if got != want {
            mismatches.push(format!("({a:?},{b:?}): {got} vs {want}"));
        }
    }
    let elapsed = started.elapsed();
    ensure(mismatches.is_empty(), || format!("{} mismatches, e.g. {}", mismatches.len(), mismatches[0]))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{PAIRS} pairs identical to the brute-force oracle in {elapsed:.2?}"))
}

// ---- metrics spot values ----

fn answer(text: &str, start: usize, end: usize) -> LabeledAnswer {
    LabeledAnswer {
        text: text.into(),
        char_start: start,
        char_end: end,
        union_box: BBox::new(0.0, 0.0, 1.0, 1.0),
        page_size: (612.0, 792.0),
        page_index: None,
    }
}

fn corr_spot_values() -> Outcome {
    // [10,20) vs [12,30): overlap 8 of max length 18; the texts share nothing
    let overlap = correctness(&answer("aaaaaaaaaa", 10, 20), &answer("bbbbbbbbbbbbbbbbbb", 12, 30));
    // disjoint offsets, so only the similarity ratio can score these
    let case = correctness(&answer("Software Engineer", 0, 17), &answer("software engineer", 100, 117));
    let ratio = gestalt_ratio("Software Engineer", "software engineer");
    let year = correctness(&answer("2024", 0, 4), &answer("Engineer", 100, 108));
    ensure(overlap == 1, || format!("overlap case scored {overlap}"))?;
    ensure(case == 1, || format!("case-only difference scored {case}"))?;
    ensure((ratio - 0.882).abs() < 5e-4, || format!("ratio {ratio}"))?;
    ensure(year == 0, || format!("\"2024\"/\"Engineer\" scored {year}"))?;
    Ok(format!("0.444 overlap → 1; ratio {ratio:.4} → 1; \"2024\"/\"Engineer\" → 0"))
}

fn centered(x: f64, y: f64) -> LabeledAnswer {
    LabeledAnswer {
        union_box: BBox::new(x, y, x, y),
        ..answer("x", 0, 1)
    }
}

fn dist_spot_values() -> Outcome {
    let d = box_distance(&centered(100.0, 100.0), &centered(400.0, 500.0));
    // 100 * 500 / sqrt(612² + 792²), with the diagonal ≈ 1000.90
    let hand = 100.0 * 500.0 / 1_001_808f64.sqrt();
    let same = box_distance(&centered(42.0, 17.0), &centered(42.0, 17.0));
    let corners = box_distance(&centered(0.0, 0.0), &centered(612.0, 792.0));
    ensure(((d - hand) / hand).abs() < 1e-6, || format!("{d} vs {hand}"))?;
    ensure((d - 49.95).abs() < 0.005, || format!("{d} does not round to 49.95"))?;
    ensure(same == 0.0, || format!("identical boxes gave {same}"))?;
    ensure((corners - 100.0).abs() < 1e-9, || format!("corner to corner gave {corners}"))?;
    Ok(format!("centroid example {d:.6}; identical 0; corner-to-corner {corners}"))
}

// ---- extraction ----

fn extraction() -> Outcome {
    let plans = round_trip_suite(4);
    let rendered: Vec<Vec<u8>> = plans.iter().map(render).collect();
    let started = Instant::now();
    let docs: Vec<Document> = rendered
        .iter()
        .map(|b| parse_document(b, "suite.pdf"))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let (mut words, mut worst) = (0usize, 0f64);
    for (i, (plan, doc)) in plans.iter().zip(&docs).enumerate() {
        let expected = expected_document(plan);
        ensure(doc.pages.len() == expected.len(), || format!("plan {i}: page count"))?;
        for (page, want) in doc.pages.iter().zip(&expected) {
            let got: Vec<&str> = page.words.iter().map(|w| w.text.as_str()).collect();
            let texts: Vec<&str> = want.iter().map(|w| w.text.as_str()).collect();
            ensure(got == texts, || format!("plan {i} page {}: words {got:?} vs {texts:?}", page.index))?;
            for (w, e) in page.words.iter().zip(want) {
                let b = [w.bbox.x0, w.bbox.y0, w.bbox.x1, w.bbox.y1];
                worst = (0..4).map(|k| (b[k] - e.bbox[k]).abs()).fold(worst, f64::max);
            }
            words += want.len();
        }
    }
    ensure(plans.len() >= 50, || format!("only {} PDFs", plans.len()))?;
    ensure(worst <= 0.5, || format!("box error up to {worst:.3}pt"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} PDFs, {words} words all recovered, max box error {worst:.3}pt, parsed in {elapsed:.2?}",
        plans.len()
    ))
}

// ---- span map ----

/// A document built straight from the generator's words, so span-map is
/// tested independently of extraction.
fn generated_document(plan: &PagePlan, tag: &str) -> Document {
    let words = &expected_document(&DocPlan {
        pages: vec![plan.clone()],
        options: Default::default(),
    })[0];
    let page = Page {
        index: 0,
        width: plan.width,
        height: plan.height,
        rotation: 0,
        words: words
            .iter()
            .enumerate()
            .map(|(i, w)| Word {
                text: w.text.clone(),
                bbox: BBox::new(w.bbox[0], w.bbox[1], w.bbox[2], w.bbox[3]),
                word_index: i,
            })
            .collect(),
    };
    Document::new(DocId::from_bytes(tag.as_bytes()), tag, vec![page])
}

/// Per-line unions of the selected words' boxes, as a browser reports them.
fn line_rects(words: &[Word]) -> Vec<BBox> {
    let mut rects: Vec<BBox> = Vec::new();
    for w in words {
        match rects.last_mut() {
            Some(r) if (r.y0 - w.bbox.y0).abs() < 0.01 && w.bbox.x0 >= r.x0 => *r = r.union(&w.bbox),
            _ => rects.push(w.bbox),
        }
    }
    rects
}

/// Every word range whose whitespace-free text contains the selection's
/// whitespace-free text, snapped outward to whole words.
fn occurrence_ranges(words: &[Word], selection: &str) -> BTreeSet<(usize, usize)> {
    let needle: Vec<char> = selection.chars().filter(|c| !c.is_whitespace()).collect();
    let mut hay = Vec::new();
    let mut owner = Vec::new();
    for (i, w) in words.iter().enumerate() {
        for c in w.text.chars() {
            hay.push(c);
            owner.push(i);
        }
    }
    (0..hay.len().saturating_sub(needle.len() - 1))
        .filter(|&p| hay[p..p + needle.len()] == needle[..])
        .map(|p| (owner[p], owner[p + needle.len() - 1]))
        .collect()
}

fn intersects(range: (usize, usize), words: &[Word], rects: &[BBox]) -> bool {
    words[range.0..=range.1].iter().any(|w| {
        rects
            .iter()
            .any(|r| r.x0.max(w.bbox.x0) < r.x1.min(w.bbox.x1) && r.y0.max(w.bbox.y0) < r.y1.min(w.bbox.y1))
    })
}

fn span_map() -> Outcome {
    const TRIALS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a4);
    let (mut identifiable, mut recovered, mut by_kind) = (0, 0, [0usize; 3]);
    let mut failures = Vec::new();
    let mut doc = generated_document(&random_page(&mut rng, VOCAB, 10), "p0");
    for trial in 0..TRIALS {
        if trial % 10 == 0 {
            let lines = rng.gen_range(2..=14);
            doc = generated_document(&random_page(&mut rng, VOCAB, lines), &format!("p{trial}"));
        }
        let words = &doc.pages[0].words;
        let s = rng.gen_range(0..words.len());
        let e = (s + rng.gen_range(0..6)).min(words.len() - 1);
        let picked: Vec<&str> = words[s..=e].iter().map(|w| w.text.as_str()).collect();
        let kind = rng.gen_range(0..3);
        let mut seps = vec![" "; picked.len().saturating_sub(1)];
        if !seps.is_empty() && kind > 0 {
            let k = rng.gen_range(0..seps.len());
            seps[k] = if kind == 1 { "" } else { "  " };
        }
        let mut text = picked[0].to_owned();
        for (sep, w) in seps.iter().zip(&picked[1..]) {
            text.push_str(sep);
            text.push_str(w);
        }
        let rects = if rng.gen_bool(0.7) { line_rects(&words[s..=e]) } else { vec![] };

        let ranges = occurrence_ranges(words, &text);
        let unique = ranges.len() == 1
            || (!rects.is_empty() && ranges.iter().filter(|r| intersects(**r, words, &rects)).count() == 1);
        if !unique {
            continue;
        }
        identifiable += 1;
        by_kind[kind] += 1;
        let sel = Selection {
            doc_id: doc.doc_id.clone(),
            page_index: 0,
            raw_text: text.clone(),
            rects,
        };
        match map_selection(&doc, &sel) {
            Ok(span) if (span.start_word, span.end_word) == (s, e) => recovered += 1,
            other => failures.push(format!("trial {trial}: {text:?} want {s}..={e}, got {other:?}")),
        }
    }
    ensure(failures.is_empty(), || format!("{}/{identifiable} wrong; first: {}", failures.len(), failures[0]))?;

    // ambiguous phrases disambiguated by a tight rectangle
    let mut fixtures = 0;
    let cost = parse_document(&render(&cost_twice()), "cost.pdf").map_err(|e| e.to_string())?;
    let mut cases: Vec<(Document, String, (usize, usize))> = Vec::new();
    for range in [(0, 1), (3, 4)] {
        cases.push((cost.clone(), "cost 5".into(), range));
    }
    for k in 0..40u64 {
        let mut r = ChaCha8Rng::seed_from_u64(9000 + k);
        let phrase: Vec<&str> = (0..r.gen_range(1..=3)).map(|_| VOCAB[r.gen_range(0..VOCAB.len())]).collect();
        let mut lines = Vec::new();
        let mut occurrences = Vec::new();
        let mut word_count = 0;
        for l in 0..r.gen_range(3..=8) {
            let mut ws: Vec<&str> = (0..r.gen_range(0..=3)).map(|_| ["alpha", "beta", "gamma", "delta"][r.gen_range(0..4)]).collect();
            if l % 2 == 0 {
                occurrences.push((word_count + ws.len(), word_count + ws.len() + phrase.len() - 1));
                ws.extend(&phrase);
            }
            ws.push("end");
            word_count += ws.len();
            lines.push(LinePlan::new(&ws, 72.0, 80.0 + 20.0 * l as f64, 11.0, Face::ALL[l % 4]));
        }
        let doc = generated_document(&PagePlan::letter(lines), &format!("amb{k}"));
        for &range in &occurrences {
            cases.push((doc.clone(), phrase.join(" "), range));
        }
    }
    for (doc, text, (s, e)) in &cases {
        let words = &doc.pages[0].words;
        let sel = Selection {
            doc_id: doc.doc_id.clone(),
            page_index: 0,
            raw_text: text.clone(),
            rects: line_rects(&words[*s..=*e]),
        };
        let got = map_selection(doc, &sel).map(|sp| (sp.start_word, sp.end_word));
        ensure(got == Ok((*s, *e)), || format!("ambiguous {text:?}: want {s}..={e}, got {got:?}"))?;
        fixtures += 1;
    }
    ensure(identifiable >= TRIALS / 2, || format!("only {identifiable} identifiable trials"))?;
    Ok(format!(
        "{recovered}/{identifiable} identifiable of {TRIALS} trials recovered (none/deleted/doubled: {:?}); {fixtures}/{fixtures} ambiguous tight-rect fixtures",
        by_kind
    ))
}

// ---- highlight ----

fn highlight_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x41);
    let (mut quads, mut worst) = (0usize, 0f64);
    for (i, plan) in round_trip_suite(2).iter().enumerate() {
        let rotations: Vec<u16> = (0..plan.pages.len()).map(|p| [0, 90, 180, 270][(i + p) % 4]).collect();
        let original = render_rotated(plan, &rotations);
        let doc = parse_document(&original, "h.pdf").map_err(|e| e.to_string())?;
        let mut spans = Vec::new();
        for (pi, page) in doc.pages.iter().enumerate().filter(|(_, p)| !p.words.is_empty()) {
            let map = TextMap::build(page);
            for _ in 0..rng.gen_range(1..=4) {
                let s = rng.gen_range(0..page.words.len());
                let e = (s + rng.gen_range(0..6)).min(page.words.len() - 1);
                spans.push(AnswerSpan::from_words(doc.doc_id.clone(), pi, &map, s, e).unwrap());
            }
        }
        let labels: Vec<String> = (0..spans.len()).map(|k| format!("question {k}")).collect();
        let plan = plan_for_spans(&doc, spans.iter().enumerate().map(|(k, s)| (k, labels[k].as_str(), s)));
        let out = emit_highlights(&original, &plan).map_err(|e| e.to_string())?;
        ensure(out.starts_with(&original), || format!("doc {i}: original bytes not preserved"))?;
        let found = read_highlights(&out).map_err(|e| e.to_string())?;
        let mut expected = plan.items.clone();
        expected.sort_by_key(|it| it.page_index);
        ensure(found.len() == expected.len(), || format!("doc {i}: {} of {} annotations", found.len(), expected.len()))?;
        for (want, got) in expected.iter().zip(&found) {
            ensure(got.color == Some(want.color), || format!("doc {i}: color {:?} vs {:?}", got.color, want.color))?;
            ensure(got.boxes.len() == want.boxes.len(), || format!("doc {i}: quad count"))?;
            for (a, b) in want.boxes.iter().zip(&got.boxes) {
                worst = [a.x0 - b.x0, a.y0 - b.y0, a.x1 - b.x1, a.y1 - b.y1].iter().fold(worst, |m, d| m.max(d.abs()));
                quads += 1;
            }
        }
    }
    let hex: Vec<String> = PALETTE.iter().map(|c| c.hex()).collect();
    ensure(hex == ["#CF5A5A", "#F1A05F", "#66979F", "#7FB56D"], || format!("palette {hex:?}"))?;
    // and the colors as read back from an emitted file
    let original = render(&software_sentence());
    let doc = parse_document(&original, "f.pdf").map_err(|e| e.to_string())?;
    let map = TextMap::build(&doc.pages[0]);
    let spans: Vec<AnswerSpan> = (0..4).map(|k| AnswerSpan::from_words(doc.doc_id.clone(), 0, &map, k, k).unwrap()).collect();
    let plan = plan_for_spans(&doc, spans.iter().enumerate().map(|(k, s)| (k, "q", s)));
    let found = read_highlights(&emit_highlights(&original, &plan).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let read: Vec<String> = found.iter().map(|f| f.color.map(|c| c.hex()).unwrap_or_default()).collect();
    ensure(read == hex, || format!("read back {read:?}"))?;
    ensure(worst <= 0.5, || format!("quad error up to {worst:.3}pt"))?;
    Ok(format!("{quads} quads within {worst:.3}pt on rotated pages; palette {}", read.join(" ")))
}

// ---- end to end ----

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path());
    let out = e2e::run(server.addr());
    drop(server);
    let correct = out.corr.iter().filter(|&&c| c == 1).count();
    let max_dist = out.dist_pct.iter().cloned().fold(0.0, f64::max);
    ensure(out.predictions == 16, || format!("{} predictions", out.predictions))?;
    ensure(correct == 16, || format!("Corr {correct}/16"))?;
    ensure(max_dist < 1.0, || format!("Dist up to {max_dist:.3}%"))?;
    ensure(out.highlight_colors.iter().all(|c| c == &["#CF5A5A", "#F1A05F", "#66979F", "#7FB56D"]), || {
        format!("highlight colors {:?}", out.highlight_colors)
    })?;
    ensure(out.elapsed < Duration::from_secs(60), || format!("took {:?}", out.elapsed))?;
    Ok(format!(
        "8 letters × 4 questions; 16/16 Corr on 4 held-out letters, max Dist {max_dist:.4}%, {:.2?}",
        out.elapsed
    ))
}

fn privacy() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let r = e2e::privacy_run(dir.path())?;
    ensure(r.outcome.predictions == 16, || "loop did not complete".into())?;
    ensure(r.clean(), || {
        format!(
            "{} TCP connects for {} client requests, {} UDP datagrams, {} proxy hits",
            r.tcp_active_opens, r.client_connections, r.udp_datagrams, r.proxy_hits
        )
    })?;
    let control = tempfile::tempdir().unwrap();
    let (opens, client) = e2e::control_run(control.path())?;
    ensure(opens > client, || "harness failed to notice a configured backend".into())?;
    Ok(format!(
        "{} outbound connections ({} TCP connects = {} client requests, 0 UDP, 0 proxy hits); control run detected {}",
        r.outbound(),
        r.tcp_active_opens,
        r.client_connections,
        opens - client
    ))
}

fn session_semantics() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let letter = Letter::generate(33);
    let pdf = render(&letter.plan);
    let summary = |addr, sid: &str| -> (u64, u64) {
        let list = get(addr, "/api/sessions").json();
        let s = list.as_array().unwrap().iter().find(|s| s["session_id"] == sid).unwrap().clone();
        (s["doc_count"].as_u64().unwrap(), s["record_count"].as_u64().unwrap())
    };
    let (a, b, migration, texts_b);
    {
        let server = start(dir.path());
        let addr = server.addr();
        a = new_session(addr, "alice");
        let doc_id = upload_pdf(addr, &a, "offer.pdf", &pdf)["doc_id"].as_str().unwrap().to_owned();
        for f in &letter.fields[..3] {
            let body = json!({"session_id": a, "question": f.question,
                "selection": {"doc_id": doc_id, "page": 0, "text": f.answer}});
            ensure(post_json(addr, "/api/annotations", &body).status == 201, || "annotation failed".into())?;
        }
        ensure(summary(addr, &a) == (1, 3), || "A should hold 3 records".into())?;
        b = new_session(addr, "alice");
        migration = upload(addr, &b, &[("offer.pdf", &pdf)]).json()["files"][0]["migration"].clone();
        texts_b = get(addr, &format!("/api/sessions/{b}/records")).json();
        server.stop().map_err(|e| e.to_string())?;
    }
    ensure(migration == json!({"outcome": "migrated", "from_session": a, "records": 3}), || {
        format!("migration {migration}")
    })?;
    let server = start(dir.path());
    let addr = server.addr();
    let (sa, sb) = (summary(addr, &a), summary(addr, &b));
    ensure(sa == (0, 0) && sb == (1, 3), || format!("after restart A={sa:?} B={sb:?}"))?;
    let after = get(addr, &format!("/api/sessions/{b}/records")).json();
    ensure(after == texts_b, || "B's records changed across restart".into())?;
    Ok("3 records moved A→B (A 3→0, B 0→3), identical after restart".into())
}

fn main() -> std::process::ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("gestalt oracle", gestalt_oracle),
        ("corr spot values", corr_spot_values),
        ("dist spot values", dist_spot_values),
        ("extraction round trip", extraction),
        ("span-map recovery", span_map),
        ("highlight round trip", highlight_round_trip),
        ("end-to-end via API", end_to_end),
        ("privacy", privacy),
        ("session semantics", session_semantics),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        eprintln!("failed: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
