use lopdf::Object;
use pdfqa_core::highlight::{
    boxes_for_span, emit_highlights, palette_color, plan_for_spans, read_highlights, HighlightError, HighlightItem,
    HighlightPlan, Rgb,
};
use pdfqa_core::{parse_document, AnswerSpan, BBox, DocId, Document, TextMap};
use pdfqa_fixtures::corpus::round_trip_suite;
use pdfqa_fixtures::special::{software_sentence, hello_world};
use pdfqa_fixtures::{render, render_rotated};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn item(page_index: usize, boxes: Vec<BBox>, ordinal: usize) -> HighlightItem {
    HighlightItem {
        page_index,
        boxes,
        color: palette_color(ordinal),
        label: format!("Q{ordinal}"),
    }
}

/// Highlight annotations as raw numbers, straight from the object layer.
fn raw_annots(bytes: &[u8], page: usize) -> Vec<lopdf::Dictionary> {
    let file = lopdf::Document::load_mem(bytes).unwrap();
    let page_id = file.get_pages()[&(page as u32 + 1)];
    let Ok(annots) = file.get_dictionary(page_id).unwrap().get(b"Annots") else {
        return vec![];
    };
    let annots = file.dereference(annots).unwrap().1.as_array().unwrap().clone();
    annots
        .iter()
        .map(|a| file.dereference(a).unwrap().1.as_dict().unwrap().clone())
        .collect()
}

fn floats(d: &lopdf::Dictionary, key: &[u8]) -> Vec<f64> {
    d.get(key)
        .unwrap()
        .as_array()
        .unwrap()
        .iter()
        .map(|o| match o {
            Object::Real(r) => *r as f64,
            Object::Integer(i) => *i as f64,
            _ => panic!("not a number"),
        })
        .collect()
}

#[test]
fn single_box_becomes_a_bottom_left_quad() {
    let original = render(&hello_world());
    let doc = parse_document(&original, "h.pdf").unwrap();
    let plan = HighlightPlan {
        doc_id: doc.doc_id.clone(),
        items: vec![item(0, vec![BBox::new(72.0, 62.0, 130.0, 74.0)], 0)],
    };
    let out = emit_highlights(&original, &plan).unwrap();
    assert!(out.starts_with(&original), "original bytes are kept verbatim");
    let annots = raw_annots(&out, 0);
    assert_eq!(annots.len(), 1);
    let a = &annots[0];
    assert_eq!(a.get(b"Subtype").unwrap().as_name().unwrap(), b"Highlight");
    // (72, 792-74, 130, 792-62) as upper-left, upper-right, lower-left, lower-right
    assert_eq!(floats(a, b"QuadPoints"), [72.0, 730.0, 130.0, 730.0, 72.0, 718.0, 130.0, 718.0]);
    assert_eq!(floats(a, b"Rect"), [72.0, 718.0, 130.0, 730.0]);
    assert_eq!(lopdf::decode_text_string(a.get(b"Contents").unwrap()).unwrap(), "Q0");
    let ca = floats(a, b"C");
    assert_eq!(ca.iter().map(|c| (c * 255.0).round() as u8).collect::<Vec<_>>(), [0xCF, 0x5A, 0x5A]);
    assert!((a.get(b"CA").unwrap().as_float().unwrap() - 0.4).abs() < 1e-6);

    // the emitted file still parses to the same words and id-relevant content
    let again = parse_document(&out, "h2.pdf").unwrap();
    assert_eq!(again.pages, doc.pages);
    assert_eq!(DocId::from_bytes(&original), doc.doc_id);
}

#[test]
fn empty_plan_adds_nothing() {
    let original = render(&hello_world());
    let doc = parse_document(&original, "h.pdf").unwrap();
    let out = emit_highlights(&original, &HighlightPlan { doc_id: doc.doc_id.clone(), items: vec![] }).unwrap();
    assert!(read_highlights(&out).unwrap().is_empty());
    assert_eq!(parse_document(&out, "x").unwrap().pages, doc.pages);
}

#[test]
fn four_questions_get_palette_colors_in_order() {
    let original = render(&software_sentence());
    let doc = parse_document(&original, "f.pdf").unwrap();
    let w = &doc.pages[0].words;
    let items = (0..4).map(|i| item(0, vec![w[i].bbox], i)).collect();
    let out = emit_highlights(&original, &HighlightPlan { doc_id: doc.doc_id.clone(), items }).unwrap();
    let found = read_highlights(&out).unwrap();
    let colors: Vec<String> = found.iter().map(|f| f.color.unwrap().hex()).collect();
    assert_eq!(colors, ["#CF5A5A", "#F1A05F", "#66979F", "#7FB56D"]);
    let labels: Vec<&str> = found.iter().map(|f| f.label.as_str()).collect();
    assert_eq!(labels, ["Q0", "Q1", "Q2", "Q3"]);

    // highlighting the highlighted copy appends to the existing /Annots
    let more = HighlightPlan {
        doc_id: doc.doc_id.clone(),
        items: vec![item(0, vec![w[5].bbox], 4)],
    };
    let twice = emit_highlights(&out, &more).unwrap();
    assert_eq!(read_highlights(&twice).unwrap().len(), 5);
}

#[test]
fn errors() {
    let original = render(&hello_world());
    let doc_id = DocId::from_bytes(&original);
    let plan = HighlightPlan {
        doc_id: doc_id.clone(),
        items: vec![item(3, vec![BBox::new(1.0, 1.0, 2.0, 2.0)], 0)],
    };
    assert_eq!(emit_highlights(&original, &plan), Err(HighlightError::PageOutOfRange(3)));
    assert_eq!(emit_highlights(b"hello", &plan), Err(HighlightError::NotAPdf));
    let outside = HighlightPlan {
        doc_id,
        items: vec![item(0, vec![BBox::new(600.0, 10.0, 700.0, 20.0)], 0)],
    };
    assert!(matches!(emit_highlights(&original, &outside), Err(HighlightError::BoxOutOfBounds(..))));
}

fn span(doc: &Document, page: usize, start: usize, end: usize) -> AnswerSpan {
    AnswerSpan::from_words(doc.doc_id.clone(), page, &TextMap::build(&doc.pages[page]), start, end).unwrap()
}

#[test]
fn per_line_union_boxes() {
    let doc = parse_document(&render(&software_sentence()), "f.pdf").unwrap();
    let words = &doc.pages[0].words;
    assert_eq!(boxes_for_span(&doc, &span(&doc, 0, 2, 2)), [words[2].bbox]);
    let one_line = boxes_for_span(&doc, &span(&doc, 0, 1, 3));
    assert_eq!(one_line, [BBox::new(words[1].bbox.x0, words[1].bbox.y0, words[3].bbox.x1, words[3].bbox.y1)]);

    // a span that wraps from the end of one line onto the next
    let letter = pdfqa_fixtures::letters::Letter::generate(5);
    let ldoc = parse_document(&render(&letter.plan), "l.pdf").unwrap();
    let lw = &ldoc.pages[0].words;
    let wrap = (0..lw.len() - 1)
        .find(|&i| lw[i + 1].bbox.y0 > lw[i].bbox.y1 && lw[i + 1].bbox.x0 < lw[i].bbox.x0)
        .unwrap();
    let boxes = boxes_for_span(&ldoc, &span(&ldoc, 0, wrap - 1, wrap + 1));
    assert_eq!(boxes.len(), 2);
    assert_eq!(boxes[0], lw[wrap - 1].bbox.union(&lw[wrap].bbox));
    assert_eq!(boxes[1], lw[wrap + 1].bbox);
}

fn close(a: &BBox, b: &BBox) -> bool {
    [a.x0 - b.x0, a.y0 - b.y0, a.x1 - b.x1, a.y1 - b.y1].iter().all(|d| d.abs() <= 0.5)
}

#[test]
fn round_trip_over_the_fixture_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for (i, plan) in round_trip_suite(4).iter().enumerate() {
        let rotations: Vec<u16> = (0..plan.pages.len()).map(|p| [0, 90, 180, 270][(i + p) % 4]).collect();
        let original = render_rotated(plan, &rotations);
        let doc = parse_document(&original, "s.pdf").unwrap();
        let mut spans = Vec::new();
        for (pi, page) in doc.pages.iter().enumerate() {
            if page.words.is_empty() {
                continue;
            }
            for _ in 0..rng.gen_range(1..=4) {
                let s = rng.gen_range(0..page.words.len());
                let e = (s + rng.gen_range(0..6)).min(page.words.len() - 1);
                spans.push(span(&doc, pi, s, e));
            }
        }
        let labels: Vec<String> = (0..spans.len()).map(|k| format!("question {k}")).collect();
        let hp = plan_for_spans(&doc, spans.iter().enumerate().map(|(k, s)| (k, labels[k].as_str(), s)));
        let out = emit_highlights(&original, &hp).unwrap();
        assert!(out.starts_with(&original));
        let found = read_highlights(&out).unwrap();
        assert_eq!(found.len(), hp.items.len());
        // read back page by page; items on a page keep their order
        let mut expected = hp.items.clone();
        expected.sort_by_key(|it| it.page_index);
        for (want, got) in expected.iter().zip(&found) {
            assert_eq!(want.page_index, got.page_index);
            assert_eq!(Some(want.color), got.color);
            assert_eq!(want.label, got.label);
            assert_eq!(want.boxes.len(), got.boxes.len());
            for (a, b) in want.boxes.iter().zip(&got.boxes) {
                assert!(close(a, b), "plan {i}: {a:?} vs {b:?}");
            }
            checked += 1;
        }
        assert_eq!(parse_document(&out, "o").unwrap().pages, doc.pages);
    }
    assert!(checked > 100);
    assert_eq!(palette_color(7), Rgb(0x7F, 0xB5, 0x6D));
}
