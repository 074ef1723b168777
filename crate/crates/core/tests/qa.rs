use std::sync::Arc;
use std::time::Duration;

use pdfqa_core::dataset::export_training_set;
use pdfqa_core::metrics::{box_distance, correctness, LabeledAnswer};
use pdfqa_core::qa::{BackendDescriptor, QaError, QaService, BUILTIN_BACKEND};
use pdfqa_core::store::Store;
use pdfqa_core::{parse_document, AnswerSpan, BBox, Document, ModelStatus, TextMap, TrainingSet};
use pdfqa_fixtures::letters::{template_matched, Letter, QUESTIONS};
use pdfqa_fixtures::render;

fn letter_doc(seed: u64) -> (Document, Letter) {
    let letter = Letter::generate(seed);
    (parse_document(&render(&letter.plan), &format!("l{seed}.pdf")).unwrap(), letter)
}

fn training_set(store: &Store, seeds: impl IntoIterator<Item = u64>) -> TrainingSet {
    let s = store.open_session("trainer").unwrap();
    for seed in seeds {
        let (doc, letter) = letter_doc(seed);
        store.register_document(&s.session_id, &doc).unwrap();
        let map = TextMap::build(&doc.pages[0]);
        for f in &letter.fields {
            let span = AnswerSpan::from_words(doc.doc_id.clone(), 0, &map, f.start_word, f.end_word).unwrap();
            store.save_annotation(&s.session_id, f.question, &span).unwrap();
        }
    }
    let records = store.records(&s.session_id).unwrap();
    export_training_set(&records, vec![s.session_id], |id| store.document(id).unwrap()).unwrap()
}

fn gold(doc: &Document, start: usize, end: usize) -> LabeledAnswer {
    let map = TextMap::build(&doc.pages[0]);
    let (cs, ce) = map.span_range(start, end).unwrap();
    LabeledAnswer {
        text: map.slice(cs, ce).unwrap().to_owned(),
        char_start: cs,
        char_end: ce,
        union_box: BBox::union_all(&doc.pages[0].words[start..=end].iter().map(|w| w.bbox).collect::<Vec<_>>()).unwrap(),
        page_size: (doc.pages[0].width, doc.pages[0].height),
        page_index: Some(0),
    }
}

fn service(dir: &std::path::Path) -> (Arc<Store>, QaService) {
    let store = Arc::new(Store::open(dir).unwrap());
    let qa = QaService::new(store.clone(), &[]).unwrap();
    (store, qa)
}

#[test]
fn builtin_train_and_infer_on_held_out_letters() {
    let dir = tempfile::tempdir().unwrap();
    let (store, qa) = service(dir.path());
    let set = training_set(&store, 1..=8);
    let model = qa.train(BUILTIN_BACKEND, set, "letters").unwrap();
    assert_eq!(model.status, ModelStatus::Training);
    let model = qa.wait(&model.model_id, Duration::from_secs(5)).unwrap();
    assert_eq!(model.status, ModelStatus::Ready);

    let questions: Vec<String> = QUESTIONS.iter().map(|q| q.to_string()).collect();
    let training: Vec<Letter> = (1..=8).map(Letter::generate).collect();
    for (seed, letter) in template_matched(&training, 101, 4) {
        let doc = parse_document(&render(&letter.plan), "held-out.pdf").unwrap();
        let preds = qa.infer(&model.model_id, &doc, &questions).unwrap();
        assert_eq!(preds.len(), 4);
        for (p, f) in preds.iter().zip(&letter.fields) {
            let g = gold(&doc, f.start_word, f.end_word);
            let l = LabeledAnswer::from_prediction(p, g.page_size);
            assert_eq!(correctness(&l, &g), 1, "seed {seed}: {:?} vs {:?}", p.answer_text, f.answer);
            assert!(box_distance(&l, &g) < 1.0, "seed {seed}: {:?} vs {:?}", p.answer_text, f.answer);
            assert!((0.0..=1.0).contains(&p.confidence));
            assert_eq!(p.boxes.len(), p.word_span.1 - p.word_span.0 + 1);
        }
    }
}

#[test]
fn train_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (store, qa) = service(dir.path());
    let empty = TrainingSet::new(vec![], vec![]);
    assert_eq!(qa.train(BUILTIN_BACKEND, empty.clone(), "x"), Err(QaError::EmptyTrainingSet));
    assert!(matches!(qa.train("nope", empty, "x"), Err(QaError::UnknownBackend(_))));
    assert!(matches!(qa.job_status("nope"), Err(QaError::UnknownModel(_))));
    let set = training_set(&store, [1]);
    let (doc, _) = letter_doc(2);
    // a model still training refuses to answer
    let m = pdfqa_core::ModelRef {
        model_id: "pending".into(),
        backend_id: BUILTIN_BACKEND.into(),
        trained_on: set.set_id.clone(),
        created_at: chrono::Utc::now(),
        status: ModelStatus::Training,
        label: "p".into(),
        message: None,
    };
    store.insert_model(&m).unwrap();
    assert!(matches!(
        qa.infer("pending", &doc, &["q".into()]),
        Err(QaError::ModelNotReady(_))
    ));
}

#[test]
fn offline_external_backend_is_unavailable_at_submission() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(dir.path()).unwrap());
    // bind then drop to find a port nobody listens on
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let ext = BackendDescriptor::external("worker", format!("http://127.0.0.1:{port}"), true);
    let qa = QaService::new(store.clone(), &[ext]).unwrap();
    let set = training_set(&store, [1]);
    assert!(matches!(qa.train("worker", set, "x"), Err(QaError::BackendUnavailable(_))));
    assert!(store.models().unwrap().is_empty());
}

#[test]
fn multi_page_documents_pick_the_most_confident_page() {
    use pdfqa_fixtures::{DocPlan, Face, LinePlan, PagePlan, RenderOptions};
    let dir = tempfile::tempdir().unwrap();
    let (store, qa) = service(dir.path());
    let set = training_set(&store, 1..=2);
    let m = qa.train(BUILTIN_BACKEND, set, "x").unwrap();
    qa.wait(&m.model_id, Duration::from_secs(5)).unwrap();
    let (_, l1) = letter_doc(1);
    let page = |words: &[&str]| PagePlan::letter(vec![LinePlan::new(words, 72.0, 100.0, 11.0, Face::Helvetica)]);
    let title: Vec<&str> = l1.fields[0].answer.split(' ').collect();
    let mut with_title = vec!["Position:"];
    with_title.extend(&title);
    let plan = DocPlan {
        pages: vec![page(&["nothing", "useful", "here"]), page(&with_title), page(&with_title)],
        options: RenderOptions::default(),
    };
    let doc = parse_document(&render(&plan), "multi.pdf").unwrap();
    let p = &qa.infer(&m.model_id, &doc, &[QUESTIONS[0].to_string()]).unwrap()[0];
    assert_eq!(p.page_index, 1);
    assert_eq!(p.answer_text, l1.fields[0].answer);
    assert_eq!(p.confidence, 1.0);

    let blank = DocPlan {
        pages: vec![PagePlan::letter(vec![])],
        options: RenderOptions::default(),
    };
    let doc = parse_document(&render(&blank), "blank.pdf").unwrap();
    assert!(matches!(
        qa.infer(&m.model_id, &doc, &[QUESTIONS[0].to_string()]),
        Err(QaError::EmptyDocument(_))
    ));
}
