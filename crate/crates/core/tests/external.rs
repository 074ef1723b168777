//! The external backend wire contract, exercised against an in-process mock
//! worker speaking plain HTTP/1.1.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use pdfqa_core::dataset::export_training_set;
use pdfqa_core::qa::{BackendDescriptor, QaError, QaService};
use pdfqa_core::store::Store;
use pdfqa_core::{parse_document, AnswerSpan, ModelStatus, TextMap};
use pdfqa_fixtures::letters::{Letter, QUESTIONS};
use pdfqa_fixtures::render;
use serde_json::{json, Value};

#[derive(Clone, Copy)]
enum Behavior {
    /// Answers with the first words of the context, reporting an offset.
    Echo { words: usize, confidence: f64 },
    /// Answers with text that does not occur on the page.
    Invent,
    /// Training fails with a message.
    FailTraining,
}

#[derive(Default)]
struct Seen {
    requests: Vec<(String, String, Value)>,
}

fn mock_worker(behavior: Behavior) -> (String, Arc<Mutex<Seen>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Seen::default()));
    let log = seen.clone();
    thread::spawn(move || {
        let mut polls = 0;
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            if reader.read_line(&mut line).unwrap_or(0) == 0 {
                continue; // a reachability probe
            }
            let mut parts = line.split_whitespace();
            let (method, path) = (parts.next().unwrap().to_owned(), parts.next().unwrap().to_owned());
            let mut len = 0;
            loop {
                let mut h = String::new();
                reader.read_line(&mut h).unwrap();
                if h.trim().is_empty() {
                    break;
                }
                if let Some(v) = h.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let body: Value = if len > 0 { serde_json::from_slice(&body).unwrap() } else { Value::Null };
            log.lock().unwrap().requests.push((method.clone(), path.clone(), body.clone()));

            let reply = match (method.as_str(), path.as_str(), behavior) {
                ("POST", "/train", _) => json!({"model_token": "tok-1"}),
                ("GET", p, Behavior::FailTraining) if p.starts_with("/status/") => {
                    json!({"status": "failed", "message": "out of memory"})
                }
                ("GET", p, _) if p.starts_with("/status/") => {
                    polls += 1;
                    json!({"status": if polls < 3 { "training" } else { "ready" }})
                }
                ("POST", "/infer", Behavior::Echo { words, confidence }) => {
                    let ctx = body["context"].as_str().unwrap();
                    let answer: Vec<&str> = ctx.split(' ').take(words).collect();
                    json!({"answer": answer.join(" "), "char_start": 0, "confidence": confidence})
                }
                ("POST", "/infer", _) => json!({"answer": "zebra crossing", "char_start": 3, "confidence": 0.9}),
                _ => Value::Null,
            };
            let text = reply.to_string();
            let _ = write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                text.len(),
                text
            );
        }
    });
    (format!("http://{addr}"), seen)
}

fn setup(behavior: Behavior) -> (Arc<Store>, QaService, Arc<Mutex<Seen>>, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(dir.path()).unwrap());
    let (endpoint, seen) = mock_worker(behavior);
    let ext = BackendDescriptor::external("worker", endpoint, true);
    let qa = QaService::new(store.clone(), &[ext]).unwrap();
    (store, qa, seen, dir)
}

fn train(store: &Store, qa: &QaService) -> String {
    let letter = Letter::generate(1);
    let doc = parse_document(&render(&letter.plan), "l.pdf").unwrap();
    let s = store.open_session("u").unwrap();
    store.register_document(&s.session_id, &doc).unwrap();
    let f = &letter.fields[0];
    let span = AnswerSpan::from_words(doc.doc_id.clone(), 0, &TextMap::build(&doc.pages[0]), f.start_word, f.end_word).unwrap();
    store.save_annotation(&s.session_id, f.question, &span).unwrap();
    let set = export_training_set(&store.records(&s.session_id).unwrap(), vec![], |id| store.document(id).unwrap()).unwrap();
    let m = qa.train("worker", set, "my model").unwrap();
    assert_eq!(m.status, ModelStatus::Training);
    m.model_id
}

fn held_out() -> pdfqa_core::Document {
    parse_document(&render(&Letter::generate(2).plan), "h.pdf").unwrap()
}

#[test]
fn train_poll_and_infer_follow_the_wire_contract() {
    let (store, qa, seen, _dir) = setup(Behavior::Echo { words: 3, confidence: 1.5 });
    let id = train(&store, &qa);
    let m = qa.wait(&id, Duration::from_secs(10)).unwrap();
    assert_eq!(m.status, ModelStatus::Ready);

    let doc = held_out();
    let preds = qa.infer(&id, &doc, &[QUESTIONS[0].to_string()]).unwrap();
    let p = &preds[0];
    assert_eq!(p.word_span, (0, 2));
    assert_eq!(p.confidence, 1.0, "confidence is clamped");
    let map = TextMap::build(&doc.pages[0]);
    assert_eq!(map.slice(p.char_start, p.char_end), Some(p.answer_text.as_str()));

    let seen = seen.lock().unwrap();
    let (_, _, train_body) = seen.requests.iter().find(|r| r.1 == "/train").unwrap();
    assert_eq!(train_body["model_label"], "my model");
    assert_eq!(train_body["version"], 1);
    assert_eq!(train_body["examples"][0]["question"], QUESTIONS[0]);
    assert!(seen.requests.iter().filter(|r| r.1 == "/status/tok-1").count() >= 3);
    let (_, _, infer_body) = seen.requests.iter().find(|r| r.1 == "/infer").unwrap();
    assert_eq!(infer_body["model_token"], "tok-1");
    assert_eq!(infer_body["question"], QUESTIONS[0]);
    assert_eq!(infer_body["context"], map.page_text());
    let words = infer_body["words"].as_array().unwrap();
    assert_eq!(words.len(), map.word_count());
    assert!(words[0]["box"].as_array().unwrap().iter().all(|v| v.as_i64().is_some_and(|v| (0..=1000).contains(&v))));
}

#[test]
fn unanchorable_answers_are_protocol_violations() {
    let (store, qa, _seen, _dir) = setup(Behavior::Invent);
    let id = train(&store, &qa);
    qa.wait(&id, Duration::from_secs(10)).unwrap();
    assert!(matches!(
        qa.infer(&id, &held_out(), &[QUESTIONS[0].to_string()]),
        Err(QaError::BackendProtocolViolation(_))
    ));
}

#[test]
fn failed_training_exposes_the_message() {
    let (store, qa, _seen, _dir) = setup(Behavior::FailTraining);
    let id = train(&store, &qa);
    let m = qa.wait(&id, Duration::from_secs(10)).unwrap();
    assert_eq!(m.status, ModelStatus::Failed);
    assert!(m.message.unwrap().contains("out of memory"));
    assert!(matches!(
        qa.infer(&id, &held_out(), &[QUESTIONS[0].to_string()]),
        Err(QaError::ModelNotReady(_))
    ));
}
