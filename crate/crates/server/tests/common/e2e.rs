//! The full annotate → train → infer → eval loop over the HTTP API, with
//! gold answers taken from the letter generator (not from the parser).

use std::net::{SocketAddr, TcpListener};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use pdfqa_core::highlight::read_highlights;
use pdfqa_core::metrics::LabeledAnswer;
use pdfqa_core::BBox;
use pdfqa_fixtures::letters::{template_matched, Letter, QUESTIONS};
use pdfqa_fixtures::{expected_document, render};
use serde_json::{json, Value};

use super::*;

pub const TRAINING_LETTERS: u64 = 8;
pub const HELD_OUT: usize = 4;

pub struct E2eOutcome {
    pub predictions: usize,
    pub corr: Vec<u8>,
    pub dist_pct: Vec<f64>,
    pub highlight_colors: Vec<Vec<String>>,
    pub elapsed: Duration,
}

/// Gold answer for one field: character offsets in the single-space joined
/// page text and the union of the generator's word boxes.
fn gold(letter: &Letter, field: usize) -> LabeledAnswer {
    let words = &expected_document(&letter.plan)[0];
    let f = &letter.fields[field];
    let char_start: usize = words[..f.start_word].iter().map(|w| w.text.chars().count() + 1).sum();
    let boxes: Vec<BBox> = words[f.start_word..=f.end_word]
        .iter()
        .map(|w| BBox::new(w.bbox[0], w.bbox[1], w.bbox[2], w.bbox[3]))
        .collect();
    LabeledAnswer {
        text: f.answer.clone(),
        char_start,
        char_end: char_start + f.answer.chars().count(),
        union_box: BBox::union_all(&boxes).unwrap(),
        page_size: (612.0, 792.0),
        page_index: Some(0),
    }
}

fn selection(letter: &Letter, doc_id: &str, field: usize) -> Value {
    let words = &expected_document(&letter.plan)[0];
    let f = &letter.fields[field];
    let rects: Vec<[f64; 4]> = words[f.start_word..=f.end_word].iter().map(|w| w.bbox).collect();
    json!({"doc_id": doc_id, "page": 0, "text": f.answer, "rects": rects})
}

pub fn run(addr: SocketAddr) -> E2eOutcome {
    let started = Instant::now();
    let training: Vec<Letter> = (1..=TRAINING_LETTERS).map(Letter::generate).collect();

    let sid = new_session(addr, "reviewer");
    for (i, letter) in training.iter().enumerate() {
        let entry = upload_pdf(addr, &sid, &format!("offer-{i}.pdf"), &render(&letter.plan));
        let doc_id = entry["doc_id"].as_str().unwrap();
        for (k, f) in letter.fields.iter().enumerate() {
            let body = json!({"session_id": sid, "question": f.question, "selection": selection(letter, doc_id, k)});
            let r = post_json(addr, "/api/annotations", &body);
            assert_eq!(r.status, 201, "{}", String::from_utf8_lossy(&r.body));
        }
    }

    let r = post_json(addr, "/api/train", &json!({"session_ids": [sid], "label": "offer letters"}));
    assert_eq!(r.status, 202, "{}", String::from_utf8_lossy(&r.body));
    let model = wait_ready(addr, r.json()["model_id"].as_str().unwrap());
    assert_eq!(model["status"], "ready", "{model}");

    let held_out: Vec<Letter> = template_matched(&training, 1000, HELD_OUT).into_iter().map(|(_, l)| l).collect();
    let infer_sid = new_session(addr, "reviewer");
    let doc_ids: Vec<String> = held_out
        .iter()
        .enumerate()
        .map(|(i, l)| upload_pdf(addr, &infer_sid, &format!("new-{i}.pdf"), &render(&l.plan))["doc_id"].as_str().unwrap().to_owned())
        .collect();
    let r = post_json(
        addr,
        "/api/infer",
        &json!({"model_id": model["model_id"], "doc_ids": doc_ids, "questions": QUESTIONS}),
    );
    assert_eq!(r.status, 200, "{}", String::from_utf8_lossy(&r.body));
    let out = r.json();
    let preds = out["predictions"].as_array().unwrap();

    let mut highlight_colors = Vec::new();
    for h in out["highlighted"].as_array().unwrap() {
        let pdf = get(addr, h["download_url"].as_str().unwrap());
        assert_eq!(pdf.status, 200);
        highlight_colors.push(read_highlights(&pdf.body).unwrap().iter().map(|f| f.color.unwrap().hex()).collect());
    }

    // predictions come document by document, questions in order
    let pairs: Vec<Value> = preds
        .iter()
        .enumerate()
        .map(|(i, p)| json!({"prediction": p, "gold": gold(&held_out[i / QUESTIONS.len()], i % QUESTIONS.len())}))
        .collect();
    let r = post_json(addr, "/api/eval", &json!({"pairs": pairs}));
    assert_eq!(r.status, 200);
    let report = r.json();
    let per_q = report["per_question"].as_array().unwrap();
    E2eOutcome {
        predictions: preds.len(),
        corr: per_q.iter().map(|m| m["corr"].as_u64().unwrap() as u8).collect(),
        dist_pct: per_q.iter().map(|m| m["dist_pct"].as_f64().unwrap()).collect(),
        highlight_colors,
        elapsed: started.elapsed(),
    }
}

/// Namespace-wide socket counters from procfs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetCounters {
    /// TCP connects attempted (IPv4 and IPv6 share this counter).
    pub tcp_active_opens: u64,
    pub udp_out: u64,
    pub udp6_out: u64,
}

fn snmp_field(text: &str, table: &str, field: &str) -> Option<u64> {
    let mut rows = text.lines().filter(|l| l.starts_with(&format!("{table}:")));
    let header: Vec<&str> = rows.next()?.split_whitespace().collect();
    let values: Vec<&str> = rows.next()?.split_whitespace().collect();
    values.get(header.iter().position(|h| *h == field)?)?.parse().ok()
}

impl NetCounters {
    pub fn read() -> Result<Self, String> {
        let snmp = std::fs::read_to_string("/proc/net/snmp").map_err(|e| format!("/proc/net/snmp: {e}"))?;
        let snmp6 = std::fs::read_to_string("/proc/net/snmp6").unwrap_or_default();
        let udp6_out = snmp6
            .lines()
            .find_map(|l| l.strip_prefix("Udp6OutDatagrams"))
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0);
        Ok(NetCounters {
            tcp_active_opens: snmp_field(&snmp, "Tcp", "ActiveOpens").ok_or("no Tcp ActiveOpens")?,
            udp_out: snmp_field(&snmp, "Udp", "OutDatagrams").ok_or("no Udp OutDatagrams")?,
            udp6_out,
        })
    }
}

/// A listener the proxy environment variables point at; any client that
/// honours them would show up here.
pub struct Tripwire {
    pub hits: Arc<AtomicUsize>,
    pub addr: SocketAddr,
}

impl Tripwire {
    pub fn install() -> Tripwire {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        std::thread::spawn(move || {
            for s in listener.incoming() {
                counter.fetch_add(1, Ordering::SeqCst);
                drop(s);
            }
        });
        for var in ["HTTP_PROXY", "HTTPS_PROXY", "ALL_PROXY", "http_proxy", "https_proxy", "all_proxy"] {
            std::env::set_var(var, format!("http://{addr}"));
        }
        std::env::remove_var("NO_PROXY");
        std::env::remove_var("no_proxy");
        Tripwire { hits, addr }
    }
}

pub struct PrivacyReport {
    pub outcome: E2eOutcome,
    pub client_connections: u64,
    pub tcp_active_opens: u64,
    pub udp_datagrams: u64,
    pub proxy_hits: usize,
}

impl PrivacyReport {
    /// Connections the server made on its own: every TCP connect in the
    /// namespace beyond the test client's, plus any UDP (DNS) traffic.
    pub fn outbound(&self) -> u64 {
        self.tcp_active_opens.saturating_sub(self.client_connections) + self.udp_datagrams
    }

    pub fn clean(&self) -> bool {
        self.tcp_active_opens == self.client_connections && self.udp_datagrams == 0 && self.proxy_hits == 0
    }
}

/// Starts a server with no external backends and runs the whole loop while
/// watching the namespace's connection counters.
pub fn privacy_run(data_dir: &std::path::Path) -> Result<PrivacyReport, String> {
    let tripwire = Tripwire::install();
    let server = start(data_dir);
    let addr = server.addr();
    let before = NetCounters::read()?;
    let conns_before = CONNECTIONS.load(Ordering::SeqCst);
    let outcome = run(addr);
    let conns = (CONNECTIONS.load(Ordering::SeqCst) - conns_before) as u64;
    let after = NetCounters::read()?;
    server.stop().map_err(|e| e.to_string())?;
    Ok(PrivacyReport {
        outcome,
        client_connections: conns,
        tcp_active_opens: after.tcp_active_opens - before.tcp_active_opens,
        udp_datagrams: (after.udp_out - before.udp_out) + (after.udp6_out - before.udp6_out),
        proxy_hits: tripwire.hits.load(Ordering::SeqCst),
    })
}

/// Negative control: a server configured with an external backend, asked to
/// train on it. Returns (namespace TCP connects, client connects); the
/// backend probe must make the first exceed the second.
pub fn control_run(data_dir: &std::path::Path) -> Result<(u64, u64), String> {
    let worker = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}", worker.local_addr().unwrap());
    std::thread::spawn(move || {
        for s in worker.incoming() {
            drop(s);
        }
    });
    let mut cfg = config(data_dir);
    cfg.external_backends = vec![pdfqa_core::qa::BackendDescriptor::external("remote", endpoint, true)];
    let server = pdfqa_server::Server::spawn(cfg).map_err(|e| e.to_string())?;
    let addr = server.addr();
    let letter = Letter::generate(1);
    let sid = new_session(addr, "control");
    let doc_id = upload_pdf(addr, &sid, "c.pdf", &render(&letter.plan))["doc_id"].as_str().unwrap().to_owned();
    let body = json!({"session_id": sid, "question": QUESTIONS[0], "selection": selection(&letter, &doc_id, 0)});
    assert_eq!(post_json(addr, "/api/annotations", &body).status, 201);

    let before = NetCounters::read()?;
    let conns_before = CONNECTIONS.load(Ordering::SeqCst);
    post_json(addr, "/api/train", &json!({"session_ids": [sid], "backend_id": "remote"}));
    let conns = (CONNECTIONS.load(Ordering::SeqCst) - conns_before) as u64;
    let after = NetCounters::read()?;
    drop(server);
    Ok((after.tcp_active_opens - before.tcp_active_opens, conns))
}
