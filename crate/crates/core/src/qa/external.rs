//! HTTP client for out-of-process backends.
//!
//! ```text
//! POST {endpoint}/train        TrainingSet + {"model_label"}  -> {"model_token"}
//! GET  {endpoint}/status/{tok}                                -> {"status", "message"?}
//! POST {endpoint}/infer        {"model_token","question","context","words"}
//!                                                             -> {"answer","char_start","confidence"}
//! ```

use std::net::{SocketAddr, TcpStream, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::QaError;
use crate::dataset::{normalize_box, TrainingSet, WordBox};
use crate::document::{Page, TextMap};
use crate::spanmap::{find_candidates, Selection};

pub const INFER_TIMEOUT: Duration = Duration::from_secs(60);
const CONNECT_TIMEOUT: Duration = Duration::from_secs(2);
const REQUEST_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Serialize)]
struct TrainRequest<'a> {
    #[serde(flatten)]
    set: &'a TrainingSet,
    model_label: &'a str,
}

#[derive(Deserialize)]
struct TrainResponse {
    model_token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusResponse {
    pub status: String,
    #[serde(default)]
    pub message: Option<String>,
}

#[derive(Serialize)]
struct InferRequest<'a> {
    model_token: &'a str,
    question: &'a str,
    context: &'a str,
    words: Vec<WordBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferResponse {
    pub answer: String,
    pub char_start: usize,
    pub confidence: f64,
}

#[derive(Debug, Clone)]
pub struct ExternalClient {
    endpoint: String,
    poll_interval: Duration,
}

/// `host:port` of an `http://` endpoint.
fn authority(endpoint: &str) -> Result<SocketAddr, QaError> {
    let unavailable = |why: &str| QaError::BackendUnavailable(format!("{endpoint}: {why}"));
    let rest = endpoint.strip_prefix("http://").ok_or_else(|| unavailable("only http:// endpoints are supported"))?;
    let host = rest.split('/').next().unwrap_or_default();
    let host = if host.contains(':') { host.to_owned() } else { format!("{host}:80") };
    host.to_socket_addrs()
        .map_err(|e| unavailable(&e.to_string()))?
        .next()
        .ok_or_else(|| unavailable("host did not resolve"))
}

fn transport(e: ureq::Error) -> QaError {
    match e {
        ureq::Error::Status(code, resp) => {
            let body = resp.into_string().unwrap_or_default();
            QaError::BackendFailure(format!("HTTP {code}: {}", body.chars().take(200).collect::<String>()))
        }
        ureq::Error::Transport(t) => QaError::BackendUnavailable(t.to_string()),
    }
}

impl ExternalClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        ExternalClient {
            endpoint: endpoint.into().trim_end_matches('/').to_owned(),
            poll_interval: Duration::from_millis(500),
        }
    }

    pub fn with_poll_interval(mut self, d: Duration) -> Self {
        self.poll_interval = d;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Cheap reachability check: opens and closes a TCP connection.
    pub fn probe(&self) -> Result<(), QaError> {
        let addr = authority(&self.endpoint)?;
        TcpStream::connect_timeout(&addr, CONNECT_TIMEOUT)
            .map(drop)
            .map_err(|e| QaError::BackendUnavailable(format!("{}: {e}", self.endpoint)))
    }

    fn agent(timeout: Duration) -> ureq::Agent {
        ureq::AgentBuilder::new().timeout_connect(CONNECT_TIMEOUT).timeout(timeout).build()
    }

    /// Submits a set and blocks until the backend reports ready; returns the model token.
    pub fn train(&self, set: &TrainingSet, label: &str) -> Result<String, QaError> {
        // training itself is unbounded; only each request has a deadline
        let agent = Self::agent(REQUEST_TIMEOUT);
        let resp: TrainResponse = agent
            .post(&format!("{}/train", self.endpoint))
            .send_json(TrainRequest { set, model_label: label })
            .map_err(transport)?
            .into_json()
            .map_err(|e| QaError::BackendProtocolViolation(format!("train response: {e}")))?;
        loop {
            let status = self.status(&agent, &resp.model_token)?;
            match status.status.as_str() {
                "ready" => return Ok(resp.model_token),
                "failed" => {
                    return Err(QaError::BackendFailure(
                        status.message.unwrap_or_else(|| "training failed".into()),
                    ))
                }
                "training" | "queued" | "running" => thread::sleep(self.poll_interval),
                other => return Err(QaError::BackendProtocolViolation(format!("unknown status {other:?}"))),
            }
        }
    }

    fn status(&self, agent: &ureq::Agent, token: &str) -> Result<StatusResponse, QaError> {
        agent
            .get(&format!("{}/status/{token}", self.endpoint))
            .call()
            .map_err(transport)?
            .into_json()
            .map_err(|e| QaError::BackendProtocolViolation(format!("status response: {e}")))
    }

    /// Raw backend answer for one page.
    pub fn infer(&self, token: &str, question: &str, page: &Page, map: &TextMap) -> Result<InferResponse, QaError> {
        let words = page
            .words
            .iter()
            .map(|w| {
                Ok(WordBox {
                    t: w.text.clone(),
                    bbox: normalize_box(&w.bbox, page).map_err(|e| QaError::BackendFailure(e.to_string()))?,
                })
            })
            .collect::<Result<_, QaError>>()?;
        Self::agent(INFER_TIMEOUT)
            .post(&format!("{}/infer", self.endpoint))
            .send_json(InferRequest {
                model_token: token,
                question,
                context: map.page_text(),
                words,
            })
            .map_err(transport)?
            .into_json()
            .map_err(|e| QaError::BackendProtocolViolation(format!("infer response: {e}")))
    }
}

/// Snaps a backend's answer string to a word span on the page: the
/// occurrence nearest the reported offset, earliest on ties.
pub fn reanchor(map: &TextMap, page_index: usize, doc_id: &crate::DocId, resp: &InferResponse) -> Result<(usize, usize), QaError> {
    let violation = || {
        QaError::BackendProtocolViolation(format!(
            "answer {:?} at {} cannot be located in the page text",
            resp.answer, resp.char_start
        ))
    };
    let sel = Selection {
        doc_id: doc_id.clone(),
        page_index,
        raw_text: resp.answer.clone(),
        rects: vec![],
    };
    let candidates = find_candidates(map, &sel).map_err(|_| violation())?;
    candidates
        .iter()
        .min_by_key(|c| (c.char_start.abs_diff(resp.char_start), c.char_start))
        .map(|c| (c.start_word, c.end_word))
        .ok_or_else(violation)
}

/// Confidence as reported, clamped to [0, 1]; NaN counts as 0.
pub fn clamp_confidence(c: f64) -> f64 {
    if c.is_nan() {
        0.0
    } else {
        c.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DocId;

    #[test]
    fn reanchoring() {
        let map = TextMap::from_words(["pay", "is", "$20", "per", "hour;", "$20", "per", "hour"]);
        let id = DocId::from_bytes(b"x");
        let r = |answer: &str, at| InferResponse {
            answer: answer.into(),
            char_start: at,
            confidence: 0.9,
        };
        assert_eq!(reanchor(&map, 0, &id, &r("$20 per hour", 0)).unwrap(), (2, 4));
        assert_eq!(reanchor(&map, 0, &id, &r("$20 per hour", 25)).unwrap(), (5, 7));
        // partial words snap outward, whitespace is forgiven
        assert_eq!(reanchor(&map, 0, &id, &r("20  per", 8)).unwrap(), (2, 3));
        assert!(matches!(
            reanchor(&map, 0, &id, &r("salary", 0)),
            Err(QaError::BackendProtocolViolation(_))
        ));
        assert!(reanchor(&map, 0, &id, &r("   ", 0)).is_err());
    }

    #[test]
    fn confidence_clamp() {
        assert_eq!(clamp_confidence(1.7), 1.0);
        assert_eq!(clamp_confidence(-0.2), 0.0);
        assert_eq!(clamp_confidence(f64::NAN), 0.0);
        assert_eq!(clamp_confidence(0.25), 0.25);
    }

    #[test]
    fn endpoint_parsing() {
        assert!(authority("http://127.0.0.1:9/").is_ok());
        assert!(matches!(authority("https://x"), Err(QaError::BackendUnavailable(_))));
    }
}
