use std::collections::HashMap;
use std::sync::mpsc::{self, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use chrono::Utc;
use log::{info, warn};
use uuid::Uuid;

use super::baseline::{baseline_infer, baseline_train, BaselineState, WindowMatch};
use super::external::{clamp_confidence, reanchor, ExternalClient};
use super::{BackendDescriptor, BackendKind, ModelRef, ModelStatus, Prediction, QaError};
use crate::dataset::TrainingSet;
use crate::document::{Document, TextMap};
use crate::store::Store;

#[derive(Debug, Clone)]
enum Runner {
    Builtin,
    External(ExternalClient),
}

impl Runner {
    fn train(&self, set: &TrainingSet, label: &str) -> Result<Vec<u8>, QaError> {
        match self {
            Runner::Builtin => serde_json::to_vec(&baseline_train(set)).map_err(|e| QaError::BackendFailure(e.to_string())),
            Runner::External(c) => c.train(set, label).map(String::into_bytes),
        }
    }
}

struct Job {
    model_id: String,
    set: TrainingSet,
    label: String,
}

/// Loaded model state, ready to answer.
enum Loaded {
    Builtin(BaselineState),
    External(ExternalClient, String),
}

/// Backends, the training queue (one worker thread per backend, so at most
/// one training per backend at a time) and inference.
pub struct QaService {
    store: Arc<Store>,
    backends: Vec<(BackendDescriptor, Runner)>,
    queues: Mutex<HashMap<String, Sender<Job>>>,
}

impl QaService {
    /// The builtin backend is always present; `external` adds HTTP backends.
    /// Models left mid-training by a previous process are marked failed.
    pub fn new(store: Arc<Store>, external: &[BackendDescriptor]) -> Result<Self, QaError> {
        let mut backends = vec![(BackendDescriptor::builtin(), Runner::Builtin)];
        for d in external {
            match (&d.kind, &d.endpoint) {
                (BackendKind::External, Some(ep)) if d.backend_id != super::BUILTIN_BACKEND => {
                    backends.push((d.clone(), Runner::External(ExternalClient::new(ep.clone()))))
                }
                _ => warn!("ignoring backend {:?}: external backends need an endpoint and a distinct id", d.backend_id),
            }
        }
        let n = store.fail_interrupted_models()?;
        if n > 0 {
            info!("marked {n} interrupted training job(s) as failed");
        }
        Ok(QaService {
            store,
            backends,
            queues: Mutex::new(HashMap::new()),
        })
    }

    pub fn descriptors(&self) -> Vec<BackendDescriptor> {
        self.backends.iter().map(|(d, _)| d.clone()).collect()
    }

    fn runner(&self, backend_id: &str) -> Result<&Runner, QaError> {
        self.backends
            .iter()
            .find(|(d, _)| d.backend_id == backend_id)
            .map(|(_, r)| r)
            .ok_or_else(|| QaError::UnknownBackend(backend_id.to_owned()))
    }

    /// Queues a training job and returns its model in `training` state.
    pub fn train(&self, backend_id: &str, set: TrainingSet, label: &str) -> Result<ModelRef, QaError> {
        let runner = self.runner(backend_id)?.clone();
        if set.is_empty() {
            return Err(QaError::EmptyTrainingSet);
        }
        if let Runner::External(c) = &runner {
            c.probe()?;
        }
        self.store.put_training_set(&set)?;
        let model = ModelRef {
            model_id: Uuid::new_v4().simple().to_string(),
            backend_id: backend_id.to_owned(),
            trained_on: set.set_id.clone(),
            created_at: Utc::now(),
            status: ModelStatus::Training,
            label: label.to_owned(),
            message: None,
        };
        self.store.insert_model(&model)?;

        let mut queues = self.queues.lock().unwrap_or_else(|e| e.into_inner());
        let tx = queues
            .entry(backend_id.to_owned())
            .or_insert_with(|| Self::spawn_worker(self.store.clone(), backend_id, runner));
        let job = Job {
            model_id: model.model_id.clone(),
            set,
            label: label.to_owned(),
        };
        if tx.send(job).is_err() {
            self.store
                .finish_model(&model.model_id, ModelStatus::Failed, Some("training worker stopped"), None)?;
            return Err(QaError::BackendFailure("training worker stopped".into()));
        }
        Ok(model)
    }

    fn spawn_worker(store: Arc<Store>, backend_id: &str, runner: Runner) -> Sender<Job> {
        let (tx, rx) = mpsc::channel::<Job>();
        let name = format!("train-{backend_id}");
        thread::Builder::new()
            .name(name)
            .spawn(move || {
                for job in rx {
                    let (status, message, state) = match runner.train(&job.set, &job.label) {
                        Ok(state) => (ModelStatus::Ready, None, Some(state)),
                        Err(e) => (ModelStatus::Failed, Some(e.to_string()), None),
                    };
                    if let Err(e) = store.finish_model(&job.model_id, status, message.as_deref(), state.as_deref()) {
                        warn!("could not record result of model {}: {e}", job.model_id);
                    }
                }
            })
            .expect("spawn training worker");
        tx
    }

    pub fn job_status(&self, model_id: &str) -> Result<ModelRef, QaError> {
        Ok(self.store.model(model_id)?)
    }

    /// Polls until the model leaves `training` or the timeout passes.
    pub fn wait(&self, model_id: &str, timeout: Duration) -> Result<ModelRef, QaError> {
        let deadline = Instant::now() + timeout;
        loop {
            let m = self.job_status(model_id)?;
            if m.status != ModelStatus::Training || Instant::now() >= deadline {
                return Ok(m);
            }
            thread::sleep(Duration::from_millis(10));
        }
    }

    fn load(&self, model_id: &str) -> Result<Loaded, QaError> {
        let model = self.store.model(model_id)?;
        if model.status != ModelStatus::Ready {
            return Err(QaError::ModelNotReady(model_id.to_owned()));
        }
        let state = self
            .store
            .model_state(model_id)?
            .ok_or_else(|| QaError::BackendFailure(format!("model {model_id} has no stored state")))?;
        match self.runner(&model.backend_id)? {
            Runner::Builtin => serde_json::from_slice(&state)
                .map(Loaded::Builtin)
                .map_err(|e| QaError::BackendFailure(format!("corrupt baseline state: {e}"))),
            Runner::External(c) => Ok(Loaded::External(
                c.clone(),
                String::from_utf8(state).map_err(|e| QaError::BackendFailure(e.to_string()))?,
            )),
        }
    }

    /// One prediction per question, in question order. Each question is
    /// answered on every page; the most confident page wins, the earliest on
    /// ties.
    pub fn infer(&self, model_id: &str, doc: &Document, questions: &[String]) -> Result<Vec<Prediction>, QaError> {
        let loaded = self.load(model_id)?;
        if let Loaded::External(c, _) = &loaded {
            c.probe()?;
        }
        let maps: Vec<TextMap> = doc.pages.iter().map(TextMap::build).collect();
        let mut out = Vec::with_capacity(questions.len());
        for q in questions {
            let mut best: Option<(usize, WindowMatch)> = None;
            for (pi, (page, map)) in doc.pages.iter().zip(&maps).enumerate() {
                if map.word_count() == 0 {
                    continue;
                }
                let m = match &loaded {
                    Loaded::Builtin(state) => match baseline_infer(state, map, q) {
                        Some(m) => m,
                        None => continue,
                    },
                    Loaded::External(c, token) => {
                        let resp = c.infer(token, q, page, map)?;
                        let (start_word, end_word) = reanchor(map, pi, &doc.doc_id, &resp)?;
                        WindowMatch {
                            start_word,
                            end_word,
                            confidence: clamp_confidence(resp.confidence),
                        }
                    }
                };
                if best.map_or(true, |(_, b)| m.confidence > b.confidence) {
                    best = Some((pi, m));
                }
            }
            let (pi, m) = best.ok_or_else(|| QaError::EmptyDocument(doc.doc_id.to_string()))?;
            out.push(prediction(doc, &maps[pi], pi, q, m));
        }
        Ok(out)
    }
}

fn prediction(doc: &Document, map: &TextMap, page_index: usize, question: &str, m: WindowMatch) -> Prediction {
    let (char_start, char_end) = map.span_range(m.start_word, m.end_word).expect("window lies on the page");
    Prediction {
        question: question.to_owned(),
        doc_id: doc.doc_id.clone(),
        page_index,
        answer_text: map.slice(char_start, char_end).expect("window lies on the page").to_owned(),
        char_start,
        char_end,
        word_span: (m.start_word, m.end_word),
        boxes: doc.pages[page_index].words[m.start_word..=m.end_word].iter().map(|w| w.bbox).collect(),
        confidence: m.confidence,
    }
}
