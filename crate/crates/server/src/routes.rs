use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use chrono::Utc;
use pdfqa_core::dataset::export_training_set;
use pdfqa_core::highlight::{emit_highlights, plan_for_spans};
use pdfqa_core::metrics::{evaluate, EvalPair};
use pdfqa_core::qa::{QaService, BUILTIN_BACKEND};
use pdfqa_core::{AnswerSpan, DocId, Document, ModelStatus, Prediction, Selection, Store, TextMap};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ServerConfig;
use crate::error::{ApiError, ApiResult};
use crate::upload::{self, Outcome, UploadResult};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub qa: Arc<QaService>,
    pub config: Arc<ServerConfig>,
}

/// `Json` whose rejections use the API error shape (400 bad_request).
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(e) => Err(json_rejection(e)),
        }
    }
}

fn json_rejection(e: JsonRejection) -> ApiError {
    let status = e.status();
    let err = ApiError::bad_request(e.body_text());
    if status == StatusCode::PAYLOAD_TOO_LARGE {
        return ApiError::new(status, "payload_too_large", e.body_text());
    }
    err
}

/// Runs store/backend work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker panicked: {e}")))?
}

fn parse_doc_id(id: &str) -> ApiResult<DocId> {
    DocId::parse(id).ok_or_else(|| ApiError::not_found("unknown_document", format!("unknown document {id}")))
}

fn load_document(store: &Store, doc_id: &DocId) -> ApiResult<Document> {
    store
        .document(doc_id)?
        .ok_or_else(|| ApiError::not_found("unknown_document", format!("unknown document {doc_id}")))
}

/// Sessions idle longer than the configured timeout accept no more writes.
fn check_active(state: &AppState, session_id: &str) -> ApiResult<()> {
    let last = state.store.last_active(session_id)?;
    let idle = (Utc::now() - last).to_std().unwrap_or_default();
    if idle > state.config.session_idle_timeout() {
        return Err(ApiError::new(
            StatusCode::GONE,
            "session_expired",
            format!("session {session_id} has been idle for {}s; open a new session", idle.as_secs()),
        ));
    }
    Ok(())
}

pub fn router(state: AppState) -> Router {
    let upload_limit = state.config.max_upload_bytes;
    let api = Router::new()
        .route("/health", get(|| async { Json(json!({"status": "ok"})) }))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/records", get(session_records))
        .route("/documents", post(upload_documents).layer(DefaultBodyLimit::max(upload_limit)))
        .route("/documents/{id}", get(get_document))
        .route("/documents/{id}/file", get(document_file))
        .route("/documents/{id}/pages/{n}", get(document_page))
        .route("/annotations", post(create_annotation))
        .route("/annotations/{id}", delete(delete_annotation))
        .route("/backends", get(list_backends))
        .route("/train", post(train))
        .route("/models", get(list_models))
        .route("/jobs/{id}", get(job_status))
        .route("/infer", post(infer))
        .route("/highlighted/{id}", get(highlighted))
        .route("/eval", post(eval))
        .fallback(|| async { ApiError::not_found("not_found", "no such endpoint") });
    let app = Router::new().nest("/api", api);
    let app = match &state.config.static_dir {
        Some(dir) => app.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => app,
    };
    app.with_state(state)
}

// ---- sessions ----

#[derive(Deserialize)]
struct NewSession {
    #[serde(default)]
    user: String,
}

async fn create_session(State(s): State<AppState>, ApiJson(body): ApiJson<NewSession>) -> ApiResult<Response> {
    let session = blocking(move || Ok(s.store.open_session(&body.user)?)).await?;
    Ok((StatusCode::CREATED, Json(session)).into_response())
}

async fn list_sessions(State(s): State<AppState>) -> ApiResult<Response> {
    let list = blocking(move || Ok(s.store.list_sessions()?)).await?;
    Ok(Json(list).into_response())
}

async fn get_session(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let session = blocking(move || Ok(s.store.session(&id)?)).await?;
    Ok(Json(session).into_response())
}

async fn session_records(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let records = blocking(move || {
        s.store.session(&id)?;
        Ok(s.store.records(&id)?)
    })
    .await?;
    Ok(Json(records).into_response())
}

// ---- documents ----

async fn upload_documents(State(s): State<AppState>, mut form: Multipart) -> ApiResult<Response> {
    let multipart_error = |e: axum::extract::multipart::MultipartError| {
        let status = e.status();
        if status == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::new(status, "payload_too_large", format!("upload exceeds {} bytes", s.config.max_upload_bytes))
        } else {
            ApiError::bad_request(e.body_text())
        }
    };
    let mut session_id = None;
    let mut files = Vec::new();
    while let Some(field) = form.next_field().await.map_err(multipart_error)? {
        match field.name() {
            Some("session_id") => session_id = Some(field.text().await.map_err(multipart_error)?),
            _ => {
                let name = field.file_name().unwrap_or("upload.pdf").to_owned();
                let bytes = field.bytes().await.map_err(multipart_error)?;
                files.push((name, bytes.to_vec()));
            }
        }
    }
    let session_id = session_id.ok_or_else(|| ApiError::bad_request("missing session_id field"))?;
    if files.is_empty() {
        return Err(ApiError::bad_request("no files in upload"));
    }

    let result = blocking(move || {
        s.store.session(&session_id)?;
        check_active(&s, &session_id)?;
        let mut entries = Vec::new();
        for outcome in upload::process(files, s.config.max_upload_bytes) {
            entries.push(match outcome {
                Outcome::Parsed(doc) => {
                    let reg = s.store.register_document(&session_id, &doc)?;
                    upload::parsed_entry(&doc, reg)
                }
                Outcome::Rejected(entry) => entry,
            });
        }
        Ok(UploadResult { files: entries })
    })
    .await?;
    let status = if result.any_parsed() {
        StatusCode::OK
    } else {
        StatusCode::UNPROCESSABLE_ENTITY
    };
    Ok((status, Json(result)).into_response())
}

#[derive(Serialize)]
struct PageInfo {
    index: usize,
    width: f64,
    height: f64,
    rotation: u16,
    word_count: usize,
}

async fn get_document(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let (doc, owner) = blocking(move || {
        let doc_id = parse_doc_id(&id)?;
        let doc = load_document(&s.store, &doc_id)?;
        let owner = s.store.owner_of(&doc_id)?;
        Ok((doc, owner))
    })
    .await?;
    let pages: Vec<PageInfo> = doc
        .pages
        .iter()
        .map(|p| PageInfo {
            index: p.index,
            width: p.width,
            height: p.height,
            rotation: p.rotation,
            word_count: p.word_count(),
        })
        .collect();
    Ok(Json(json!({
        "doc_id": doc.doc_id,
        "filename": doc.filename,
        "page_count": doc.page_count(),
        "session_id": owner,
        "pages": pages,
    }))
    .into_response())
}

async fn document_file(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let bytes = blocking(move || {
        let doc_id = parse_doc_id(&id)?;
        s.store
            .document_bytes(&doc_id)?
            .ok_or_else(|| ApiError::not_found("unknown_document", format!("unknown document {doc_id}")))
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "application/pdf")], bytes).into_response())
}

#[derive(Serialize)]
struct PageWord<'a> {
    t: &'a str,
    #[serde(rename = "box")]
    bbox: pdfqa_core::BBox,
    index: usize,
}

async fn document_page(State(s): State<AppState>, Path((id, n)): Path<(String, String)>) -> ApiResult<Response> {
    let doc = blocking(move || load_document(&s.store, &parse_doc_id(&id)?)).await?;
    let page = n
        .parse::<usize>()
        .ok()
        .and_then(|n| doc.page(n))
        .ok_or_else(|| ApiError::not_found("page_out_of_range", format!("page {n} is out of range")))?;
    let map = TextMap::build(page);
    let words: Vec<PageWord> = page
        .words
        .iter()
        .map(|w| PageWord {
            t: &w.text,
            bbox: w.bbox,
            index: w.word_index,
        })
        .collect();
    Ok(Json(json!({
        "width": page.width,
        "height": page.height,
        "words": words,
        "page_text": map.page_text(),
    }))
    .into_response())
}

// ---- annotations ----

#[derive(Deserialize)]
struct NewAnnotation {
    session_id: String,
    question: String,
    selection: Selection,
}

async fn create_annotation(State(s): State<AppState>, ApiJson(body): ApiJson<NewAnnotation>) -> ApiResult<Response> {
    let record = blocking(move || {
        s.store.session(&body.session_id)?;
        check_active(&s, &body.session_id)?;
        if body.question.trim().is_empty() {
            return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_question", "question must not be empty"));
        }
        let doc = load_document(&s.store, &body.selection.doc_id)?;
        let span = pdfqa_core::map_selection(&doc, &body.selection)?;
        Ok(s.store.save_annotation(&body.session_id, body.question.trim(), &span)?)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(record)).into_response())
}

#[derive(Deserialize)]
struct SessionQuery {
    session_id: String,
}

async fn delete_annotation(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SessionQuery>,
) -> ApiResult<Response> {
    blocking(move || {
        check_active(&s, &q.session_id)?;
        Ok(s.store.delete_annotation(&q.session_id, &id)?)
    })
    .await?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

// ---- training ----

async fn list_backends(State(s): State<AppState>) -> Response {
    Json(s.qa.descriptors()).into_response()
}

#[derive(Deserialize)]
struct TrainRequest {
    session_ids: Vec<String>,
    #[serde(default = "default_backend")]
    backend_id: String,
    #[serde(default)]
    label: String,
}

fn default_backend() -> String {
    BUILTIN_BACKEND.to_owned()
}

async fn train(State(s): State<AppState>, ApiJson(body): ApiJson<TrainRequest>) -> ApiResult<Response> {
    let model = blocking(move || {
        for id in &body.session_ids {
            s.store.session(id)?;
        }
        // unknown backends are reported before the (possibly empty) selection
        if !s.qa.descriptors().iter().any(|d| d.backend_id == body.backend_id) {
            return Err(pdfqa_core::qa::QaError::UnknownBackend(body.backend_id.clone()).into());
        }
        let records = s.store.select_for_training(&body.session_ids)?;
        let store = s.store.clone();
        let set = export_training_set(&records, body.session_ids.clone(), |id| store.document(id).ok().flatten())?;
        let label = if body.label.trim().is_empty() {
            format!("{} model", body.backend_id)
        } else {
            body.label.trim().to_owned()
        };
        Ok(s.qa.train(&body.backend_id, set, &label)?)
    })
    .await?;
    Ok((StatusCode::ACCEPTED, Json(model)).into_response())
}

async fn list_models(State(s): State<AppState>) -> ApiResult<Response> {
    let models = blocking(move || Ok(s.store.models()?)).await?;
    Ok(Json(models).into_response())
}

async fn job_status(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let model = blocking(move || Ok(s.qa.job_status(&id)?)).await?;
    Ok(Json(model).into_response())
}

// ---- inference ----

#[derive(Deserialize)]
struct InferRequest {
    model_id: String,
    doc_ids: Vec<DocId>,
    questions: Vec<String>,
}

#[derive(Serialize)]
struct Highlighted {
    doc_id: DocId,
    artifact_id: String,
    download_url: String,
}

fn span_of(p: &Prediction) -> AnswerSpan {
    AnswerSpan {
        doc_id: p.doc_id.clone(),
        page_index: p.page_index,
        start_word: p.word_span.0,
        end_word: p.word_span.1,
        text: p.answer_text.clone(),
        char_start: p.char_start,
        char_end: p.char_end,
    }
}

async fn infer(State(s): State<AppState>, ApiJson(body): ApiJson<InferRequest>) -> ApiResult<Response> {
    if body.doc_ids.is_empty() {
        return Err(ApiError::bad_request("doc_ids must not be empty"));
    }
    let questions: Vec<String> = body.questions.iter().map(|q| q.trim().to_owned()).collect();
    if questions.is_empty() || questions.iter().any(String::is_empty) {
        return Err(ApiError::bad_request("questions must be non-empty strings"));
    }
    let out = blocking(move || {
        let model = s.qa.job_status(&body.model_id)?;
        if model.status != ModelStatus::Ready {
            return Err(pdfqa_core::qa::QaError::ModelNotReady(model.model_id).into());
        }
        let docs = body
            .doc_ids
            .iter()
            .map(|id| load_document(&s.store, id))
            .collect::<ApiResult<Vec<_>>>()?;
        let mut predictions = Vec::new();
        let mut highlighted = Vec::new();
        for doc in &docs {
            let preds = s.qa.infer(&body.model_id, doc, &questions)?;
            let spans: Vec<AnswerSpan> = preds.iter().map(span_of).collect();
            let plan = plan_for_spans(doc, spans.iter().enumerate().map(|(k, sp)| (k, questions[k].as_str(), sp)));
            let original = match doc.raw_bytes() {
                Some(b) => b.to_vec(),
                None => s.store.document_bytes(&doc.doc_id)?.ok_or_else(|| {
                    ApiError::internal(format!("original bytes of {} are missing", doc.doc_id))
                })?,
            };
            let bytes = emit_highlights(&original, &plan)?;
            let artifact_id = s.store.put_artifact(&doc.doc_id, &bytes)?;
            highlighted.push(Highlighted {
                doc_id: doc.doc_id.clone(),
                download_url: format!("/api/highlighted/{artifact_id}"),
                artifact_id,
            });
            predictions.extend(preds);
        }
        Ok(json!({"predictions": predictions, "highlighted": highlighted}))
    })
    .await?;
    Ok(Json(out).into_response())
}

async fn highlighted(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let bytes = blocking(move || {
        s.store
            .artifact(&id)?
            .ok_or_else(|| ApiError::not_found("unknown_artifact", format!("unknown artifact {id}")))
    })
    .await?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/pdf"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"highlighted.pdf\""),
        ],
        bytes,
    )
        .into_response())
}

// ---- evaluation ----

#[derive(Deserialize)]
struct EvalRequest {
    pairs: Vec<EvalPair>,
}

async fn eval(ApiJson(body): ApiJson<EvalRequest>) -> Response {
    Json(evaluate(&body.pairs)).into_response()
}
