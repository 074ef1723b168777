use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use pdfqa_core::dataset::DatasetError;
use pdfqa_core::highlight::HighlightError;
use pdfqa_core::qa::QaError;
use pdfqa_core::{SpanError, StoreError};
use serde::Serialize;
use serde_json::Value;

/// Every error body is `{code, message, detail}`; `code` is stable.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
    detail: &'a Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            code: self.code,
            message: &self.message,
            detail: &self.detail,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let msg = e.to_string();
        match e {
            StoreError::InvalidUser => ApiError::new(StatusCode::BAD_REQUEST, "invalid_user", msg),
            StoreError::UnknownDocument(_) => ApiError::not_found("unknown_document", msg),
            StoreError::InvalidSpan(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_span", msg),
            StoreError::UnknownSession(_) => ApiError::not_found("unknown_session", msg),
            StoreError::UnknownModel(_) => ApiError::not_found("unknown_model", msg),
            StoreError::UnknownRecord(_) => ApiError::not_found("unknown_record", msg),
            StoreError::UnknownTrainingSet(_) => ApiError::not_found("unknown_training_set", msg),
            StoreError::StorageFailure(_) => {
                log::error!("{msg}");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_failure", msg)
            }
        }
    }
}

impl From<SpanError> for ApiError {
    fn from(e: SpanError) -> Self {
        let msg = e.to_string();
        match e {
            SpanError::EmptySelection => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_selection", msg),
            SpanError::NoMatch => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "no_match", msg),
            SpanError::PageOutOfRange(_) => ApiError::not_found("page_out_of_range", msg),
            SpanError::WrongDocument => ApiError::bad_request(msg),
        }
    }
}

impl From<QaError> for ApiError {
    fn from(e: QaError) -> Self {
        let msg = e.to_string();
        match e {
            QaError::EmptyTrainingSet => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_training_set", msg),
            QaError::BackendUnavailable(_) => ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "backend_unavailable", msg),
            QaError::BackendFailure(_) => ApiError::new(StatusCode::BAD_GATEWAY, "backend_failure", msg),
            QaError::BackendProtocolViolation(_) => {
                ApiError::new(StatusCode::BAD_GATEWAY, "backend_protocol_violation", msg)
            }
            QaError::UnknownBackend(_) => ApiError::not_found("unknown_backend", msg),
            QaError::UnknownModel(_) => ApiError::not_found("unknown_model", msg),
            QaError::ModelNotReady(_) => ApiError::new(StatusCode::CONFLICT, "model_not_ready", msg),
            QaError::EmptyDocument(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_document", msg),
            QaError::Store(e) => e.into(),
        }
    }
}

impl From<DatasetError> for ApiError {
    fn from(e: DatasetError) -> Self {
        let msg = e.to_string();
        match e {
            DatasetError::StaleSpan { .. } => ApiError::new(StatusCode::CONFLICT, "stale_span", msg),
            DatasetError::MissingDocument(_) => ApiError::not_found("unknown_document", msg),
            DatasetError::BoxOutOfBounds(..) => ApiError::internal(msg),
        }
    }
}

impl From<HighlightError> for ApiError {
    fn from(e: HighlightError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "highlight_failed", e.to_string())
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
