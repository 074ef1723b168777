//! Local embedded store for documents, sessions, annotations, models and
//! generated artifacts.
//!
//! One SQLite file in the data directory holds all rows; original PDFs,
//! model state and highlighted copies live as files under `blobs/` and are
//! referenced by id. Writes are serialized through a single connection and
//! every operation runs in one transaction.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, TimeZone, Utc};
use rusqlite::{params, Connection, OptionalExtension, Transaction};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::dataset::TrainingSet;
use crate::document::{DocId, Document, TextMap};
use crate::qa::{ModelRef, ModelStatus};
use crate::spanmap::AnswerSpan;

pub const DB_FILE: &str = "pdfqa.sqlite3";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("storage failure: {0}")]
    StorageFailure(String),
    #[error("user name must not be empty")]
    InvalidUser,
    #[error("document {0} is not registered to this session")]
    UnknownDocument(String),
    #[error("invalid span: {0}")]
    InvalidSpan(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown model {0}")]
    UnknownModel(String),
    #[error("unknown record {0}")]
    UnknownRecord(String),
    #[error("unknown training set {0}")]
    UnknownTrainingSet(String),
}

impl From<rusqlite::Error> for StoreError {
    fn from(e: rusqlite::Error) -> Self {
        StoreError::StorageFailure(e.to_string())
    }
}

impl From<std::io::Error> for StoreError {
    fn from(e: std::io::Error) -> Self {
        StoreError::StorageFailure(e.to_string())
    }
}

impl From<serde_json::Error> for StoreError {
    fn from(e: serde_json::Error) -> Self {
        StoreError::StorageFailure(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, StoreError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub user: String,
    pub created_at: DateTime<Utc>,
    pub doc_ids: BTreeSet<DocId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub user: String,
    pub created_at: DateTime<Utc>,
    pub doc_count: usize,
    pub record_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaRecord {
    pub record_id: String,
    pub session_id: String,
    pub question: String,
    pub span: AnswerSpan,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum Registration {
    Attached,
    /// Moved from an older session together with copies of its records.
    Migrated { from_session: String, records: usize },
}

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS documents (
    doc_id      TEXT PRIMARY KEY,
    filename    TEXT NOT NULL,
    body        TEXT NOT NULL,
    created_at  INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    seq         INTEGER PRIMARY KEY AUTOINCREMENT,
    session_id  TEXT NOT NULL UNIQUE,
    user        TEXT NOT NULL,
    created_at  INTEGER NOT NULL,
    last_active INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS session_docs (
    doc_id      TEXT PRIMARY KEY REFERENCES documents(doc_id),
    session_id  TEXT NOT NULL REFERENCES sessions(session_id)
);
CREATE TABLE IF NOT EXISTS qa_records (
    seq         INTEGER PRIMARY KEY AUTOINCREMENT,
    record_id   TEXT NOT NULL UNIQUE,
    session_id  TEXT NOT NULL REFERENCES sessions(session_id),
    question    TEXT NOT NULL,
    doc_id      TEXT NOT NULL REFERENCES documents(doc_id),
    page_index  INTEGER NOT NULL,
    start_word  INTEGER NOT NULL,
    end_word    INTEGER NOT NULL,
    span_text   TEXT NOT NULL,
    char_start  INTEGER NOT NULL,
    char_end    INTEGER NOT NULL,
    created_at  INTEGER NOT NULL,
    UNIQUE (session_id, question, doc_id, page_index, start_word, end_word)
);
CREATE INDEX IF NOT EXISTS qa_records_session ON qa_records(session_id);
CREATE TABLE IF NOT EXISTS training_sets (
    set_id      TEXT PRIMARY KEY,
    body        TEXT NOT NULL,
    created_at  INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS models (
    seq         INTEGER PRIMARY KEY AUTOINCREMENT,
    model_id    TEXT NOT NULL UNIQUE,
    backend_id  TEXT NOT NULL,
    trained_on  TEXT NOT NULL,
    created_at  INTEGER NOT NULL,
    status      TEXT NOT NULL,
    label       TEXT NOT NULL,
    message     TEXT,
    state_file  TEXT
);
CREATE TABLE IF NOT EXISTS artifacts (
    artifact_id TEXT PRIMARY KEY,
    doc_id      TEXT NOT NULL,
    file        TEXT NOT NULL,
    created_at  INTEGER NOT NULL
);
";

fn to_ms(t: DateTime<Utc>) -> i64 {
    t.timestamp_millis()
}

fn from_ms(ms: i64) -> DateTime<Utc> {
    Utc.timestamp_millis_opt(ms).single().unwrap_or_default()
}

fn now_ms() -> i64 {
    Utc::now().timestamp_millis()
}

fn new_id() -> String {
    Uuid::new_v4().simple().to_string()
}

#[derive(Debug)]
pub struct Store {
    conn: Mutex<Connection>,
    blobs: PathBuf,
}

impl Store {
    /// Opens (creating if needed) the store in `data_dir`.
    pub fn open(data_dir: impl AsRef<Path>) -> Result<Self> {
        let dir = data_dir.as_ref();
        let blobs = dir.join("blobs");
        fs::create_dir_all(&blobs)?;
        let conn = Connection::open(dir.join(DB_FILE))?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        conn.pragma_update(None, "synchronous", "FULL")?;
        conn.pragma_update(None, "foreign_keys", "ON")?;
        conn.execute_batch(SCHEMA)?;
        Ok(Store {
            conn: Mutex::new(conn),
            blobs,
        })
    }

    fn conn(&self) -> MutexGuard<'_, Connection> {
        // a panic while holding the lock cannot leave a half-applied
        // transaction behind (it rolls back on drop), so poisoning is benign
        self.conn.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn write_blob(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.blobs.join(name);
        let tmp = self.blobs.join(format!(".{name}.{}", new_id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    fn read_blob(&self, name: &str) -> Result<Option<Vec<u8>>> {
        match fs::read(self.blobs.join(name)) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    // ---- sessions ----

    pub fn open_session(&self, user: &str) -> Result<Session> {
        let user = user.trim();
        if user.is_empty() {
            return Err(StoreError::InvalidUser);
        }
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let last: Option<i64> = tx.query_row("SELECT MAX(created_at) FROM sessions", [], |r| r.get(0))?;
        // keep creation times non-decreasing even if the wall clock steps back
        let created = now_ms().max(last.unwrap_or(i64::MIN));
        let id = new_id();
        tx.execute(
            "INSERT INTO sessions (session_id, user, created_at, last_active) VALUES (?1, ?2, ?3, ?3)",
            params![id, user, created],
        )?;
        tx.commit()?;
        Ok(Session {
            session_id: id,
            user: user.to_owned(),
            created_at: from_ms(created),
            doc_ids: BTreeSet::new(),
        })
    }

    fn session_in(tx: &Connection, session_id: &str) -> Result<Session> {
        let (user, created): (String, i64) = tx
            .query_row("SELECT user, created_at FROM sessions WHERE session_id = ?1", [session_id], |r| {
                Ok((r.get(0)?, r.get(1)?))
            })
            .optional()?
            .ok_or_else(|| StoreError::UnknownSession(session_id.to_owned()))?;
        let mut stmt = tx.prepare("SELECT doc_id FROM session_docs WHERE session_id = ?1")?;
        let doc_ids = stmt
            .query_map([session_id], |r| r.get::<_, String>(0))?
            .map(|d| d.map(|d| DocId::parse(&d).unwrap_or_else(|| DocId::from_bytes(d.as_bytes()))))
            .collect::<rusqlite::Result<_>>()?;
        Ok(Session {
            session_id: session_id.to_owned(),
            user,
            created_at: from_ms(created),
            doc_ids,
        })
    }

    pub fn session(&self, session_id: &str) -> Result<Session> {
        Self::session_in(&self.conn(), session_id)
    }

    /// Time of the last write made through the session.
    pub fn last_active(&self, session_id: &str) -> Result<DateTime<Utc>> {
        self.conn()
            .query_row("SELECT last_active FROM sessions WHERE session_id = ?1", [session_id], |r| r.get(0))
            .optional()?
            .map(from_ms)
            .ok_or_else(|| StoreError::UnknownSession(session_id.to_owned()))
    }

    fn touch(tx: &Transaction<'_>, session_id: &str) -> Result<()> {
        let n = tx.execute(
            "UPDATE sessions SET last_active = MAX(last_active, ?2) WHERE session_id = ?1",
            params![session_id, now_ms()],
        )?;
        if n == 0 {
            return Err(StoreError::UnknownSession(session_id.to_owned()));
        }
        Ok(())
    }

    /// All sessions, newest first.
    pub fn list_sessions(&self) -> Result<Vec<SessionSummary>> {
        let conn = self.conn();
        let mut stmt = conn.prepare(
            "SELECT s.session_id, s.user, s.created_at,
                    (SELECT COUNT(*) FROM session_docs d WHERE d.session_id = s.session_id),
                    (SELECT COUNT(*) FROM qa_records q WHERE q.session_id = s.session_id)
             FROM sessions s ORDER BY s.created_at DESC, s.seq DESC",
        )?;
        let rows = stmt.query_map([], |r| {
            Ok(SessionSummary {
                session_id: r.get(0)?,
                user: r.get(1)?,
                created_at: from_ms(r.get(2)?),
                doc_count: r.get::<_, i64>(3)? as usize,
                record_count: r.get::<_, i64>(4)? as usize,
            })
        })?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    // ---- documents ----

    /// Stores a parsed document and its original bytes without attaching it
    /// to any session. Re-storing the same bytes is a no-op.
    pub fn put_document(&self, doc: &Document) -> Result<()> {
        if let Some(raw) = doc.raw_bytes() {
            let name = format!("{}.pdf", doc.doc_id);
            if !self.blobs.join(&name).exists() {
                self.write_blob(&name, raw)?;
            }
        }
        let body = serde_json::to_string(doc)?;
        self.conn().execute(
            "INSERT OR IGNORE INTO documents (doc_id, filename, body, created_at) VALUES (?1, ?2, ?3, ?4)",
            params![doc.doc_id.as_str(), doc.filename, body, now_ms()],
        )?;
        Ok(())
    }

    /// The stored document with its original bytes re-attached.
    pub fn document(&self, doc_id: &DocId) -> Result<Option<Document>> {
        let body: Option<String> = self
            .conn()
            .query_row("SELECT body FROM documents WHERE doc_id = ?1", [doc_id.as_str()], |r| r.get(0))
            .optional()?;
        let Some(body) = body else { return Ok(None) };
        let doc: Document = serde_json::from_str(&body)?;
        Ok(Some(match self.read_blob(&format!("{doc_id}.pdf"))? {
            Some(raw) => doc.with_raw_bytes(raw),
            None => doc,
        }))
    }

    pub fn document_bytes(&self, doc_id: &DocId) -> Result<Option<Vec<u8>>> {
        self.read_blob(&format!("{doc_id}.pdf"))
    }

    /// Session currently owning a document, if any.
    pub fn owner_of(&self, doc_id: &DocId) -> Result<Option<String>> {
        Ok(self
            .conn()
            .query_row("SELECT session_id FROM session_docs WHERE doc_id = ?1", [doc_id.as_str()], |r| r.get(0))
            .optional()?)
    }

    /// Attaches a document to a session, moving it (and copies of its
    /// records) out of any older session that owned it.
    pub fn register_document(&self, session_id: &str, doc: &Document) -> Result<Registration> {
        self.put_document(doc)?;
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        Self::touch(&tx, session_id)?;
        let doc_id = doc.doc_id.as_str();
        let owner: Option<String> = tx
            .query_row("SELECT session_id FROM session_docs WHERE doc_id = ?1", [doc_id], |r| r.get(0))
            .optional()?;
        let outcome = match owner {
            Some(o) if o == session_id => Registration::Attached,
            Some(from) => {
                let ids: Vec<String> = {
                    let mut stmt =
                        tx.prepare("SELECT record_id FROM qa_records WHERE session_id = ?1 AND doc_id = ?2 ORDER BY seq")?;
                    let rows = stmt.query_map(params![from, doc_id], |r| r.get(0))?;
                    rows.collect::<rusqlite::Result<_>>()?
                };
                for old in &ids {
                    tx.execute(
                        "INSERT INTO qa_records (record_id, session_id, question, doc_id, page_index, start_word,
                             end_word, span_text, char_start, char_end, created_at)
                         SELECT ?1, ?2, question, doc_id, page_index, start_word, end_word, span_text,
                                char_start, char_end, created_at
                         FROM qa_records WHERE record_id = ?3",
                        params![new_id(), session_id, old],
                    )?;
                }
                tx.execute("DELETE FROM qa_records WHERE session_id = ?1 AND doc_id = ?2", params![from, doc_id])?;
                tx.execute("UPDATE session_docs SET session_id = ?1 WHERE doc_id = ?2", params![session_id, doc_id])?;
                Registration::Migrated {
                    from_session: from,
                    records: ids.len(),
                }
            }
            None => {
                tx.execute("INSERT INTO session_docs (doc_id, session_id) VALUES (?1, ?2)", params![doc_id, session_id])?;
                Registration::Attached
            }
        };
        tx.commit()?;
        Ok(outcome)
    }

    // ---- annotations ----

    fn record_from_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<QaRecord> {
        let doc_id: String = r.get(3)?;
        Ok(QaRecord {
            record_id: r.get(0)?,
            session_id: r.get(1)?,
            question: r.get(2)?,
            span: AnswerSpan {
                doc_id: DocId::parse(&doc_id).unwrap_or_else(|| DocId::from_bytes(doc_id.as_bytes())),
                page_index: r.get::<_, i64>(4)? as usize,
                start_word: r.get::<_, i64>(5)? as usize,
                end_word: r.get::<_, i64>(6)? as usize,
                text: r.get(7)?,
                char_start: r.get::<_, i64>(8)? as usize,
                char_end: r.get::<_, i64>(9)? as usize,
            },
            created_at: from_ms(r.get(10)?),
        })
    }

    const RECORD_COLUMNS: &'static str = "record_id, session_id, question, doc_id, page_index, start_word, end_word, \
                                           span_text, char_start, char_end, created_at";

    /// Saves an annotation. Saving an identical (question, span) twice in a
    /// session returns the existing record.
    pub fn save_annotation(&self, session_id: &str, question: &str, span: &AnswerSpan) -> Result<QaRecord> {
        if question.trim().is_empty() {
            return Err(StoreError::InvalidSpan("question must not be empty".into()));
        }
        let doc = self
            .document(&span.doc_id)?
            .ok_or_else(|| StoreError::UnknownDocument(span.doc_id.to_string()))?;
        let page = doc
            .page(span.page_index)
            .ok_or_else(|| StoreError::InvalidSpan(format!("page {} out of range", span.page_index)))?;
        if !span.is_consistent_with(&TextMap::build(page)) {
            return Err(StoreError::InvalidSpan(format!(
                "words {}..={} / chars {}..{} do not match page {}",
                span.start_word, span.end_word, span.char_start, span.char_end, span.page_index
            )));
        }

        let mut conn = self.conn();
        let tx = conn.transaction()?;
        Self::touch(&tx, session_id)?;
        let owner: Option<String> = tx
            .query_row("SELECT session_id FROM session_docs WHERE doc_id = ?1", [span.doc_id.as_str()], |r| r.get(0))
            .optional()?;
        if owner.as_deref() != Some(session_id) {
            return Err(StoreError::UnknownDocument(span.doc_id.to_string()));
        }
        tx.execute(
            "INSERT OR IGNORE INTO qa_records (record_id, session_id, question, doc_id, page_index, start_word,
                 end_word, span_text, char_start, char_end, created_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11)",
            params![
                new_id(),
                session_id,
                question,
                span.doc_id.as_str(),
                span.page_index as i64,
                span.start_word as i64,
                span.end_word as i64,
                span.text,
                span.char_start as i64,
                span.char_end as i64,
                now_ms()
            ],
        )?;
        let record = tx.query_row(
            &format!(
                "SELECT {} FROM qa_records WHERE session_id = ?1 AND question = ?2 AND doc_id = ?3
                 AND page_index = ?4 AND start_word = ?5 AND end_word = ?6",
                Self::RECORD_COLUMNS
            ),
            params![
                session_id,
                question,
                span.doc_id.as_str(),
                span.page_index as i64,
                span.start_word as i64,
                span.end_word as i64
            ],
            Self::record_from_row,
        )?;
        tx.commit()?;
        Ok(record)
    }

    pub fn delete_annotation(&self, session_id: &str, record_id: &str) -> Result<()> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        Self::touch(&tx, session_id)?;
        let n = tx.execute(
            "DELETE FROM qa_records WHERE record_id = ?1 AND session_id = ?2",
            params![record_id, session_id],
        )?;
        if n == 0 {
            return Err(StoreError::UnknownRecord(record_id.to_owned()));
        }
        tx.commit()?;
        Ok(())
    }

    pub fn records(&self, session_id: &str) -> Result<Vec<QaRecord>> {
        Ok(self.select_for_training(&[session_id.to_owned()])?)
    }

    /// Records of the named sessions: by session creation, then record
    /// creation (insertion order breaks ties).
    pub fn select_for_training(&self, session_ids: &[String]) -> Result<Vec<QaRecord>> {
        let conn = self.conn();
        let mut sessions: Vec<(i64, i64, &str)> = Vec::new();
        for id in session_ids {
            let row: Option<(i64, i64)> = conn
                .query_row("SELECT created_at, seq FROM sessions WHERE session_id = ?1", [id], |r| {
                    Ok((r.get(0)?, r.get(1)?))
                })
                .optional()?;
            let (created, seq) = row.ok_or_else(|| StoreError::UnknownSession(id.clone()))?;
            sessions.push((created, seq, id));
        }
        sessions.sort();
        sessions.dedup();
        let mut stmt = conn.prepare(&format!(
            "SELECT {} FROM qa_records WHERE session_id = ?1 ORDER BY created_at, seq",
            Self::RECORD_COLUMNS
        ))?;
        let mut out = Vec::new();
        for (_, _, id) in sessions {
            let rows = stmt.query_map([id], Self::record_from_row)?;
            for r in rows {
                out.push(r?);
            }
        }
        Ok(out)
    }

    // ---- training sets and models ----

    pub fn put_training_set(&self, set: &TrainingSet) -> Result<()> {
        self.conn().execute(
            "INSERT OR REPLACE INTO training_sets (set_id, body, created_at) VALUES (?1, ?2, ?3)",
            params![set.set_id, serde_json::to_string(set)?, to_ms(set.created_at)],
        )?;
        Ok(())
    }

    pub fn training_set(&self, set_id: &str) -> Result<TrainingSet> {
        let body: String = self
            .conn()
            .query_row("SELECT body FROM training_sets WHERE set_id = ?1", [set_id], |r| r.get(0))
            .optional()?
            .ok_or_else(|| StoreError::UnknownTrainingSet(set_id.to_owned()))?;
        Ok(serde_json::from_str(&body)?)
    }

    pub fn insert_model(&self, model: &ModelRef) -> Result<()> {
        self.conn().execute(
            "INSERT INTO models (model_id, backend_id, trained_on, created_at, status, label, message)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
            params![
                model.model_id,
                model.backend_id,
                model.trained_on,
                to_ms(model.created_at),
                model.status.as_str(),
                model.label,
                model.message
            ],
        )?;
        Ok(())
    }

    /// Moves a model out of `training`. Other transitions are refused.
    pub fn finish_model(&self, model_id: &str, status: ModelStatus, message: Option<&str>, state: Option<&[u8]>) -> Result<ModelRef> {
        let file = match state {
            Some(bytes) => {
                let name = format!("model-{model_id}.bin");
                self.write_blob(&name, bytes)?;
                Some(name)
            }
            None => None,
        };
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let n = tx.execute(
            "UPDATE models SET status = ?2, message = ?3, state_file = COALESCE(?4, state_file)
             WHERE model_id = ?1 AND status = 'training'",
            params![model_id, status.as_str(), message, file],
        )?;
        let model = Self::model_in(&tx, model_id)?;
        if n == 0 && model.status != status {
            return Err(StoreError::StorageFailure(format!(
                "model {model_id} is already {}",
                model.status.as_str()
            )));
        }
        tx.commit()?;
        Ok(model)
    }

    fn model_in(conn: &Connection, model_id: &str) -> Result<ModelRef> {
        conn.query_row(
            "SELECT model_id, backend_id, trained_on, created_at, status, label, message FROM models WHERE model_id = ?1",
            [model_id],
            Self::model_from_row,
        )
        .optional()?
        .ok_or_else(|| StoreError::UnknownModel(model_id.to_owned()))
    }

    fn model_from_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<ModelRef> {
        let status: String = r.get(4)?;
        Ok(ModelRef {
            model_id: r.get(0)?,
            backend_id: r.get(1)?,
            trained_on: r.get(2)?,
            created_at: from_ms(r.get(3)?),
            status: ModelStatus::parse(&status).unwrap_or(ModelStatus::Failed),
            label: r.get(5)?,
            message: r.get(6)?,
        })
    }

    pub fn model(&self, model_id: &str) -> Result<ModelRef> {
        Self::model_in(&self.conn(), model_id)
    }

    pub fn models(&self) -> Result<Vec<ModelRef>> {
        let conn = self.conn();
        let mut stmt = conn.prepare(
            "SELECT model_id, backend_id, trained_on, created_at, status, label, message FROM models
             ORDER BY created_at DESC, seq DESC",
        )?;
        let rows = stmt.query_map([], Self::model_from_row)?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    /// Opaque trained state saved by the backend.
    pub fn model_state(&self, model_id: &str) -> Result<Option<Vec<u8>>> {
        let file: Option<Option<String>> = self
            .conn()
            .query_row("SELECT state_file FROM models WHERE model_id = ?1", [model_id], |r| r.get(0))
            .optional()?;
        match file {
            None => Err(StoreError::UnknownModel(model_id.to_owned())),
            Some(None) => Ok(None),
            Some(Some(name)) => self.read_blob(&name),
        }
    }

    /// Marks models left in `training` by a previous process as failed.
    pub fn fail_interrupted_models(&self) -> Result<usize> {
        Ok(self.conn().execute(
            "UPDATE models SET status = 'failed', message = 'interrupted by restart' WHERE status = 'training'",
            [],
        )?)
    }

    // ---- artifacts ----

    pub fn put_artifact(&self, doc_id: &DocId, bytes: &[u8]) -> Result<String> {
        let id = new_id();
        let name = format!("artifact-{id}.pdf");
        self.write_blob(&name, bytes)?;
        self.conn().execute(
            "INSERT INTO artifacts (artifact_id, doc_id, file, created_at) VALUES (?1, ?2, ?3, ?4)",
            params![id, doc_id.as_str(), name, now_ms()],
        )?;
        Ok(id)
    }

    pub fn artifact(&self, artifact_id: &str) -> Result<Option<Vec<u8>>> {
        let file: Option<String> = self
            .conn()
            .query_row("SELECT file FROM artifacts WHERE artifact_id = ?1", [artifact_id], |r| r.get(0))
            .optional()?;
        match file {
            Some(name) => self.read_blob(&name),
            None => Ok(None),
        }
    }
}

/// Shared handle used by the server and job workers.
pub type SharedStore = Arc<Store>;
