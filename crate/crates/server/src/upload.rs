//! Turns the files of one upload (PDFs, zips of PDFs, optional sidecar word
//! lists) into parsed documents.

use std::io::{Cursor, Read};

use pdfqa_core::store::Registration;
use pdfqa_core::{ingest_sidecar, parse_document, DocId, Document, ExtractError, Sidecar};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileStatus {
    Parsed,
    SidecarRequired,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileError {
    pub code: String,
    pub message: String,
}

/// One entry per uploaded PDF (or failed file), including zip members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UploadEntry {
    pub filename: String,
    pub doc_id: Option<DocId>,
    pub page_count: Option<usize>,
    pub status: FileStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<FileError>,
    /// Set when the document was moved here from an older session.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub migration: Option<Registration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UploadResult {
    pub files: Vec<UploadEntry>,
}

impl UploadResult {
    pub fn any_parsed(&self) -> bool {
        self.files.iter().any(|f| f.status == FileStatus::Parsed)
    }
}

/// An uploaded file after zip expansion.
struct Input {
    name: String,
    bytes: Vec<u8>,
    /// Zip members carry the archive name so sidecars pair within one archive.
    archive: Option<String>,
}

pub fn is_zip(bytes: &[u8]) -> bool {
    bytes.starts_with(b"PK\x03\x04") || bytes.starts_with(b"PK\x05\x06")
}

fn is_sidecar_name(name: &str) -> bool {
    name.to_ascii_lowercase().ends_with(".json")
}

fn stem(name: &str) -> &str {
    let base = name.rsplit(['/', '\\']).next().unwrap_or(name);
    match base.rfind('.') {
        Some(i) if i > 0 => &base[..i],
        _ => base,
    }
}

fn failed(filename: &str, code: &str, message: impl Into<String>) -> UploadEntry {
    UploadEntry {
        filename: filename.to_owned(),
        doc_id: None,
        page_count: None,
        status: FileStatus::Error,
        detail: Some(FileError {
            code: code.to_owned(),
            message: message.into(),
        }),
        migration: None,
    }
}

fn extract_error(e: &ExtractError) -> (&'static str, String) {
    let code = match e {
        ExtractError::NotAPdf => "not_a_pdf",
        ExtractError::UnsupportedFeature(_) => "unsupported_feature",
        ExtractError::Encrypted => "encrypted",
        ExtractError::Malformed(_) => "malformed",
    };
    (code, e.to_string())
}

/// Expands zips one level deep, in archive order. Members are capped at
/// `max_member_bytes` each once decompressed.
fn expand(files: Vec<(String, Vec<u8>)>, max_member_bytes: usize) -> Vec<Result<Input, UploadEntry>> {
    let mut out = Vec::new();
    for (name, bytes) in files {
        if !is_zip(&bytes) {
            out.push(Ok(Input { name, bytes, archive: None }));
            continue;
        }
        let mut archive = match zip::ZipArchive::new(Cursor::new(bytes)) {
            Ok(a) => a,
            Err(e) => {
                out.push(Err(failed(&name, "bad_archive", e.to_string())));
                continue;
            }
        };
        for i in 0..archive.len() {
            let mut member = match archive.by_index(i) {
                Ok(m) => m,
                Err(e) => {
                    out.push(Err(failed(&format!("{name}#{i}"), "bad_archive", e.to_string())));
                    continue;
                }
            };
            if member.is_dir() {
                continue;
            }
            let member_name = match member.name() {
                Ok(n) => n.into_owned(),
                Err(_) => format!("{name}#{i}"),
            };
            let mut data = Vec::new();
            let limited = (&mut member).take(max_member_bytes as u64 + 1).read_to_end(&mut data);
            if let Err(e) = limited {
                out.push(Err(failed(&member_name, "bad_archive", e.to_string())));
                continue;
            }
            if data.len() > max_member_bytes {
                out.push(Err(failed(&member_name, "too_large", "archive member exceeds the upload limit")));
                continue;
            }
            if is_zip(&data) {
                out.push(Err(failed(&member_name, "nested_archive", "archives inside archives are not expanded")));
                continue;
            }
            out.push(Ok(Input {
                name: member_name,
                bytes: data,
                archive: Some(name.clone()),
            }));
        }
    }
    out
}

/// A parsed document, or the entry explaining why there is none.
pub enum Outcome {
    Parsed(Document),
    Rejected(UploadEntry),
}

/// Parses every PDF in the upload. A `.json` file whose stem matches a PDF
/// in the same archive (or both at top level) is used as that PDF's word
/// layer instead of the built-in extractor.
pub fn process(files: Vec<(String, Vec<u8>)>, max_member_bytes: usize) -> Vec<Outcome> {
    let inputs = expand(files, max_member_bytes);
    let sidecars: Vec<&Input> = inputs.iter().flatten().filter(|i| is_sidecar_name(&i.name)).collect();
    let paired = |s: &Input, pdf: &Input| s.archive == pdf.archive && stem(&s.name) == stem(&pdf.name);

    let mut outcomes = Vec::new();
    for input in &inputs {
        let input = match input {
            Err(entry) => {
                outcomes.push(Outcome::Rejected(entry.clone()));
                continue;
            }
            Ok(i) => i,
        };
        if is_sidecar_name(&input.name) {
            let pdfs = inputs.iter().flatten().filter(|p| !is_sidecar_name(&p.name));
            if !pdfs.into_iter().any(|p| paired(input, p)) {
                outcomes.push(Outcome::Rejected(failed(
                    &input.name,
                    "unpaired_sidecar",
                    "no PDF with the same name in this upload",
                )));
            }
            continue;
        }
        let parsed = match sidecars.iter().find(|s| paired(s, input)) {
            Some(s) => Sidecar::from_json(&s.bytes)
                .and_then(|sc| ingest_sidecar(&input.bytes, &sc, &input.name))
                .map_err(|e| failed(&input.name, "bad_sidecar", e.to_string())),
            None => parse_document(&input.bytes, &input.name).map_err(|e| match e {
                ExtractError::UnsupportedFeature(_) => UploadEntry {
                    status: FileStatus::SidecarRequired,
                    doc_id: Some(DocId::from_bytes(&input.bytes)),
                    ..failed(&input.name, "unsupported_feature", e.to_string())
                },
                e => {
                    let (code, msg) = extract_error(&e);
                    failed(&input.name, code, msg)
                }
            }),
        };
        outcomes.push(match parsed {
            Ok(doc) => Outcome::Parsed(doc),
            Err(entry) => Outcome::Rejected(entry),
        });
    }
    outcomes
}

pub fn parsed_entry(doc: &Document, registration: Registration) -> UploadEntry {
    UploadEntry {
        filename: doc.filename.clone(),
        doc_id: Some(doc.doc_id.clone()),
        page_count: Some(doc.page_count()),
        status: FileStatus::Parsed,
        detail: None,
        migration: match registration {
            Registration::Attached => None,
            m => Some(m),
        },
    }
}
