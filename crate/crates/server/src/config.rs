use std::path::{Path, PathBuf};
use std::time::Duration;

use pdfqa_core::qa::BackendDescriptor;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid value for {0}: {1}")]
    Env(&'static str, String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    pub data_dir: PathBuf,
    pub max_upload_bytes: usize,
    pub external_backends: Vec<BackendDescriptor>,
    /// Sessions idle longer than this refuse further writes.
    pub session_idle_timeout_secs: u64,
    /// Built UI bundle served at `/`, if present.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("data"),
            max_upload_bytes: 64 * 1024 * 1024,
            external_backends: Vec::new(),
            session_idle_timeout_secs: 12 * 3600,
            static_dir: None,
        }
    }
}

/// `id=http://host:port[,id2=...]`; an id ending in `+layout` marks a
/// layout-aware backend.
fn parse_backends(list: &str) -> Result<Vec<BackendDescriptor>, String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|entry| {
            let (id, url) = entry.split_once('=').ok_or_else(|| format!("{entry:?} is not id=url"))?;
            let (id, layout) = match id.strip_suffix("+layout") {
                Some(id) => (id, true),
                None => (id, false),
            };
            if id.is_empty() || url.is_empty() {
                return Err(format!("{entry:?} is not id=url"));
            }
            Ok(BackendDescriptor::external(id, url, layout))
        })
        .collect()
}

impl ServerConfig {
    /// Defaults, then the file (if given), then environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Read(p.to_owned(), e))?;
                Self::from_toml(&text)?
            }
            None => ServerConfig::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = get("PORT") {
            self.port = v.trim().parse().map_err(|_| ConfigError::Env("PORT", v))?;
        }
        if let Some(v) = get("DATA_DIR") {
            self.data_dir = PathBuf::from(v);
        }
        if let Some(v) = get("MAX_UPLOAD_BYTES") {
            self.max_upload_bytes = v.trim().parse().map_err(|_| ConfigError::Env("MAX_UPLOAD_BYTES", v))?;
        }
        if let Some(v) = get("BACKENDS") {
            self.external_backends = parse_backends(&v).map_err(|e| ConfigError::Env("BACKENDS", e))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_upload_bytes == 0 {
            return Err(ConfigError::Invalid("max_upload_bytes must be positive".into()));
        }
        std::fs::create_dir_all(&self.data_dir)
            .map_err(|e| ConfigError::Invalid(format!("data_dir {}: {e}", self.data_dir.display())))?;
        let probe = self.data_dir.join(".write-test");
        std::fs::write(&probe, b"")
            .and_then(|_| std::fs::remove_file(&probe))
            .map_err(|e| ConfigError::Invalid(format!("data_dir {} is not writable: {e}", self.data_dir.display())))?;
        Ok(())
    }

    pub fn listen_addr(&self) -> String {
        format!("{}:{}", self.host, self.port)
    }

    pub fn session_idle_timeout(&self) -> Duration {
        Duration::from_secs(self.session_idle_timeout_secs)
    }
}
