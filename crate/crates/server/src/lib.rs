//! HTTP API over the annotation store, training queue, inference and
//! evaluation. All state lives under the configured data directory.

pub mod config;
pub mod error;
pub mod routes;
pub mod upload;

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread;

use pdfqa_core::qa::QaService;
use pdfqa_core::Store;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

pub use config::{ConfigError, ServerConfig};
pub use error::ApiError;
pub use routes::{router, AppState};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot open store: {0}")]
    Store(#[from] pdfqa_core::StoreError),
    #[error("cannot start backends: {0}")]
    Qa(#[from] pdfqa_core::qa::QaError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn app_state(config: ServerConfig) -> Result<AppState, ServeError> {
    config.validate()?;
    let store = Arc::new(Store::open(&config.data_dir)?);
    let qa = Arc::new(QaService::new(store.clone(), &config.external_backends)?);
    Ok(AppState {
        store,
        qa,
        config: Arc::new(config),
    })
}

/// Serves on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

/// Binds the configured address and serves until Ctrl-C.
pub async fn run(config: ServerConfig) -> Result<(), ServeError> {
    let addr = config.listen_addr();
    let state = app_state(config)?;
    let listener = TcpListener::bind(&addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    serve(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
        log::info!("shutting down");
    })
    .await?;
    Ok(())
}

/// A server on its own runtime thread, for embedding and tests.
pub struct Server {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<thread::JoinHandle<std::io::Result<()>>>,
}

impl Server {
    /// Starts serving; `config.port` 0 picks a free port.
    pub fn spawn(config: ServerConfig) -> Result<Server, ServeError> {
        let addr = config.listen_addr();
        let state = app_state(config)?;
        let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
        let listener = runtime.block_on(TcpListener::bind(&addr))?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let thread = thread::Builder::new().name("pdfqa-server".into()).spawn(move || {
            runtime.block_on(serve(listener, state, async {
                let _ = stopped.await;
            }))
        })?;
        Ok(Server {
            addr,
            stop: Some(stop),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    /// Graceful shutdown; returns once the store is closed.
    pub fn stop(mut self) -> std::io::Result<()> {
        self.shutdown()
    }

    fn shutdown(&mut self) -> std::io::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().unwrap_or_else(|_| Err(std::io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.shutdown();
    }
}
