//! HTTP/JSON front end for phonoblocks.
//!
//! Sessions live in memory; every accepted command is appended to the
//! session's JSON Lines log before the response goes out, so any session
//! can be rebuilt with [`phonoblocks::session::replay`].

mod api;
pub mod config;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use phonoblocks::layout::{phoneme_keyboard, LayoutGrid};
use phonoblocks::lexicon::{load_artifacts, Lexicon};
use phonoblocks::session::{
    Command, LogHeader, LogWriter, Output, SessionError, SessionInit, SessionKind, SessionState, LOG_SCHEMA,
};
use tokio::sync::{Mutex, RwLock};

pub use api::{router, API_SCHEMA};
pub use config::{Config, ConfigError, CONFIG_ENV};

pub struct LiveSession {
    pub id: String,
    pub kind: SessionKind,
    /// Milliseconds since the Unix epoch.
    pub created_at: u64,
    pub log_path: PathBuf,
    pub state: SessionState,
    log: LogWriter,
}

impl LiveSession {
    /// Runs `command`; the log line is written before the state changes.
    pub fn apply(&mut self, command: &Command, lexicon: &Lexicon) -> Result<Output, SessionError> {
        let (next, output) = self.state.apply(command, lexicon)?;
        self.log.append(command)?;
        self.state = next;
        Ok(output)
    }

    pub fn flush(&mut self) -> Result<(), SessionError> {
        self.log.sync()
    }
}

pub struct AppState {
    pub config: Config,
    pub lexicon: Arc<Lexicon>,
    pub phoneme_grid: LayoutGrid,
    sessions: RwLock<HashMap<String, Arc<Mutex<LiveSession>>>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new(config: Config, lexicon: Arc<Lexicon>) -> anyhow::Result<Arc<AppState>> {
        config.validate()?;
        std::fs::create_dir_all(&config.log_dir)
            .with_context(|| format!("creating log directory {}", config.log_dir.display()))?;
        let phoneme_grid = phoneme_keyboard(&config.mds, config.grid)
            .context("building the phoneme keyboard")?
            .grid;
        let first = first_free_id(&config.log_dir)?;
        Ok(Arc::new(AppState {
            config,
            lexicon,
            phoneme_grid,
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(first),
        }))
    }

    pub async fn create(&self, init: SessionInit) -> Result<(Arc<Mutex<LiveSession>>, Output), SessionError> {
        let (state, output) = SessionState::init(&init, &self.lexicon)?;
        let n = self.next_id.fetch_add(1, Ordering::SeqCst);
        let id = format!("s{n:06}");
        let log_path = self.config.log_dir.join(format!("{id}.jsonl"));
        let log = LogWriter::create(
            &log_path,
            &LogHeader {
                schema: LOG_SCHEMA.to_string(),
                session_id: id.clone(),
                init: init.clone(),
            },
        )?;
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        let live = Arc::new(Mutex::new(LiveSession {
            id: id.clone(),
            kind: init.kind(),
            created_at,
            log_path,
            state,
            log,
        }));
        self.sessions.write().await.insert(id, live.clone());
        Ok((live, output))
    }

    pub async fn get(&self, id: &str) -> Option<Arc<Mutex<LiveSession>>> {
        self.sessions.read().await.get(id).cloned()
    }

    /// Syncs every open log to disk.
    pub async fn flush_all(&self) {
        let sessions: Vec<_> = self.sessions.read().await.values().cloned().collect();
        for s in sessions {
            let mut s = s.lock().await;
            if let Err(e) = s.flush() {
                tracing::warn!(session = %s.id, error = %e, "flushing session log failed");
            }
        }
    }
}

/// Session ids continue after any logs already in the directory.
fn first_free_id(dir: &Path) -> anyhow::Result<u64> {
    let mut max = 0;
    for entry in std::fs::read_dir(dir)? {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if let Some(n) = name
            .strip_prefix('s')
            .and_then(|r| r.strip_suffix(".jsonl"))
            .and_then(|n| n.parse::<u64>().ok())
        {
            max = max.max(n);
        }
    }
    Ok(max + 1)
}

/// Loads the lexicon and serves until Ctrl-C, then syncs the logs.
pub async fn serve(config: Config) -> anyhow::Result<()> {
    let lexicon = load_artifacts(&config.lexicon_dir)?;
    let state = AppState::new(config, Arc::new(lexicon))?;
    let addr = std::net::SocketAddr::from(([127, 0, 0, 1], state.config.port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    tracing::info!(%addr, words = state.lexicon.word_count(), "serving");
    let app = router(state.clone());
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    state.flush_all().await;
    Ok(())
}
