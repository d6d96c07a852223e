//! HTTP facade over a trained idiom store and its collocation tables.
//!
//! | route | response |
//! |---|---|
//! | `GET /api/idiomify?phrase=&k=&model=` | `{query, refined_tokens, results: [{idiom, similarity, collocations: {verb, noun, adj, adv}}], reason?}` |
//! | `GET /api/neighbors?idiom=&k=` | `[{idiom, similarity}]`, the query idiom first |
//! | `GET /api/health` | `{status, idioms, vocab, model}` |
//!
//! Errors are `{error}` objects; an unknown idiom also carries `hints`.

mod config;

use std::collections::HashMap;
use std::fs::File;
use std::future::Future;
use std::io::BufReader;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use idiomatch_core::colloc::{CollocationTable, Model};
use idiomatch_core::embed::{nearest_idioms, read_vectors};
use idiomatch_core::idiomify::Idiomify;
use idiomatch_core::lexicon::normalize_key;
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

pub use config::*;

pub const DEFAULT_K: usize = 5;
pub const MAX_K: usize = 50;
const MAX_HINTS: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Core(#[from] idiomatch_core::Error),
}

/// Loaded artifacts shared by all requests.
#[derive(Debug)]
pub struct AppState {
    engine: Idiomify,
}

impl AppState {
    pub fn new(engine: Idiomify) -> Self {
        AppState { engine }
    }

    /// Validates `config` and loads the vectors and every configured table.
    pub fn load(config: &ApiConfig) -> Result<Self, ServiceError> {
        config.validate()?;
        let store = read_vectors(&config.vectors)?;
        let mut engine = Idiomify::new(store, config.default_model).strip_stopwords(config.strip_stopwords);
        for model in Model::ALL {
            if let Some(path) = config.collocations.get(model) {
                let table = CollocationTable::read_tsv(BufReader::new(File::open(path)?), model)?;
                engine = engine.with_table(table);
            }
        }
        log::info!(
            "loaded {} idioms, {} tokens, default model {}",
            engine.store().idiom_count(),
            engine.store().vocab_len(),
            config.default_model
        );
        Ok(AppState { engine })
    }

    pub fn engine(&self) -> &Idiomify {
        &self.engine
    }

    fn hints(&self, query: &str) -> Vec<String> {
        let query = normalize_key(query);
        let common = |key: &str| key.chars().zip(query.chars()).take_while(|(a, b)| a == b).count();
        let best = self.engine.store().idiom_keys().map(common).max().unwrap_or(0);
        if best == 0 {
            return Vec::new();
        }
        self.engine
            .store()
            .idiom_keys()
            .filter(|k| common(k) == best)
            .take(MAX_HINTS)
            .map(String::from)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub idioms: usize,
    pub vocab: usize,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub idiom: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hints: Vec<String>,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (
        status,
        Json(ApiError {
            error: message.into(),
            hints: Vec::new(),
        }),
    )
        .into_response()
}

fn parse_k(params: &HashMap<String, String>) -> Result<usize, String> {
    let Some(raw) = params.get("k") else {
        return Ok(DEFAULT_K);
    };
    match raw.trim().parse::<usize>() {
        Ok(k) if (1..=MAX_K).contains(&k) => Ok(k),
        _ => Err(format!("k must be an integer in 1..={MAX_K}")),
    }
}

async fn idiomify(State(state): State<Arc<AppState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    let phrase = params.get("phrase").map(|p| p.trim()).unwrap_or_default();
    if phrase.is_empty() {
        return error(StatusCode::BAD_REQUEST, "phrase is required");
    }
    let k = match parse_k(&params) {
        Ok(k) => k,
        Err(msg) => return error(StatusCode::BAD_REQUEST, msg),
    };
    let model = match params.get("model").map(|m| m.parse::<Model>()) {
        None => None,
        Some(Ok(m)) if state.engine.has_model(m) => Some(m),
        Some(Ok(m)) => return error(StatusCode::BAD_REQUEST, format!("model {m} is not loaded")),
        Some(Err(_)) => return error(StatusCode::BAD_REQUEST, "model must be one of tf, tfidf, pmi"),
    };
    match state.engine.idiomify(phrase, k, model) {
        Ok(response) => Json(response).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn neighbors(State(state): State<Arc<AppState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    let idiom = params.get("idiom").map(|p| p.trim()).unwrap_or_default();
    if idiom.is_empty() {
        return error(StatusCode::BAD_REQUEST, "idiom is required");
    }
    let k = match parse_k(&params) {
        Ok(k) => k,
        Err(msg) => return error(StatusCode::BAD_REQUEST, msg),
    };
    let store = state.engine.store();
    let key = if store.is_idiom(idiom) { idiom.to_string() } else { normalize_key(idiom) };
    let Some(query) = store.is_idiom(&key).then(|| store.vector_of(&key)).flatten() else {
        let body = ApiError {
            error: format!("unknown idiom {idiom:?}"),
            hints: state.hints(idiom),
        };
        return (StatusCode::NOT_FOUND, Json(body)).into_response();
    };
    let mut out = vec![Neighbor {
        idiom: key.clone(),
        similarity: 1.0,
    }];
    if k > 1 {
        let ranked = match nearest_idioms(store, &query, k + 1) {
            Ok(r) => r,
            Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        };
        out.extend(
            ranked
                .into_iter()
                .filter(|(other, _)| *other != key)
                .take(k - 1)
                .map(|(idiom, similarity)| Neighbor { idiom, similarity }),
        );
    }
    Json(out).into_response()
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    let store = state.engine.store();
    Json(Health {
        status: "ok".into(),
        idioms: store.idiom_count(),
        vocab: store.vocab_len(),
        model: state.engine.default_model(),
    })
}

/// Routes for `state`, with CORS and, when `config.static_dir` is set, the
/// static UI bundle as fallback.
pub fn router(state: Arc<AppState>, config: &ApiConfig) -> Router {
    let cors = match config.cors_origin.as_deref().map(HeaderValue::from_str) {
        Some(Ok(origin)) => CorsLayer::new().allow_origin(origin),
        _ => CorsLayer::new().allow_origin(Any),
    };
    let api = Router::new()
        .route("/api/idiomify", get(idiomify))
        .route("/api/neighbors", get(neighbors))
        .route("/api/health", get(health))
        .with_state(state)
        .layer(cors.allow_methods([axum::http::Method::GET]));
    match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves `app` on `listener` until `shutdown` resolves, then drains
/// in-flight requests.
pub async fn serve<F>(listener: TcpListener, app: Router, shutdown: F) -> Result<(), ServiceError>
where
    F: Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    Ok(())
}

/// Loads artifacts, binds `config.bind` and serves until Ctrl-C. Calls
/// `on_bound` with the bound address before accepting connections.
pub async fn run(config: ApiConfig, on_bound: impl FnOnce(std::net::SocketAddr)) -> Result<(), ServiceError> {
    let state = Arc::new(AppState::load(&config)?);
    let app = router(state, &config);
    let listener = TcpListener::bind(&config.bind).await?;
    on_bound(listener.local_addr()?);
    serve(listener, app, async {
        let _ = tokio::signal::ctrl_c().await;
        log::info!("shutting down");
    })
    .await
}
