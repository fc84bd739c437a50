//! HTTP/JSON facade over the concierge engine.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | POST | `/sessions` | `{persona?}` |
//! | POST | `/sessions/{id}/utterances` | `{frame, context?}` |
//! | GET | `/sessions/{id}/state` | |
//! | GET | `/sessions/{id}/recommendations` | `?lat=&lon=&radius_km=&limit=` |
//! | GET, PUT | `/admin/fv/{term}` | `?persona=` / `{value, persona?}`, admin token |
//! | GET | `/spots` | |
//!
//! Errors are `{"error": {"code", "message"}}` with a stable `code`.
//! Requests to one session are serialized by a per-session lock; different
//! sessions proceed concurrently. With a data directory configured every
//! turn is appended to the session's journal before the response is sent,
//! and sessions are rebuilt from the journals at startup.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use concierge_core::elicitation::ElicitationContext;
use concierge_core::fv_store::{Layer, Provenance};
use concierge_core::recommend::{GeoPoint, RankedSpot, SpotProfile};
use concierge_core::session::{Engine, Session, SessionJournal, StateView, TurnReport};
use concierge_core::{EngineConfig, Error};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

pub const ADMIN_TOKEN_HEADER: &str = "x-admin-token";

struct SessionSlot {
    session: Session,
    journal: Option<SessionJournal>,
}

pub struct AppState {
    engine: Engine,
    sessions: RwLock<HashMap<String, Arc<Mutex<SessionSlot>>>>,
}

impl AppState {
    /// Wraps an engine, restoring journaled sessions when it has a data
    /// directory.
    pub fn new(engine: Engine) -> Result<Arc<Self>, Error> {
        let mut sessions = HashMap::new();
        if let Some(dir) = engine.sessions_dir() {
            for (session, journal) in SessionJournal::restore_all(&engine, &dir)? {
                let slot = SessionSlot { session, journal: Some(journal) };
                sessions.insert(slot.session.id().to_string(), Arc::new(Mutex::new(slot)));
            }
        }
        Ok(Arc::new(Self { engine, sessions: RwLock::new(sessions) }))
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<SessionSlot>>, ApiError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownSession(id.to_string()).into())
    }

    fn with_session<T>(&self, id: &str, f: impl FnOnce(&mut SessionSlot) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let slot = self.slot(id)?;
        let mut guard = slot.lock().unwrap_or_else(|e| e.into_inner());
        f(&mut guard)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/utterances", post(post_utterance))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/recommendations", get(get_recommendations))
        .route("/admin/fv/{term}", get(get_fv).put(put_fv))
        .route("/spots", get(list_spots))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Binds `config.server.host:port` and serves until Ctrl-C.
pub async fn serve(config: EngineConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let addr: SocketAddr = format!("{}:{}", config.server.host, config.server.port).parse()?;
    let state = AppState::new(Engine::from_config(config)?)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("concierge listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, body: ErrorBody { code: code.into(), message: message.into() } }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownSession(_) => StatusCode::NOT_FOUND,
            e if e.is_client_error() => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_json", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_query", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.body }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub persona: Option<String>,
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Option<Json<serde_json::Value>>,
) -> Result<(StatusCode, Json<StateView>), ApiError> {
    let req: CreateSession = match body {
        Some(Json(v)) => serde_json::from_value(v).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_json", e.to_string()))?,
        None => CreateSession::default(),
    };
    if let Some(p) = &req.persona {
        Layer::parse(p).map_err(Error::from)?;
    }
    let id = uuid::Uuid::new_v4().to_string();
    let session = app.engine.new_session(id.clone(), req.persona);
    let journal = match app.engine.sessions_dir() {
        Some(dir) => Some(SessionJournal::create(&dir, session.header())?),
        None => None,
    };
    let view = session.view();
    app.sessions
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert(id.clone(), Arc::new(Mutex::new(SessionSlot { session, journal })));
    Ok((StatusCode::CREATED, Json(view)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Utterance {
    pub frame: String,
    #[serde(default)]
    pub context: ElicitationContext,
}

async fn post_utterance(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<Utterance>, JsonRejection>,
) -> ApiResult<TurnReport> {
    let Json(u) = body?;
    let engine = &app.engine;
    app.with_session(&id, |slot| {
        // Commit only once the turn is durable.
        let mut next = slot.session.clone();
        let report = next.post_utterance(engine, &u.frame, u.context)?;
        if let Some(j) = &slot.journal {
            j.append(next.history().last().expect("turn just recorded"))?;
        }
        slot.session = next;
        Ok(Json(report))
    })
}

async fn get_state(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StateView> {
    app.with_session(&id, |slot| Ok(Json(slot.session.view())))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendQuery {
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    pub radius_km: Option<f64>,
    pub limit: Option<usize>,
}

async fn get_recommendations(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    query: Result<Query<RecommendQuery>, QueryRejection>,
) -> ApiResult<Vec<RankedSpot>> {
    let Query(q) = query?;
    let here = match (q.lat, q.lon) {
        (Some(lat), Some(lon)) => Some(GeoPoint::new(lat, lon).map_err(Error::from)?),
        (None, None) => None,
        _ => return Err(ApiError::new(StatusCode::BAD_REQUEST, "bad_query", "lat and lon must be given together")),
    };
    let affect = app.with_session(&id, |slot| Ok(*slot.session.affect()))?;
    let mut ranked = app.engine.recommend(&affect, here, q.radius_km)?;
    if let Some(n) = q.limit {
        ranked.truncate(n);
    }
    Ok(Json(ranked))
}

async fn list_spots(State(app): State<Arc<AppState>>) -> Json<Vec<SpotProfile>> {
    Json(app.engine.catalog.spots.clone())
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct FvRecord {
    pub term: String,
    pub persona: Option<String>,
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FvQuery {
    pub persona: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FvUpdate {
    pub value: f64,
    #[serde(default)]
    pub persona: Option<String>,
}

fn check_admin(app: &AppState, headers: &HeaderMap) -> Result<(), ApiError> {
    let Some(expected) = app.engine.config.server.admin_token.as_deref() else {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "admin_disabled", "no admin token is configured"));
    };
    let given = headers
        .get(ADMIN_TOKEN_HEADER)
        .and_then(|v| v.to_str().ok())
        .or_else(|| headers.get("authorization").and_then(|v| v.to_str().ok()).and_then(|v| v.strip_prefix("Bearer ")));
    if given != Some(expected) {
        return Err(ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong admin token"));
    }
    Ok(())
}

fn fv_record(app: &AppState, term: String, persona: Option<String>) -> FvRecord {
    let (value, provenance) = app.engine.fv.lookup(&term, persona.as_deref());
    FvRecord { term, persona, value: value.get(), provenance }
}

async fn get_fv(
    State(app): State<Arc<AppState>>,
    headers: HeaderMap,
    Path(term): Path<String>,
    query: Result<Query<FvQuery>, QueryRejection>,
) -> ApiResult<FvRecord> {
    check_admin(&app, &headers)?;
    let Query(q) = query?;
    Ok(Json(fv_record(&app, term, q.persona)))
}

async fn put_fv(
    State(app): State<Arc<AppState>>,
    headers: HeaderMap,
    Path(term): Path<String>,
    body: Result<Json<FvUpdate>, JsonRejection>,
) -> ApiResult<FvRecord> {
    check_admin(&app, &headers)?;
    let Json(u) = body?;
    let layer = match &u.persona {
        Some(p) => Layer::parse(p).map_err(Error::from)?,
        None => Layer::Default,
    };
    app.engine.fv.upsert(&term, u.value, &layer).map_err(Error::from)?;
    Ok(Json(fv_record(&app, term, u.persona)))
}
