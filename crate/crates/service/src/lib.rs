//! HTTP JSON API for live games against the engine.
//!
//! Routes: `POST /games`, `GET /games/{id}`, `POST /games/{id}/moves`,
//! `GET /games/{id}/hint`, `DELETE /games/{id}`.

pub mod view;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use nemesis_core::exact::{solve_state, with_stack, Outcome, SearchConfig};
use nemesis_core::graph::{load_instance, serialize_instance};
use nemesis_core::strategy::{heuristic, Engine};
use nemesis_core::{GameState, Instance, Move, Role, Variant};
use serde::Serialize;
use tokio::io::AsyncWriteExt;
use tokio::sync::Mutex;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use view::{CreateRequest, EdgeView, ErrorBody, HintView, MoveResponse, StateView, VertexView};

pub const DEFAULT_BUDGET: u64 = 200_000;

#[derive(Clone, Debug)]
pub struct Config {
    pub default_budget: u64,
    /// Finished or deleted games are appended here as JSON lines.
    pub transcripts: Option<PathBuf>,
    /// `None` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            default_budget: DEFAULT_BUDGET,
            transcripts: None,
            cors_origin: None,
        }
    }
}

struct Session {
    id: String,
    instance: Instance,
    state: GameState,
    human: Role,
    budget: u64,
    created: u64,
    updated: u64,
    logged: bool,
}

impl Session {
    fn view(&self) -> StateView {
        StateView::build(&self.id, &self.state, self.human, self.budget, self.created, self.updated)
    }
}

#[derive(Serialize)]
struct TranscriptLine<'a> {
    id: &'a str,
    instance: serde_json::Value,
    digest: &'a str,
    human_role: Role,
    moves: Vec<Move>,
    #[serde(flatten)]
    status: nemesis_core::Status,
    created: u64,
    updated: u64,
}

#[derive(Clone)]
struct App {
    sessions: Arc<std::sync::Mutex<HashMap<String, Arc<Mutex<Session>>>>>,
    log: Option<Arc<Mutex<PathBuf>>>,
    default_budget: u64,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

enum ApiError {
    BadRequest(String),
    NotFound(String),
    Conflict(String, Option<StateView>),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (code, error, state) = match self {
            ApiError::BadRequest(e) => (StatusCode::BAD_REQUEST, e, None),
            ApiError::NotFound(id) => (StatusCode::NOT_FOUND, format!("no game `{id}`"), None),
            ApiError::Conflict(e, s) => (StatusCode::CONFLICT, e, s),
            ApiError::Internal(e) => (StatusCode::INTERNAL_SERVER_ERROR, e, None),
        };
        (code, Json(ErrorBody { error, state })).into_response()
    }
}

impl App {
    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions.lock().unwrap().get(id).cloned().ok_or_else(|| ApiError::NotFound(id.to_owned()))
    }

    async fn append(&self, s: &Session) {
        let Some(log) = &self.log else {
            return;
        };
        let line = TranscriptLine {
            id: &s.id,
            instance: serde_json::from_str(&serialize_instance(&s.instance)).unwrap_or_default(),
            digest: &s.state.board.digest,
            human_role: s.human,
            moves: s.state.history_moves(),
            status: s.state.status(),
            created: s.created,
            updated: s.updated,
        };
        let mut text = serde_json::to_string(&line).expect("transcript serializes");
        text.push('\n');
        let path = log.lock().await;
        let written = async {
            let mut f = tokio::fs::OpenOptions::new().create(true).append(true).open(&*path).await?;
            f.write_all(text.as_bytes()).await?;
            f.flush().await
        };
        if let Err(e) = written.await {
            tracing::warn!("cannot append transcript to {}: {e}", path.display());
        }
    }
}

/// Lets the engine reply while it is its turn. Returns the engine's move.
async fn engine_turn(s: &mut Session) -> Option<Move> {
    if s.state.status().is_terminal() || Role::to_move(s.state.phase) == s.human {
        return None;
    }
    let engine = Engine::new(Role::to_move(s.state.phase), s.budget);
    let snapshot = s.state.clone();
    let choice = tokio::task::spawn_blocking(move || with_stack(|| engine.decide(&snapshot).map(|(a, _)| a)))
        .await
        .ok()
        .flatten();
    let a = choice.filter(|&a| s.state.check(a).is_ok())?;
    let m = s.state.to_move(a);
    s.state = s.state.apply(a).ok()?;
    Some(m)
}

async fn create(State(app): State<App>, body: Result<Json<CreateRequest>, JsonRejection>) -> Result<Response, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let text = serde_json::to_string(&req.instance).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let (instance, _) = load_instance(&text).map_err(|e| ApiError::BadRequest(format!("invalid instance: {e}")))?;
    if instance.graph.is_exit(&instance.start) {
        return Err(ApiError::BadRequest("start vertex is an exit".into()));
    }
    let t = now();
    let mut s = Session {
        id: uuid::Uuid::new_v4().simple().to_string(),
        state: GameState::from_instance(&instance),
        instance,
        human: req.role,
        budget: req.budget.unwrap_or(app.default_budget),
        created: t,
        updated: t,
        logged: false,
    };
    let engine_move = engine_turn(&mut s).await;
    let body = MoveResponse { state: s.view(), engine_move };
    app.sessions.lock().unwrap().insert(s.id.clone(), Arc::new(Mutex::new(s)));
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn show(State(app): State<App>, Path(id): Path<String>) -> Result<Json<StateView>, ApiError> {
    let session = app.get(&id)?;
    let s = session.lock().await;
    Ok(Json(s.view()))
}

async fn play(
    State(app): State<App>,
    Path(id): Path<String>,
    body: Result<Json<Move>, JsonRejection>,
) -> Result<Json<MoveResponse>, ApiError> {
    let session = app.get(&id)?;
    let Ok(mut s) = session.try_lock() else {
        return Err(ApiError::Conflict("another move is being processed; retry".into(), None));
    };
    let Json(m) = body.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    if s.state.status().is_terminal() {
        return Err(ApiError::Conflict("game is over".into(), Some(s.view())));
    }
    if Role::to_move(s.state.phase) != s.human {
        return Err(ApiError::Conflict("not your turn".into(), Some(s.view())));
    }
    let next = match s.state.apply_move(&m) {
        Ok(next) => next,
        Err(e) => return Err(ApiError::Conflict(format!("illegal move {m}: {e}"), Some(s.view()))),
    };
    s.state = next;
    let engine_move = engine_turn(&mut s).await;
    s.updated = now();
    if s.state.status().is_terminal() && !s.logged {
        s.logged = true;
        app.append(&s).await;
    }
    Ok(Json(MoveResponse { state: s.view(), engine_move }))
}

/// Exact verdict from the current state when the budget allows, otherwise a
/// heuristic move with an unknown winner.
pub fn hint(state: &GameState, budget: u64) -> HintView {
    if let Some(w) = state.status().winner() {
        let winner = if w == Role::Fugitive { Outcome::Fugitive } else { Outcome::Adversary };
        return HintView { winner_from_here: winner, suggested_move: None, exact: true, nodes: 0 };
    }
    let mut nodes = 0;
    if state.variant() != Variant::CatHerding {
        let v = solve_state(state, &SearchConfig::with_budget(budget));
        nodes = v.nodes_explored;
        if v.exact {
            return HintView {
                winner_from_here: v.winner,
                suggested_move: v.principal_variation.and_then(|pv| pv.into_iter().next()),
                exact: true,
                nodes,
            };
        }
    }
    HintView {
        winner_from_here: Outcome::Unknown,
        suggested_move: heuristic(state).map(|a| state.to_move(a)),
        exact: false,
        nodes,
    }
}

async fn hint_route(State(app): State<App>, Path(id): Path<String>) -> Result<Json<HintView>, ApiError> {
    let session = app.get(&id)?;
    let (state, budget) = {
        let s = session.lock().await;
        (s.state.clone(), s.budget)
    };
    let h = tokio::task::spawn_blocking(move || with_stack(|| hint(&state, budget)))
        .await
        .map_err(|e| ApiError::Internal(format!("hint failed: {e}")))?;
    Ok(Json(h))
}

async fn remove(State(app): State<App>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let session = app.sessions.lock().unwrap().remove(&id).ok_or_else(|| ApiError::NotFound(id.clone()))?;
    let s = session.lock().await;
    if !s.logged {
        app.append(&s).await;
    }
    Ok(StatusCode::NO_CONTENT)
}

pub fn router(cfg: Config) -> Router {
    let app = App {
        sessions: Arc::default(),
        log: cfg.transcripts.map(|p| Arc::new(Mutex::new(p))),
        default_budget: cfg.default_budget,
    };
    let origin = match cfg.cors_origin.as_deref().and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new().allow_origin(origin).allow_methods(Any).allow_headers(Any);
    Router::new()
        .route("/games", post(create))
        .route("/games/{id}", get(show).delete(remove))
        .route("/games/{id}/moves", post(play))
        .route("/games/{id}/hint", get(hint_route))
        .layer(cors)
        .with_state(app)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, cfg: Config) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(cfg)).await
}
