//! HTTP routes over a [`Store`].

use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use moraltopics_core::naming::NamingQuestion;
use moraltopics_core::survey::{ValidationQuestion, NONE_OF_THE_ABOVE, PROMPT};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::store::{Next, Store, StoreError, NO_NAME};

pub const NAMING_PROMPT: &str =
    "Give this cluster a name of one or two words, or answer N/A if no coherent name fits.";

/// Wall-clock source, replaceable in tests.
pub type Clock = Arc<dyn Fn() -> i64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs() as i64)
    })
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<RwLock<Store>>,
    pub clock: Clock,
}

impl AppState {
    pub fn new(store: Store, clock: Clock) -> Self {
        AppState {
            store: Arc::new(RwLock::new(store)),
            clock,
        }
    }
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/banks", get(list_banks))
        .route("/api/banks/{id}/export", get(export))
        .route("/api/banks/{id}/progress", get(progress))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/next", get(next_question))
        .route("/api/sessions/{id}/answers", post(submit_answer))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

pub struct ApiError(StoreError);

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = match &self.0 {
            StoreError::UnknownBank(_) => (StatusCode::NOT_FOUND, "unknown_bank"),
            StoreError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            StoreError::DuplicateParticipant { .. } => (StatusCode::CONFLICT, "duplicate_participant"),
            StoreError::Saturated => (StatusCode::CONFLICT, "bank_saturated"),
            StoreError::SessionClosed(_) => (StatusCode::CONFLICT, "session_closed"),
            StoreError::ScreeningRequired => (StatusCode::CONFLICT, "screening_required"),
            StoreError::NotAssigned(_) => (StatusCode::CONFLICT, "not_assigned"),
            StoreError::QuestionFull(_) => (StatusCode::CONFLICT, "question_full"),
            StoreError::Invalid(_) | StoreError::InvalidName(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "invalid_answer")
            }
            StoreError::EmptyParticipant => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_participant"),
            StoreError::Io { .. } | StoreError::Format(_) | StoreError::Corrupt { .. } => {
                (StatusCode::INTERNAL_SERVER_ERROR, "storage")
            }
        };
        (status, Json(json!({ "error": code, "message": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn poisoned() -> ApiError {
    ApiError(StoreError::Io {
        path: PathBuf::new(),
        source: std::io::Error::other("store lock poisoned"),
    })
}

#[derive(Serialize)]
struct BankSummary {
    bank_id: String,
    kind: &'static str,
    questions: usize,
    screening: bool,
}

async fn list_banks(State(app): State<AppState>) -> ApiResult<Json<Vec<BankSummary>>> {
    let store = app.store.read().map_err(|_| poisoned())?;
    Ok(Json(
        store
            .banks()
            .map(|b| BankSummary {
                bank_id: b.bank_id().to_string(),
                kind: b.kind(),
                questions: b.question_ids().len(),
                screening: b.screening().is_some(),
            })
            .collect(),
    ))
}

#[derive(Deserialize)]
struct CreateSession {
    participant_id: String,
    bank_id: String,
    #[serde(default)]
    metadata: Option<Value>,
}

async fn create_session(State(app): State<AppState>, Json(req): Json<CreateSession>) -> ApiResult<Response> {
    let now = (app.clock)();
    let mut store = app.store.write().map_err(|_| poisoned())?;
    let s = store.create_session(&req.participant_id, &req.bank_id, req.metadata, now)?;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "session_id": s.session_id,
            "participant_id": s.participant_id,
            "bank_id": s.bank_id,
            "assigned": s.assigned_questions.len(),
            "screening_required": s.screening_required,
        })),
    )
        .into_response())
}

fn validation_view(q: &ValidationQuestion) -> Value {
    // Provenance stays server-side; clients see names in served order.
    json!({
        "question_id": q.question_id,
        "prompt": PROMPT,
        "title": q.title,
        "body": q.body,
        "options": q.options.iter().map(|o| o.name.as_str()).collect::<Vec<_>>(),
        "none_option": NONE_OF_THE_ABOVE,
    })
}

fn naming_view(q: &NamingQuestion) -> Value {
    json!({
        "question_id": q.cluster_id.to_string(),
        "prompt": NAMING_PROMPT,
        "keywords": q.keywords,
        "posts": q.example_posts.iter().map(|p| json!({
            "post_id": p.post_id,
            "title": p.title,
            "body_preview": p.body_preview,
        })).collect::<Vec<_>>(),
        "no_name_option": NO_NAME,
    })
}

async fn next_question(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let now = (app.clock)();
    let mut store = app.store.write().map_err(|_| poisoned())?;
    let next = store.next_question(&id, now)?;
    let body = match next {
        Next::Screening(q) => json!({"status": "question", "kind": "screening", "question": validation_view(q)}),
        Next::Validation(q) => json!({"status": "question", "kind": "validation", "question": validation_view(q)}),
        Next::Naming(q) => json!({"status": "question", "kind": "naming", "question": naming_view(q)}),
        Next::Done => json!({"status": "done"}),
        Next::Terminated => json!({"status": "terminated"}),
        Next::Expired => json!({"status": "expired"}),
    };
    let s = store.session(&id).expect("session just served");
    let mut body = body;
    body["answered"] = json!(s.answered.len());
    body["total"] = json!(s.assigned_questions.len());
    Ok(Json(body))
}

#[derive(Deserialize)]
struct SubmitAnswer {
    question_id: String,
    selections: Vec<String>,
}

async fn submit_answer(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<SubmitAnswer>,
) -> ApiResult<Json<super::store::Ack>> {
    let now = (app.clock)();
    let mut store = app.store.write().map_err(|_| poisoned())?;
    Ok(Json(store.submit_answer(&id, &req.question_id, &req.selections, now)?))
}

async fn export(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let store = app.store.read().map_err(|_| poisoned())?;
    let csv = store.export_responses(&id)?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv).into_response())
}

async fn progress(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<super::store::Progress>> {
    let store = app.store.read().map_err(|_| poisoned())?;
    Ok(Json(store.progress(&id)?))
}
