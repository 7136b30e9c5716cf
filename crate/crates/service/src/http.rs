use std::convert::Infallible;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use hcsim_core::ReportKind;
use serde::Deserialize;
use serde_json::json;
use tokio_stream::wrappers::errors::BroadcastStreamRecvError;
use tokio_stream::wrappers::BroadcastStream;

use crate::error::ServiceError;
use crate::session::{Command, CreateRequest, SessionManager, StreamMessage};

pub type AppState = Arc<SessionManager>;

pub fn router(manager: AppState) -> Router {
    Router::new()
        .route("/policies", get(policies))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_state).delete(delete_session))
        .route("/sessions/{id}/scenario", post(replace_scenario))
        .route("/sessions/{id}/control", post(control))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/report", get(report))
        .route("/sessions/{id}/log", get(event_log))
        .route("/sessions/{id}/events", get(events))
        .with_state(manager)
}

async fn policies(State(m): State<AppState>) -> Json<serde_json::Value> {
    let registry = m.registry();
    let list: Vec<_> = registry
        .ids()
        .map(|id| json!({ "name": id.key(), "mode": registry.mode_of(id).map(|m| m.to_string()).unwrap_or_default() }))
        .collect();
    Json(json!(list))
}

/// Accepts either `multipart/form-data` (file fields `eet`, `machines`,
/// `workload`; text fields `policy`, `queue_size`, `seed`) or a JSON body with
/// the same keys holding file contents.
async fn read_create_request(req: Request) -> Result<CreateRequest, ServiceError> {
    let is_json = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|ct| ct.starts_with("application/json"));
    if is_json {
        let Json(body) =
            Json::<CreateRequest>::from_request(req, &()).await.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
        return Ok(body);
    }
    let mut multipart = Multipart::from_request(req, &()).await.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    let mut out = CreateRequest::default();
    let (mut eet, mut machines, mut workload) = (None, None, None);
    while let Some(field) = multipart.next_field().await.map_err(|e| ServiceError::BadRequest(e.body_text()))? {
        let name = field.name().unwrap_or_default().to_string();
        let text = field.text().await.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
        match name.as_str() {
            "eet" => eet = Some(text),
            "machines" => machines = Some(text),
            "workload" => workload = Some(text),
            "policy" => out.policy = Some(text),
            "queue_size" => out.queue_size = Some(serde_json::Value::String(text)),
            "seed" => {
                out.seed =
                    Some(text.trim().parse().map_err(|_| ServiceError::BadRequest(format!("invalid seed {text:?}")))?)
            }
            other => return Err(ServiceError::BadRequest(format!("unexpected field {other:?}"))),
        }
    }
    let missing = |what| ServiceError::BadRequest(format!("missing {what} file"));
    out.eet = eet.ok_or_else(|| missing("eet"))?;
    out.machines = machines.ok_or_else(|| missing("machines"))?;
    out.workload = workload.ok_or_else(|| missing("workload"))?;
    Ok(out)
}

async fn create_session(State(m): State<AppState>, req: Request) -> Result<Response, ServiceError> {
    let body = read_create_request(req).await?;
    let state = m.create(body)?;
    Ok((StatusCode::CREATED, Json(state)).into_response())
}

async fn replace_scenario(
    State(m): State<AppState>,
    Path(id): Path<String>,
    req: Request,
) -> Result<Response, ServiceError> {
    let body = read_create_request(req).await?;
    Ok(Json(m.replace_scenario(&id, body)?).into_response())
}

async fn get_state(State(m): State<AppState>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(m.state(&id)?).into_response())
}

async fn delete_session(State(m): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ServiceError> {
    m.remove(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn control(
    State(m): State<AppState>,
    Path(id): Path<String>,
    body: axum::body::Bytes,
) -> Result<Response, ServiceError> {
    let command: Command =
        serde_json::from_slice(&body).map_err(|e| ServiceError::BadRequest(format!("invalid command: {e}")))?;
    Ok(Json(m.apply_control(&id, command)?).into_response())
}

#[derive(Deserialize)]
struct ReportQuery {
    kind: String,
}

fn csv(body: String) -> Response {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response()
}

async fn report(
    State(m): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ReportQuery>,
) -> Result<Response, ServiceError> {
    let kind: ReportKind = q.kind.parse()?;
    Ok(csv(m.report(&id, kind)?))
}

async fn event_log(State(m): State<AppState>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(csv(m.event_log(&id)?))
}

fn to_event(msg: &StreamMessage) -> Event {
    let name = match msg {
        StreamMessage::Applied { .. } => "applied",
        StreamMessage::Mode { .. } => "mode",
        StreamMessage::Reset { .. } => "reset",
    };
    Event::default().event(name).json_data(msg).unwrap_or_else(|_| Event::default().comment("unserializable"))
}

/// Server-sent events: a `snapshot` first, then `applied`, `mode`, and `reset`
/// messages in engine order. A subscriber that falls behind gets a fresh
/// `snapshot` in place of the messages it missed.
async fn events(
    State(m): State<AppState>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ServiceError> {
    let (state, rx) = m.subscribe(&id)?;
    let first = Event::default().event("snapshot").json_data(&state).unwrap_or_default();
    let follow = BroadcastStream::new(rx).map(move |msg| match msg {
        Ok(msg) => to_event(&msg),
        Err(BroadcastStreamRecvError::Lagged(_)) => match m.state(&id) {
            Ok(state) => Event::default().event("snapshot").json_data(&state).unwrap_or_default(),
            Err(_) => Event::default().comment("session gone"),
        },
    });
    let stream = stream::once(async move { first }).chain(follow).map(Ok);
    Ok(Sse::new(stream).keep_alive(KeepAlive::new().interval(Duration::from_secs(15))))
}
