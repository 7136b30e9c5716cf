use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use hcsim_core::{Error as CoreError, ValidationReport};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no session {0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    /// Scenario or configuration the simulator refuses.
    #[error("{0}")]
    Unprocessable(String),
    #[error("scenario is not valid")]
    Invalid(ValidationReport),
    /// Command not legal in the session's current mode.
    #[error("{0}")]
    Conflict(String),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Unprocessable(_) | ServiceError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
        }
    }
}

impl From<CoreError> for ServiceError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Validation(report) => ServiceError::Invalid(report),
            CoreError::Usage(msg) => ServiceError::BadRequest(msg),
            other => ServiceError::Unprocessable(other.to_string()),
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = match &self {
            ServiceError::Invalid(report) => json!({ "error": self.to_string(), "violations": report.violations }),
            _ => json!({ "error": self.to_string() }),
        };
        (self.status(), Json(body)).into_response()
    }
}
