use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use win_core::domains::DomainError;
use win_core::session::SessionError;
use win_core::ArchiveError;

/// Error body `{"error": {"code", "message"}}` with its HTTP status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError { status, code, message: message.into() }
    }

    pub fn invalid_argument(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "INVALID_ARGUMENT", message)
    }

    pub fn not_found(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", message)
    }

    pub fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}: {}", self.code, self.message);
        }
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<ArchiveError> for ApiError {
    fn from(e: ArchiveError) -> ApiError {
        let message = e.to_string();
        match e {
            ArchiveError::UnknownDomain(_) => ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_DOMAIN", message),
            ArchiveError::UnknownParent(_) | ArchiveError::NotFound(_) => ApiError::not_found(message),
            ArchiveError::InvalidGenome(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_GENOME", message),
            ArchiveError::CrossDomainParent { .. } => ApiError::new(StatusCode::CONFLICT, "CONFLICT", message),
            ArchiveError::InvalidArgument(_) => ApiError::invalid_argument(message),
            ArchiveError::CorruptStore { .. } | ArchiveError::Io(_) => ApiError::internal(message),
        }
    }
}

impl From<DomainError> for ApiError {
    fn from(e: DomainError) -> ApiError {
        let message = e.to_string();
        match e {
            DomainError::InvalidGenome(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_GENOME", message),
            DomainError::InvalidSize(..) => ApiError::invalid_argument(message),
            DomainError::DuplicateDomain(_) | DomainError::InvalidDomainId(_) => ApiError::internal(message),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let message = e.to_string();
        match e {
            SessionError::UnknownDomain(_) => ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_DOMAIN", message),
            SessionError::UnknownParent(_) | SessionError::NotFound(_) => ApiError::not_found(message),
            SessionError::CrossDomainParent { .. } => ApiError::new(StatusCode::CONFLICT, "CONFLICT", message),
            SessionError::InvalidPopSize(_) | SessionError::IndexOutOfRange(_) | SessionError::InvalidArgument(_) => {
                ApiError::invalid_argument(message)
            }
            SessionError::EmptySelection => ApiError::new(StatusCode::BAD_REQUEST, "EMPTY_SELECTION", message),
            SessionError::StaleEpoch { .. } => ApiError::new(StatusCode::CONFLICT, "STALE_EPOCH", message),
            SessionError::Expired(_) => ApiError::new(StatusCode::GONE, "SESSION_EXPIRED", message),
            SessionError::Domain(e) => e.into(),
            SessionError::Archive(e) => e.into(),
        }
    }
}
