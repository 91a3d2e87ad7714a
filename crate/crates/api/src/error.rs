use axum::extract::multipart::MultipartError;
use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use dvre_core::contracts::{CallError, ContractError};
use dvre_core::keynet::{AccError, KeynetError, NodeDenial};
use dvre_core::ledger::{LedgerError, Receipt};
use dvre_core::store::StoreError;

use crate::session::SessionError;
use crate::wire::ErrorBody;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: &'static str,
    pub message: String,
    pub receipt: Option<Box<Receipt>>,
    pub reasons: Vec<NodeDenial>,
}

impl ApiError {
    pub fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            message: message.into(),
            receipt: None,
            reasons: Vec::new(),
        }
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.kind.to_string(),
            message: self.message,
            receipt: self.receipt.map(|r| *r),
            reasons: self.reasons,
        };
        (self.status, Json(body)).into_response()
    }
}

/// Status for a contract revert.
pub fn revert_status(reason: &ContractError) -> StatusCode {
    use ContractError::*;
    match reason {
        OnlyGroupOwner | AddressMismatch | OwnerMismatch | NotRegistered | NotMember => {
            StatusCode::FORBIDDEN
        }
        AlreadyRegistered | DuplicateHash => StatusCode::CONFLICT,
        InvalidWindow | EmptyField(_) | CodeMismatch(_) | BadPayload(_) | BadReference(_) => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::ChallengeReused => StatusCode::CONFLICT,
            _ => StatusCode::UNAUTHORIZED,
        };
        let kind = match e {
            SessionError::ChallengeReused => "challenge_reused",
            SessionError::Expired | SessionError::MissingToken => "unauthenticated",
            SessionError::UnknownChallenge | SessionError::BadSignature => "bad_signature",
        };
        Self::new(status, kind, e.to_string())
    }
}

impl From<LedgerError> for ApiError {
    fn from(e: LedgerError) -> Self {
        match e {
            LedgerError::TimeRegression { .. } => {
                Self::new(StatusCode::CONFLICT, "time_regression", e.to_string())
            }
            LedgerError::UnknownContract(_) => Self::not_found(e.to_string()),
            other => Self::internal(other.to_string()),
        }
    }
}

impl From<CallError> for ApiError {
    fn from(e: CallError) -> Self {
        match e {
            CallError::Reverted { reason, receipt } => Self {
                status: revert_status(&reason),
                kind: "reverted",
                message: reason.to_string(),
                receipt: Some(receipt),
                reasons: Vec::new(),
            },
            CallError::Ledger(e) => e.into(),
            CallError::UnknownGroup(_) | CallError::NotRegistered(_) => {
                Self::not_found(e.to_string())
            }
            CallError::AccessDenied(_) => {
                Self::new(StatusCode::FORBIDDEN, "access_denied", e.to_string())
            }
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::QuotaExceededFiles { .. } | StoreError::QuotaExceededBytes { .. } => {
                Self::new(StatusCode::INSUFFICIENT_STORAGE, "quota_exceeded", e.to_string())
            }
            StoreError::NotFound(_) => Self::not_found(e.to_string()),
            StoreError::InvalidCid(_) => Self::unprocessable(e.to_string()),
            StoreError::IntegrityFailure(_) => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "integrity_failure", e.to_string())
            }
            StoreError::CorruptIndex { .. } | StoreError::Io(_) => Self::internal(e.to_string()),
        }
    }
}

impl From<KeynetError> for ApiError {
    fn from(e: KeynetError) -> Self {
        let message = e.to_string();
        match e {
            KeynetError::AccessDenied { reasons, .. } => Self {
                reasons,
                ..Self::new(StatusCode::FORBIDDEN, "access_denied", message)
            },
            KeynetError::Store(s) => s.into(),
            KeynetError::IntegrityFailure(_) => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "integrity_failure", message)
            }
            KeynetError::NodeUnavailable { .. } => {
                Self::new(StatusCode::SERVICE_UNAVAILABLE, "node_unavailable", message)
            }
            KeynetError::NotRegistered(_) => {
                Self::new(StatusCode::FORBIDDEN, "not_registered", message)
            }
            KeynetError::Acc(AccError::UnknownGroup(_)) => Self::not_found(message),
            KeynetError::Acc(_) | KeynetError::NetworkMismatch { .. } => {
                Self::unprocessable(message)
            }
            KeynetError::Wallet(_) => Self::new(StatusCode::UNAUTHORIZED, "bad_signature", message),
            KeynetError::UnknownKeyId(..) | KeynetError::NoSuchNode(_) | KeynetError::Share(_) => {
                Self::internal(message)
            }
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::unprocessable(e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        Self::unprocessable(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::unprocessable(e.body_text())
    }
}

impl From<MultipartError> for ApiError {
    fn from(e: MultipartError) -> Self {
        let status = e.status();
        if status == StatusCode::PAYLOAD_TOO_LARGE {
            Self::new(status, "too_large", e.body_text())
        } else {
            Self::unprocessable(e.body_text())
        }
    }
}
