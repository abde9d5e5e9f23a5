//! Session-oriented HTTP benchmark service.
//!
//! The whole behavior lives in [`Store`], a synchronous, thread-safe session
//! store; the HTTP layer in [`http`] is a thin axum wrapper around it, and
//! [`LocalTransport`] exposes the very same store through the client-facing
//! [`hunl_core::protocol::SessionTransport`] trait for in-process matches.
//! Both paths serialize the identical message schema, so a match driven
//! locally and one driven over the wire see byte-identical states.
//!
//! # Session lifecycle
//!
//! A session plays `num_hands` hands between the external agent (always
//! seat 0) and a server-side opponent. The small blind alternates every hand
//! (`sb_seat = hand_id % 2`). After every agent action the store auto-plays
//! the opponent until the agent is to act again or the hand ends; finished
//! hands are appended to `hands.jsonl` and the next hand is dealt eagerly,
//! skipping past any hands the opponent folds away before the agent ever
//! acts. Opponent decisions draw from a deterministic per-decision RNG, so a
//! session is a pure function of `(seed, opponent spec, agent actions)`.
//!
//! # Crash recovery
//!
//! `session.json` is written once at creation; completed hands are the only
//! other state on disk. On restart the store re-deals the in-flight hand from
//! scratch (mid-hand actions are deliberately not persisted — the deal is
//! deterministic, so a deterministic agent replays to the identical record)
//! and resumes at the exact decision point.

pub mod http;
mod local;
mod store;

pub use local::LocalTransport;
pub use store::{ServiceConfig, Store};

use hunl_core::protocol::{ErrorBody, RaiseRangeView};

/// Everything that can go wrong serving a request; each variant maps to one
/// HTTP status and a stable machine-readable error code.
#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("unknown opponent {0:?}")]
    UnknownOpponent(String),
    #[error("invalid request: {0}")]
    Validation(String),
    #[error("illegal action: {detail}")]
    IllegalAction {
        detail: String,
        legal: Vec<String>,
        raise: Option<RaiseRangeView>,
    },
    #[error("session has completed all hands")]
    SessionComplete,
    #[error("session is busy with another request")]
    Busy,
    #[error("session has no completed hands")]
    NoHands,
    #[error("missing or invalid bearer token")]
    Unauthorized,
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::UnknownOpponent(_) => 404,
            ServiceError::Validation(_) | ServiceError::IllegalAction { .. } => 400,
            ServiceError::SessionComplete | ServiceError::Busy | ServiceError::NoHands => 409,
            ServiceError::Unauthorized => 401,
            ServiceError::Internal(_) => 500,
        }
    }

    /// Stable error code used in response bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownOpponent(_) => "unknown_opponent",
            ServiceError::Validation(_) => "invalid_request",
            ServiceError::IllegalAction { .. } => "illegal_action",
            ServiceError::SessionComplete => "session_complete",
            ServiceError::Busy => "busy",
            ServiceError::NoHands => "no_hands",
            ServiceError::Unauthorized => "unauthorized",
            ServiceError::Internal(_) => "internal",
        }
    }

    pub fn body(&self) -> ErrorBody {
        let (legal_actions, raise_range) = match self {
            ServiceError::IllegalAction { legal, raise, .. } => {
                (Some(legal.clone()), *raise)
            }
            _ => (None, None),
        };
        ErrorBody {
            error: self.code().to_string(),
            detail: self.to_string(),
            legal_actions,
            raise_range,
        }
    }
}
