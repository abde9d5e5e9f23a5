//! Error types for the engine and its direct consumers.

use thiserror::Error;

use crate::engine::LegalActions;

#[derive(Debug, Clone, Error)]
pub enum EngineError {
    #[error("invalid card: {0}")]
    InvalidCard(String),

    #[error("duplicate card: {0}")]
    DuplicateCard(String),

    #[error("invalid game config: {0}")]
    InvalidConfig(String),

    #[error("illegal action {attempted}; legal: {legal}")]
    IllegalAction {
        attempted: String,
        /// The legal set at the rejected state, so callers can recover.
        legal: LegalActions,
    },

    #[error("hand is already terminal")]
    TerminalState,

    #[error("state is not a showdown terminal")]
    NotShowdown,

    #[error("history parse error at token {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("history replay mismatch: {0}")]
    ReplayMismatch(String),
}
