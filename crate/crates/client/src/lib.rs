//! Client SDK for the benchmark service, plus the LLM agent adapter.
//!
//! [`run_session`] drives any [`MessageAgent`] through a full match over any
//! [`hunl_core::protocol::SessionTransport`] — HTTP ([`HttpTransport`]) or
//! in-process — and returns the service's metric report together with
//! decision accounting (latency, fallback counts).
//!
//! The LLM path is [`LlmAgent`]: it renders the benchmark prompt
//! ([`prompt::render_prompt`]), calls a chat-completion endpoint
//! ([`ChatCompleter`]), extracts and validates the model's JSON decision
//! ([`reply`]), re-prompts on invalid output a bounded number of times, and
//! finally falls back to check-else-fold with the decision flagged.

pub mod llm;
pub mod prompt;
pub mod reply;
mod run;
mod transport;

pub use llm::{ChatCompleter, ChatReply, CostLog, CostRecord, HttpChatCompleter, LlmAgent};
pub use run::{resume_session, run_session, Decision, MatchOutcome, MessageAgent, ObservationAgent};
pub use transport::HttpTransport;

use hunl_core::protocol::{ProtocolError, TransportError};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("model reply invalid: {0}")]
    InvalidReply(String),
    #[error("chat endpoint failure: {0}")]
    Completion(String),
    #[error("session stalled: {0}")]
    Stalled(String),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ProtocolError> for ClientError {
    fn from(e: ProtocolError) -> ClientError {
        ClientError::Transport(TransportError::Protocol(e))
    }
}
