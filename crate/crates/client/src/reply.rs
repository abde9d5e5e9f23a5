//! Extracting and validating model decisions.
//!
//! Models wrap their JSON in prose, markdown fences, or multiple candidate
//! objects; [`parse_reply`] scans the raw text and returns the first
//! well-formed object that carries an `action` field. [`validate_reply`]
//! checks the decision against the message's own `legal_actions` and
//! `raise_range`, so nothing illegal is ever forwarded to the service.

use serde::{Deserialize, Serialize};

use hunl_core::engine::Chips;
use hunl_core::protocol::{ActionRequest, GameStateMessage};

use crate::ClientError;

/// A model's decision as stated: reasoning text plus the action vocabulary
/// of the prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReply {
    #[serde(default)]
    pub reasoning: Option<String>,
    pub action: String,
    #[serde(default)]
    pub amount: Option<Chips>,
}

/// Scan `text` for the first balanced JSON object that parses as a
/// [`ModelReply`]. Strings and escapes are honored while balancing, so
/// braces inside reasoning text do not confuse the scan.
pub fn parse_reply(text: &str) -> Result<ModelReply, ClientError> {
    let bytes = text.as_bytes();
    let mut start = 0;
    while let Some(open) = text[start..].find('{') {
        let open = start + open;
        if let Some(end) = balanced_object_end(bytes, open) {
            if let Ok(reply) = serde_json::from_str::<ModelReply>(&text[open..=end]) {
                return Ok(reply);
            }
            // A balanced object that is not a reply (e.g. quoted game state);
            // keep scanning after its opening brace.
        }
        start = open + 1;
    }
    Err(ClientError::InvalidReply(
        "no JSON object with an \"action\" field found in the reply".to_string(),
    ))
}

/// Index of the `}` closing the object whose `{` sits at `open`, if the
/// object is balanced.
fn balanced_object_end(bytes: &[u8], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(open) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Check the reply against the message's legal set and raise range and turn
/// it into a submission. Extraneous `amount` on non-bet actions is dropped
/// (models add it); everything else is strict.
pub fn validate_reply(
    reply: &ModelReply,
    message: &GameStateMessage,
) -> Result<ActionRequest, ClientError> {
    let viewer = message.viewer();
    let legal = viewer.legal_actions.as_deref().ok_or_else(|| {
        ClientError::InvalidReply("the message is not at your decision point".to_string())
    })?;
    if !legal.iter().any(|l| l == &reply.action) {
        return Err(ClientError::InvalidReply(format!(
            "action {:?} is not among legal_actions {:?}",
            reply.action, legal
        )));
    }
    if reply.action == "b" {
        let range = viewer.raise_range.ok_or_else(|| {
            ClientError::InvalidReply("message offers \"b\" but carries no raise_range".to_string())
        })?;
        let amount = reply.amount.ok_or_else(|| {
            ClientError::InvalidReply(
                "action \"b\" requires an amount within raise_range".to_string(),
            )
        })?;
        if amount < range.min || amount > range.max {
            return Err(ClientError::InvalidReply(format!(
                "amount {amount} is outside raise_range [{}, {}]",
                range.min, range.max
            )));
        }
        return Ok(ActionRequest {
            action: "b".to_string(),
            amount: Some(amount),
        });
    }
    Ok(ActionRequest {
        action: reply.action.clone(),
        amount: None,
    })
}

/// The fallback decision once retries are exhausted: check when legal,
/// otherwise fold (one of the two is always available at a decision point).
pub fn fallback_action(message: &GameStateMessage) -> ActionRequest {
    let legal = message
        .viewer()
        .legal_actions
        .clone()
        .unwrap_or_default();
    let action = if legal.iter().any(|l| l == "k") { "k" } else { "f" };
    ActionRequest {
        action: action.to_string(),
        amount: None,
    }
}
