//! The LLM adapter: render the prompt, call a chat-completion endpoint,
//! parse and validate the reply, and apply the documented retry policy —
//! K re-prompts appending the validation error, then a flagged
//! check-else-fold fallback. Every attempt lands in a line-delimited cost
//! log (latency, token usage, acceptance) for match accounting.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write as _};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use hunl_core::protocol::GameStateMessage;

use crate::prompt::render_prompt;
use crate::reply::{fallback_action, parse_reply, validate_reply};
use crate::run::{Decision, MessageAgent};
use crate::ClientError;

/// One chat completion: raw text plus token usage when the endpoint
/// reports it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatReply {
    pub text: String,
    pub tokens_in: Option<u64>,
    pub tokens_out: Option<u64>,
}

/// Anything that can turn a prompt into a completion. Implemented for the
/// OpenAI-style HTTP endpoint below and by test fakes.
pub trait ChatCompleter {
    fn complete(&mut self, prompt: &str) -> Result<ChatReply, ClientError>;
}

// ---------------------------------------------------------------------------
// HTTP chat completions.
// ---------------------------------------------------------------------------

/// Blocking client for an OpenAI-compatible `/chat/completions` endpoint.
pub struct HttpChatCompleter {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    /// Opaque JSON object merged into every request body (temperature,
    /// reasoning effort, whatever the provider accepts).
    extra: Option<serde_json::Value>,
    client: reqwest::blocking::Client,
}

impl HttpChatCompleter {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        let base = base_url.into();
        HttpChatCompleter {
            endpoint: format!("{}/chat/completions", base.trim_end_matches('/')),
            model: model.into(),
            api_key: None,
            extra: None,
            client: reqwest::blocking::Client::new(),
        }
    }

    /// Configure from the environment: `LLM_BASE_URL` and `LLM_MODEL`
    /// (required), `LLM_API_KEY` (optional bearer token), and
    /// `LLM_EXTRA_OPTIONS` (optional JSON object passed through verbatim).
    pub fn from_env() -> Result<Self, ClientError> {
        let base = std::env::var("LLM_BASE_URL")
            .map_err(|_| ClientError::Completion("LLM_BASE_URL is not set".into()))?;
        let model = std::env::var("LLM_MODEL")
            .map_err(|_| ClientError::Completion("LLM_MODEL is not set".into()))?;
        let mut completer = HttpChatCompleter::new(base, model);
        if let Ok(key) = std::env::var("LLM_API_KEY") {
            completer.api_key = Some(key);
        }
        if let Ok(extra) = std::env::var("LLM_EXTRA_OPTIONS") {
            let value: serde_json::Value = serde_json::from_str(&extra).map_err(|e| {
                ClientError::Completion(format!("LLM_EXTRA_OPTIONS is not valid JSON: {e}"))
            })?;
            completer.extra = Some(value);
        }
        Ok(completer)
    }

    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(key.into());
        self
    }

    pub fn with_extra_options(mut self, options: serde_json::Value) -> Self {
        self.extra = Some(options);
        self
    }

    /// The request body for `prompt`: model + single user message, with the
    /// extra options merged in at the top level.
    fn request_body(&self, prompt: &str) -> serde_json::Value {
        let mut body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(serde_json::Value::Object(extra)) = &self.extra {
            let target = body.as_object_mut().expect("body is an object");
            for (key, value) in extra {
                target.insert(key.clone(), value.clone());
            }
        }
        body
    }
}

impl ChatCompleter for HttpChatCompleter {
    fn complete(&mut self, prompt: &str) -> Result<ChatReply, ClientError> {
        let body = self.request_body(prompt);
        let mut request = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| ClientError::Completion(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| ClientError::Completion(e.to_string()))?;
        if !status.is_success() {
            return Err(ClientError::Completion(format!(
                "completion endpoint returned {status}: {text}"
            )));
        }
        parse_completion(&text)
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<ChatUsage>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: String,
}

#[derive(Deserialize)]
struct ChatUsage {
    #[serde(default)]
    prompt_tokens: Option<u64>,
    #[serde(default)]
    completion_tokens: Option<u64>,
}

/// Decode an OpenAI-style completion body into the first choice's text.
fn parse_completion(text: &str) -> Result<ChatReply, ClientError> {
    let parsed: ChatResponse = serde_json::from_str(text)
        .map_err(|e| ClientError::Completion(format!("bad completion body: {e}")))?;
    let choice = parsed
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| ClientError::Completion("completion carried no choices".into()))?;
    let usage = parsed.usage;
    Ok(ChatReply {
        text: choice.message.content,
        tokens_in: usage.as_ref().and_then(|u| u.prompt_tokens),
        tokens_out: usage.as_ref().and_then(|u| u.completion_tokens),
    })
}

// ---------------------------------------------------------------------------
// Cost log.
// ---------------------------------------------------------------------------

/// One line of the cost log. Model calls carry their latency and usage with
/// `fallback: false`; `accepted` marks the line whose action was submitted.
/// When every call fails, one trailing line records the check-else-fold
/// decision itself (`accepted: true, fallback: true`, no usage).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostRecord {
    pub hand_id: u64,
    pub attempt: u32,
    pub latency_ms: u64,
    pub tokens_in: Option<u64>,
    pub tokens_out: Option<u64>,
    pub accepted: bool,
    pub fallback: bool,
}

/// Append-only JSON-lines cost log.
pub struct CostLog {
    out: BufWriter<File>,
}

impl CostLog {
    /// Open (appending) or create the log at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<CostLog, ClientError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(CostLog { out: BufWriter::new(file) })
    }

    pub fn record(&mut self, record: &CostRecord) -> Result<(), ClientError> {
        let line = serde_json::to_string(record)
            .map_err(|e| ClientError::Completion(format!("cost record: {e}")))?;
        writeln!(self.out, "{line}")?;
        self.out.flush()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// The agent.
// ---------------------------------------------------------------------------

/// A model playing over the wire. Completion failures and invalid replies
/// consume attempts alike, so a flaky endpoint degrades to the fallback
/// policy instead of aborting the match.
pub struct LlmAgent<C: ChatCompleter> {
    name: String,
    completer: C,
    /// Re-prompts after the first attempt, each appending the rejection.
    re_prompts: u32,
    log: Option<CostLog>,
}

impl<C: ChatCompleter> LlmAgent<C> {
    pub fn new(name: impl Into<String>, completer: C) -> Self {
        LlmAgent {
            name: name.into(),
            completer,
            re_prompts: 3,
            log: None,
        }
    }

    pub fn with_re_prompts(mut self, re_prompts: u32) -> Self {
        self.re_prompts = re_prompts;
        self
    }

    pub fn with_cost_log(mut self, log: CostLog) -> Self {
        self.log = Some(log);
        self
    }

    fn log_record(&mut self, record: CostRecord) -> Result<(), ClientError> {
        if let Some(log) = &mut self.log {
            log.record(&record)?;
        }
        Ok(())
    }
}

impl<C: ChatCompleter> MessageAgent for LlmAgent<C> {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, msg: &GameStateMessage) -> Result<Decision, ClientError> {
        let base = render_prompt(msg).prompt;
        let mut prompt = base.clone();
        let attempts = 1 + self.re_prompts;
        for attempt in 1..=attempts {
            let started = Instant::now();
            let outcome = self.completer.complete(&prompt);
            let latency_ms = started.elapsed().as_millis() as u64;
            let (usage, verdict) = match outcome {
                Ok(reply) => {
                    let verdict =
                        parse_reply(&reply.text).and_then(|r| validate_reply(&r, msg));
                    ((reply.tokens_in, reply.tokens_out), verdict)
                }
                Err(err) => ((None, None), Err(err)),
            };
            let accepted = verdict.is_ok();
            self.log_record(CostRecord {
                hand_id: msg.hand_id,
                attempt,
                latency_ms,
                tokens_in: usage.0,
                tokens_out: usage.1,
                accepted,
                fallback: false,
            })?;
            match verdict {
                Ok(request) => {
                    return Ok(Decision { request, fallback: false });
                }
                Err(err) => {
                    prompt = format!(
                        "{base}\nYour previous reply was rejected: {err}\n\
                         Respond again with a single JSON object containing \
                         \"reasoning\", \"action\" (one of the legal_actions), \
                         and \"amount\" only when action is \"b\"."
                    );
                }
            }
        }
        self.log_record(CostRecord {
            hand_id: msg.hand_id,
            attempt: attempts + 1,
            latency_ms: 0,
            tokens_in: None,
            tokens_out: None,
            accepted: true,
            fallback: true,
        })?;
        Ok(Decision {
            request: fallback_action(msg),
            fallback: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hunl_core::engine::{deal_hand, GameConfig};
    use hunl_core::protocol::message_for_seat;

    /// Canned reply sequence; records every prompt it was shown.
    struct FakeCompleter {
        replies: Vec<Result<String, String>>,
        next: usize,
        prompts: Vec<String>,
    }

    impl FakeCompleter {
        fn new(replies: Vec<Result<String, String>>) -> Self {
            FakeCompleter { replies, next: 0, prompts: Vec::new() }
        }
    }

    impl ChatCompleter for FakeCompleter {
        fn complete(&mut self, prompt: &str) -> Result<ChatReply, ClientError> {
            self.prompts.push(prompt.to_string());
            let reply = self.replies.get(self.next).cloned().unwrap_or_else(|| {
                panic!("completer called more than {} times", self.replies.len())
            });
            self.next += 1;
            match reply {
                Ok(text) => Ok(ChatReply { text, tokens_in: Some(10), tokens_out: Some(5) }),
                Err(err) => Err(ClientError::Completion(err)),
            }
        }
    }

    fn sb_open_message() -> GameStateMessage {
        let state = deal_hand(GameConfig::default(), 3, 0, 0);
        message_for_seat(&state, 0, ["me", "opp"])
    }

    #[test]
    fn accepts_the_first_valid_reply() {
        let completer = FakeCompleter::new(vec![Ok(r#"{"action":"c"}"#.to_string())]);
        let mut agent = LlmAgent::new("m", completer);
        let decision = agent.decide(&sb_open_message()).unwrap();
        assert!(!decision.fallback);
        assert_eq!(decision.request.action, "c");
        assert_eq!(agent.completer.prompts.len(), 1);
    }

    #[test]
    fn re_prompts_carry_the_rejection_and_recover() {
        let completer = FakeCompleter::new(vec![
            Ok("mumble mumble".to_string()),
            Ok(r#"{"action":"b","amount":150}"#.to_string()),
            Ok(r#"{"action":"b","amount":300}"#.to_string()),
        ]);
        let mut agent = LlmAgent::new("m", completer);
        let decision = agent.decide(&sb_open_message()).unwrap();
        assert!(!decision.fallback);
        assert_eq!(decision.request.action, "b");
        assert_eq!(decision.request.amount, Some(300));
        let prompts = &agent.completer.prompts;
        assert_eq!(prompts.len(), 3);
        assert!(prompts[1].contains("rejected"));
        assert!(prompts[1].contains("no JSON object"));
        // The bound violation is echoed back verbatim.
        assert!(prompts[2].contains("outside raise_range [200, 20000]"));
    }

    #[test]
    fn exhausted_attempts_fall_back_to_check_else_fold() {
        let junk = || Ok("no dice".to_string());
        let completer = FakeCompleter::new(vec![junk(), junk(), junk(), junk()]);
        let mut agent = LlmAgent::new("m", completer);
        let decision = agent.decide(&sb_open_message()).unwrap();
        assert!(decision.fallback);
        // The small blind faces the big blind's forced bet: no check, so fold.
        assert_eq!(decision.request.action, "f");
        assert_eq!(agent.completer.prompts.len(), 4);
    }

    #[test]
    fn completer_errors_consume_attempts_instead_of_aborting() {
        let completer = FakeCompleter::new(vec![
            Err("connection reset".to_string()),
            Ok(r#"{"action":"f"}"#.to_string()),
        ]);
        let mut agent = LlmAgent::new("m", completer);
        let decision = agent.decide(&sb_open_message()).unwrap();
        assert!(!decision.fallback);
        assert_eq!(decision.request.action, "f");
        assert!(agent.completer.prompts[1].contains("connection reset"));
    }

    #[test]
    fn cost_log_records_every_attempt_and_the_fallback_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("costs.jsonl");
        let junk = || Ok("nope".to_string());
        let completer = FakeCompleter::new(vec![junk(), junk(), junk(), junk()]);
        let mut agent = LlmAgent::new("m", completer)
            .with_cost_log(CostLog::open(&path).unwrap());
        agent.decide(&sb_open_message()).unwrap();

        let lines: Vec<CostRecord> = std::fs::read_to_string(&path)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 5);
        for (i, line) in lines.iter().take(4).enumerate() {
            assert_eq!(line.attempt, i as u32 + 1);
            assert!(!line.accepted);
            assert!(!line.fallback);
            assert_eq!(line.tokens_in, Some(10));
        }
        assert!(lines[4].accepted && lines[4].fallback);
        assert_eq!(lines[4].tokens_in, None);
    }

    #[test]
    fn completion_body_parsing_reads_the_openai_shape() {
        let body = r#"{
            "id": "x", "object": "chat.completion",
            "choices": [{"index": 0, "message": {"role": "assistant", "content": "{\"action\":\"k\"}"}}],
            "usage": {"prompt_tokens": 812, "completion_tokens": 40, "total_tokens": 852}
        }"#;
        let reply = parse_completion(body).unwrap();
        assert_eq!(reply.text, r#"{"action":"k"}"#);
        assert_eq!(reply.tokens_in, Some(812));
        assert_eq!(reply.tokens_out, Some(40));
        assert!(parse_completion(r#"{"choices":[]}"#).is_err());
    }

    #[test]
    fn extra_options_merge_into_the_request_body() {
        let completer = HttpChatCompleter::new("http://example.invalid/v1/", "m-1")
            .with_extra_options(serde_json::json!({"temperature": 0.2, "max_tokens": 400}));
        assert_eq!(completer.endpoint, "http://example.invalid/v1/chat/completions");
        let body = completer.request_body("hi");
        assert_eq!(body["model"], "m-1");
        assert_eq!(body["temperature"], 0.2);
        assert_eq!(body["max_tokens"], 400);
        assert_eq!(body["messages"][0]["content"], "hi");
    }
}
