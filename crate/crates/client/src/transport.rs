//! Blocking HTTP implementation of [`SessionTransport`].
//!
//! Transport-level failures (connection refused, timeouts) are retried with
//! bounded doubling backoff; service-level errors (4xx/5xx with an
//! [`ErrorBody`]) are surfaced immediately so callers can react to the
//! legal-action echo.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use hunl_core::aivat::AivatReport;
use hunl_core::protocol::{
    ActionRequest, CreateSessionRequest, CreateSessionResponse, ErrorBody, GameStateMessage,
    LeaderboardEntry, SessionTransport, TransportError,
};

/// Session client for a running service instance.
pub struct HttpTransport {
    base: String,
    client: reqwest::blocking::Client,
    auth_token: Option<String>,
    /// Retries after the first attempt, for transport failures only.
    retries: u32,
    /// First-retry delay; doubles per retry.
    backoff: Duration,
}

impl HttpTransport {
    /// Connect to `base` (e.g. `http://127.0.0.1:8080`), trailing slashes
    /// trimmed. Defaults: 3 retries starting at 250ms backoff.
    pub fn new(base: impl Into<String>) -> Self {
        HttpTransport {
            base: base.into().trim_end_matches('/').to_string(),
            client: reqwest::blocking::Client::new(),
            auth_token: None,
            retries: 3,
            backoff: Duration::from_millis(250),
        }
    }

    /// Send `Authorization: Bearer <token>` on every request.
    pub fn with_auth(mut self, token: impl Into<String>) -> Self {
        self.auth_token = Some(token.into());
        self
    }

    /// Override the transport-failure retry budget and initial backoff.
    pub fn with_retries(mut self, retries: u32, backoff: Duration) -> Self {
        self.retries = retries;
        self.backoff = backoff;
        self
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    fn send<T: DeserializeOwned>(
        &self,
        method: reqwest::Method,
        path: &str,
        body: Option<&impl Serialize>,
    ) -> Result<T, TransportError> {
        let mut delay = self.backoff;
        let mut attempt = 0;
        loop {
            let mut request = self.client.request(method.clone(), self.url(path));
            if let Some(token) = &self.auth_token {
                request = request.bearer_auth(token);
            }
            if let Some(body) = body {
                request = request.json(body);
            }
            match request.send() {
                Ok(response) => return decode(response),
                Err(err) => {
                    if attempt >= self.retries {
                        return Err(TransportError::Transport(err.to_string()));
                    }
                    attempt += 1;
                    std::thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
    }
}

fn decode<T: DeserializeOwned>(response: reqwest::blocking::Response) -> Result<T, TransportError> {
    let status = response.status().as_u16();
    let text = response
        .text()
        .map_err(|e| TransportError::Transport(e.to_string()))?;
    if (200..300).contains(&status) {
        return serde_json::from_str(&text)
            .map_err(|e| TransportError::Transport(format!("bad response body: {e}")));
    }
    let body = serde_json::from_str::<ErrorBody>(&text).unwrap_or_else(|_| ErrorBody {
        error: format!("http_{status}"),
        detail: text,
        legal_actions: None,
        raise_range: None,
    });
    Err(TransportError::Service { status, body })
}

impl SessionTransport for HttpTransport {
    fn create_session(
        &mut self,
        request: &CreateSessionRequest,
    ) -> Result<CreateSessionResponse, TransportError> {
        self.send(reqwest::Method::POST, "/sessions", Some(request))
    }

    fn get_state(&mut self, session_id: &str) -> Result<GameStateMessage, TransportError> {
        self.send::<GameStateMessage>(
            reqwest::Method::GET,
            &format!("/sessions/{session_id}/state"),
            None::<&()>,
        )
    }

    fn submit_action(
        &mut self,
        session_id: &str,
        action: &ActionRequest,
    ) -> Result<GameStateMessage, TransportError> {
        self.send(
            reqwest::Method::POST,
            &format!("/sessions/{session_id}/action"),
            Some(action),
        )
    }

    fn get_metrics(&mut self, session_id: &str) -> Result<AivatReport, TransportError> {
        self.send::<AivatReport>(
            reqwest::Method::GET,
            &format!("/sessions/{session_id}/metrics"),
            None::<&()>,
        )
    }

    fn get_leaderboard(&mut self) -> Result<Vec<LeaderboardEntry>, TransportError> {
        self.send::<Vec<LeaderboardEntry>>(reqwest::Method::GET, "/leaderboard", None::<&()>)
    }
}
