//! Chat-completions style HTTP backend.

use std::time::Duration;

use serde_json::{json, Value};

use super::{Backend, BackendKind, OracleError, OracleRequest};

#[derive(Debug, Clone, PartialEq)]
pub struct LiveConfig {
    pub url: String,
    pub key: Option<String>,
    pub model: String,
    pub timeout: Duration,
}

impl LiveConfig {
    pub const DEFAULT_MODEL: &'static str = "gpt-3.5-turbo";

    /// Reads `ORACLE_URL` (required), `ORACLE_KEY` and `ORACLE_MODEL`.
    pub fn from_env() -> Result<Self, OracleError> {
        let url = std::env::var("ORACLE_URL")
            .map_err(|_| OracleError::BackendUnavailable("ORACLE_URL is not set".into()))?;
        Ok(Self {
            url,
            key: std::env::var("ORACLE_KEY").ok().filter(|k| !k.is_empty()),
            model: std::env::var("ORACLE_MODEL").unwrap_or_else(|_| Self::DEFAULT_MODEL.into()),
            timeout: Duration::from_secs(120),
        })
    }
}

pub struct LiveBackend {
    config: LiveConfig,
    agent: ureq::Agent,
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        Self { config, agent }
    }

    pub fn from_env() -> Result<Self, OracleError> {
        Ok(Self::new(LiveConfig::from_env()?))
    }

    /// Request body: `{model, messages: [{role, content}...], temperature}`.
    pub fn request_body(&self, request: &OracleRequest<'_>) -> Value {
        let mut messages = Vec::new();
        if let Some(system) = &request.prompt.system {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": request.prompt.human}));
        let mut body = json!({"model": self.config.model, "messages": messages});
        if let Some(t) = request.temperature {
            body["temperature"] = json!(t);
        }
        body
    }
}

/// First choice text: `choices[0].message.content`, or `choices[0].text`.
pub(crate) fn first_choice_text(response: &Value) -> Option<String> {
    let choice = response.get("choices")?.get(0)?;
    choice
        .get("message")
        .and_then(|m| m.get("content"))
        .or_else(|| choice.get("text"))
        .and_then(Value::as_str)
        .map(str::to_string)
}

impl Backend for LiveBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Live
    }

    fn complete(&self, request: &OracleRequest<'_>) -> Result<String, OracleError> {
        let body = self.request_body(request);
        let mut call = self.agent.post(&self.config.url).header("Content-Type", "application/json");
        if let Some(key) = &self.config.key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = call
            .send_json(&body)
            .map_err(|e| OracleError::BackendUnavailable(e.to_string()))?;
        let value: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| OracleError::BackendUnavailable(format!("unreadable response: {e}")))?;
        first_choice_text(&value)
            .ok_or_else(|| OracleError::BackendUnavailable("response has no choices[0] text".into()))
    }
}
