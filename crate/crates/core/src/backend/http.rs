use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use super::{CompletionProvider, CompletionRequest, ProviderError, ProviderReply, RequestMeta, Usage};
use crate::net::{HttpRequest, HttpTransport, Method, TransportError, UreqTransport};

pub const API_KEY_ENV: &str = "ANNOTIS_API_KEY";

/// Request body for a completion endpoint.
pub fn completion_request_body(model: &str, req: &CompletionRequest) -> Value {
    json!({
        "model": model,
        "prompt": req.prompt,
        "max_tokens": req.max_tokens,
        "temperature": req.temperature,
        "stop": req.stop,
        "n": req.n,
    })
}

/// Reads `choices[0].text` and, when present, `usage.{prompt,completion}_tokens`.
pub fn parse_completion_response(body: &str) -> Result<ProviderReply, String> {
    let v: Value = serde_json::from_str(body).map_err(|e| format!("response is not JSON: {e}"))?;
    let text = v
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("text"))
        .and_then(Value::as_str)
        .ok_or_else(|| "response has no choices[0].text".to_string())?
        .to_string();
    let usage = v.get("usage").and_then(|u| {
        let p = u.get("prompt_tokens")?.as_u64()?;
        let c = u.get("completion_tokens")?.as_u64()?;
        Some(Usage { prompt_tokens: p, completion_tokens: c })
    });
    Ok(ProviderReply { text, usage })
}

pub struct HttpProvider {
    url: String,
    model: String,
    api_key: Option<String>,
    timeout: Duration,
    transport: Arc<dyn HttpTransport>,
}

impl HttpProvider {
    pub fn new(url: impl Into<String>, model: impl Into<String>, api_key: Option<String>) -> Self {
        HttpProvider {
            url: url.into(),
            model: model.into(),
            api_key,
            timeout: Duration::from_secs(60),
            transport: Arc::new(UreqTransport::new()),
        }
    }

    /// Credential from `ANNOTIS_API_KEY`.
    pub fn from_env(url: impl Into<String>, model: impl Into<String>) -> Self {
        let key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.trim().is_empty());
        HttpProvider::new(url, model, key)
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_transport(mut self, transport: Arc<dyn HttpTransport>) -> Self {
        self.transport = transport;
        self
    }

    pub fn has_credential(&self) -> bool {
        self.api_key.is_some()
    }
}

impl CompletionProvider for HttpProvider {
    fn id(&self) -> &str {
        &self.model
    }

    fn complete(&self, req: &CompletionRequest, _meta: RequestMeta) -> Result<ProviderReply, ProviderError> {
        let key = self.api_key.as_ref().ok_or(ProviderError::AuthMissing)?;
        let http = HttpRequest {
            method: Method::Post,
            url: self.url.clone(),
            headers: vec![
                ("Content-Type".into(), "application/json".into()),
                ("Authorization".into(), format!("Bearer {key}")),
            ],
            query: vec![],
            body: Some(completion_request_body(&self.model, req).to_string()),
            timeout: self.timeout,
        };
        let resp = match self.transport.send(&http) {
            Ok(r) => r,
            Err(TransportError::OfflineMode(u)) => {
                return Err(ProviderError::Fatal(format!("offline mode: refusing to contact {u}")))
            }
            Err(e) => return Err(ProviderError::Transient(e.to_string())),
        };
        match resp.status {
            200..=299 => parse_completion_response(&resp.body).map_err(ProviderError::Fatal),
            429 | 500..=599 => Err(ProviderError::Transient(format!("HTTP {}", resp.status))),
            s => Err(ProviderError::Fatal(format!("HTTP {s}: {}", truncate(&resp.body, 200)))),
        }
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}
