//! Outbound HTTP, behind a process-wide dial guard.
//!
//! Every live network call goes through [`HttpTransport`]. The bundled
//! [`UreqTransport`] records a dial attempt before connecting and refuses when
//! the process is in offline mode (`ANNOTIS_OFFLINE=1` or [`set_offline`]).
//! Test suites flip offline mode on and assert [`dial_attempts`] stays zero.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::Duration;

static DIAL_ATTEMPTS: AtomicUsize = AtomicUsize::new(0);
static OFFLINE: AtomicBool = AtomicBool::new(false);

pub fn set_offline(offline: bool) {
    OFFLINE.store(offline, Ordering::SeqCst);
}

pub fn is_offline() -> bool {
    OFFLINE.load(Ordering::SeqCst) || std::env::var("ANNOTIS_OFFLINE").map(|v| v == "1" || v == "true").unwrap_or(false)
}

/// Number of times any transport tried to open a connection in this process.
pub fn dial_attempts() -> usize {
    DIAL_ATTEMPTS.load(Ordering::SeqCst)
}

fn guard(url: &str) -> Result<(), TransportError> {
    DIAL_ATTEMPTS.fetch_add(1, Ordering::SeqCst);
    if is_offline() {
        return Err(TransportError::OfflineMode(url.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
}

#[derive(Debug, Clone)]
pub struct HttpRequest {
    pub method: Method,
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub query: Vec<(String, String)>,
    pub body: Option<String>,
    pub timeout: Duration,
}

#[derive(Debug, Clone)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("network disabled (offline mode) for {0}")]
    OfflineMode(String),
    #[error("request timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connect(String),
}

pub trait HttpTransport: Send + Sync {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

#[derive(Debug, Default, Clone)]
pub struct UreqTransport {
    user_agent: Option<String>,
}

impl UreqTransport {
    pub fn new() -> Self {
        UreqTransport::default()
    }

    pub fn with_user_agent(ua: impl Into<String>) -> Self {
        UreqTransport { user_agent: Some(ua.into()) }
    }
}

impl HttpTransport for UreqTransport {
    fn send(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        guard(&req.url)?;
        let mut cfg = ureq::Agent::config_builder().timeout_global(Some(req.timeout)).http_status_as_error(false);
        if let Some(ua) = &self.user_agent {
            cfg = cfg.user_agent(ua.as_str());
        }
        let agent: ureq::Agent = cfg.build().into();
        let result = match req.method {
            Method::Get => {
                let mut b = agent.get(&req.url);
                for (k, v) in &req.headers {
                    b = b.header(k, v);
                }
                for (k, v) in &req.query {
                    b = b.query(k, v);
                }
                b.call()
            }
            Method::Post => {
                let mut b = agent.post(&req.url);
                for (k, v) in &req.headers {
                    b = b.header(k, v);
                }
                for (k, v) in &req.query {
                    b = b.query(k, v);
                }
                b.send(req.body.clone().unwrap_or_default())
            }
        };
        match result {
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                let body = resp.body_mut().read_to_string().map_err(|e| TransportError::Connect(e.to_string()))?;
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::Timeout(_)) => Err(TransportError::Timeout),
            Err(e) => Err(TransportError::Connect(e.to_string())),
        }
    }
}
