use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{CompletionProvider, CompletionRequest, ProviderError, ProviderReply, RequestMeta, Usage};

/// A scripted provider definition, usually loaded from JSON.
///
/// With `responses` set, the reply to request id `k` is `responses[k]`; ids are
/// handed out in issue order, so the script is independent of worker
/// scheduling. Otherwise the first rule whose regex matches the prompt wins.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub responses: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<MockRule>,
    /// Unmatched prompts are errors when strict; otherwise `fallback` (or "").
    #[serde(default = "default_strict")]
    pub strict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
}

fn default_strict() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    pub pattern: String,
    pub response: String,
    /// Token counts to report as exact usage; estimated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
}

impl MockRule {
    pub fn new(pattern: impl Into<String>, response: impl Into<String>) -> Self {
        MockRule { pattern: pattern.into(), response: response.into(), usage: None }
    }

    pub fn with_usage(mut self, prompt_tokens: u64, completion_tokens: u64) -> Self {
        self.usage = Some(Usage { prompt_tokens, completion_tokens });
        self
    }
}

impl MockScript {
    pub fn sequential(responses: Vec<String>) -> Self {
        MockScript { responses, strict: true, ..Default::default() }
    }

    pub fn rules(rules: Vec<MockRule>) -> Self {
        MockScript { rules, strict: true, ..Default::default() }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

#[derive(Debug)]
pub struct MockProvider {
    script: MockScript,
    compiled: Vec<(Regex, ProviderReply)>,
}

impl MockProvider {
    pub fn new(script: MockScript) -> Result<Self, String> {
        let compiled = script
            .rules
            .iter()
            .map(|r| {
                Regex::new(&r.pattern)
                    .map(|re| (re, ProviderReply { text: r.response.clone(), usage: r.usage }))
                    .map_err(|e| format!("bad mock pattern {:?}: {e}", r.pattern))
            })
            .collect::<Result<_, _>>()?;
        Ok(MockProvider { script, compiled })
    }

    fn unmatched(&self, what: String) -> Result<ProviderReply, ProviderError> {
        if self.script.strict {
            Err(ProviderError::Fatal(what))
        } else {
            Ok(ProviderReply::text(self.script.fallback.clone().unwrap_or_default()))
        }
    }
}

impl CompletionProvider for MockProvider {
    fn id(&self) -> &str {
        "mock"
    }

    fn complete(&self, req: &CompletionRequest, meta: RequestMeta) -> Result<ProviderReply, ProviderError> {
        if !self.script.responses.is_empty() {
            return match self.script.responses.get(meta.request_id as usize) {
                Some(r) => Ok(ProviderReply::text(r.clone())),
                None => self.unmatched(format!("mock script exhausted at request {}", meta.request_id)),
            };
        }
        match self.compiled.iter().find(|(re, _)| re.is_match(&req.prompt)) {
            Some((_, r)) => Ok(r.clone()),
            None => self.unmatched("no mock rule matches the prompt".to_string()),
        }
    }
}

type ReplyFn = dyn Fn(&CompletionRequest, RequestMeta) -> Result<ProviderReply, ProviderError> + Send + Sync;

/// Provider backed by a closure; handy for deterministic synthetic oracles.
pub struct FnProvider {
    id: String,
    f: Box<ReplyFn>,
}

impl FnProvider {
    pub fn new<F>(id: impl Into<String>, f: F) -> Self
    where
        F: Fn(&CompletionRequest, RequestMeta) -> Result<ProviderReply, ProviderError> + Send + Sync + 'static,
    {
        FnProvider { id: id.into(), f: Box::new(f) }
    }
}

impl CompletionProvider for FnProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, req: &CompletionRequest, meta: RequestMeta) -> Result<ProviderReply, ProviderError> {
        (self.f)(req, meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(id: u64) -> RequestMeta {
        RequestMeta { request_id: id, attempt: 0 }
    }

    #[test]
    fn sequential_by_request_id() {
        let p = MockProvider::new(MockScript::sequential(vec!["a".into(), "b".into()])).unwrap();
        let req = CompletionRequest::new("x", 1);
        assert_eq!(p.complete(&req, meta(1)).unwrap().text, "b");
        assert_eq!(p.complete(&req, meta(0)).unwrap().text, "a");
        assert!(matches!(p.complete(&req, meta(2)), Err(ProviderError::Fatal(_))));
    }

    #[test]
    fn rules_strict_and_lenient() {
        let json =
            r#"{"rules":[{"pattern":"boring","response":"Negative"},{"pattern":"Sentiment:$","response":"Positive"}]}"#;
        let p = MockProvider::new(MockScript::from_json(json).unwrap()).unwrap();
        assert_eq!(p.complete(&CompletionRequest::new("boring\nSentiment:", 1), meta(0)).unwrap().text, "Negative");
        assert_eq!(p.complete(&CompletionRequest::new("fun\nSentiment:", 1), meta(0)).unwrap().text, "Positive");
        assert!(p.complete(&CompletionRequest::new("other", 1), meta(0)).is_err());
        let lenient = MockScript { strict: false, fallback: Some("?".into()), ..MockScript::default() };
        let p = MockProvider::new(lenient).unwrap();
        assert_eq!(p.complete(&CompletionRequest::new("other", 1), meta(0)).unwrap().text, "?");
    }

    #[test]
    fn bad_pattern_and_unknown_fields() {
        assert!(MockProvider::new(MockScript::rules(vec![MockRule::new("(", "x")])).is_err());
        assert!(MockScript::from_json(r#"{"respones":[]}"#).is_err());
    }

    #[test]
    fn rule_usage() {
        let json =
            r#"{"rules":[{"pattern":"x","response":"y","usage":{"prompt_tokens":1500,"completion_tokens":500}}]}"#;
        let p = MockProvider::new(MockScript::from_json(json).unwrap()).unwrap();
        let r = p.complete(&CompletionRequest::new("x", 1), meta(0)).unwrap();
        assert_eq!(r.usage, Some(Usage { prompt_tokens: 1500, completion_tokens: 500 }));
        assert_eq!(MockRule::new("x", "y").with_usage(1, 2).usage.unwrap().completion_tokens, 2);
    }
}
