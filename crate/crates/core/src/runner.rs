//! Shared execution context for the pipelines.

use std::sync::Arc;

use crate::backend::{
    Backend, BackendError, CompletionResult, UsageLedger, ANNOTATION_TEMPERATURE, GENERATION_TEMPERATURE,
};
use crate::prompt::{PromptEngine, RenderedPrompt};

/// Ledger stage tags.
pub mod stage {
    pub const ANNOTATE: &str = "annotate";
    pub const DEFINITION: &str = "definition";
    pub const TYPE_PASS: &str = "type_pass";
    pub const DISAMBIGUATION: &str = "disambiguation";
    pub const SPAN: &str = "span";
    pub const OPINION: &str = "opinion";
    pub const SENTENCE: &str = "sentence";
}

#[derive(Debug, Clone)]
pub struct Runner {
    pub backend: Backend,
    pub engine: Arc<PromptEngine>,
    pub parallelism: usize,
    pub annotation_temperature: f64,
    pub generation_temperature: f64,
    /// Replaces every template's completion budget when set.
    pub max_tokens: Option<u32>,
}

impl Runner {
    pub fn new(backend: Backend) -> Self {
        Runner {
            backend,
            engine: Arc::new(PromptEngine::default()),
            parallelism: 1,
            annotation_temperature: ANNOTATION_TEMPERATURE,
            generation_temperature: GENERATION_TEMPERATURE,
            max_tokens: None,
        }
    }

    pub fn with_engine(mut self, engine: PromptEngine) -> Self {
        self.engine = Arc::new(engine);
        self
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }

    pub fn ledger(&self) -> &Arc<UsageLedger> {
        self.backend.ledger()
    }

    pub(crate) fn batch(
        &self,
        prompts: &[&RenderedPrompt],
        temperature: f64,
        stage: &str,
    ) -> Vec<Result<CompletionResult, BackendError>> {
        let reqs: Vec<_> = prompts
            .iter()
            .map(|p| {
                let mut r = p.request(temperature, stage);
                if let Some(m) = self.max_tokens {
                    r.max_tokens = m;
                }
                r
            })
            .collect();
        self.backend.complete_batch(&reqs, self.parallelism)
    }
}
