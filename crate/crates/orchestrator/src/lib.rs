//! Prompt construction, LLM clients and the validate/re-prompt loop that
//! turns a picture and a category into a tested craft assembly.

use std::path::Path;

pub mod batch;
pub mod category;
pub mod client;
pub mod heuristics;
pub mod pipeline;
pub mod prompt;

pub use category::Category;
pub use client::{ClientError, HttpClient, HttpConfig, LlmClient, ScriptedClient};
pub use heuristics::Heuristics;
pub use pipeline::{
    classify_failure, classify_initial, run_pipeline, Attempt, FailureStage, PipelineResult, PolicyMode,
    RepromptPolicy, StageRecord, StageTally, Status,
};
pub use prompt::{build_prompt, Message, PromptBundle, Role};

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Client(#[from] ClientError),
}

pub(crate) fn read(path: &Path) -> Result<String, OrchestratorError> {
    std::fs::read_to_string(path).map_err(|source| OrchestratorError::Io {
        path: path.display().to_string(),
        source,
    })
}
