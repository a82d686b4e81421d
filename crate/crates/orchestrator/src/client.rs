//! LLM clients: a chat-completions HTTP client and a scripted replay
//! client for tests and offline batches.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use base64::Engine;
use serde_json::{json, Value};

use crate::prompt::{Message, Role};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(String),
    #[error("server returned {status}: {body}")]
    Status { status: u16, body: String },
    #[error("environment variable {0} is not set")]
    MissingKey(String),
    #[error("unexpected response: {0}")]
    Malformed(String),
    #[error("cannot read attachment {path}: {reason}")]
    Attachment { path: String, reason: String },
    #[error("scripted responses exhausted after {0} calls")]
    Exhausted(usize),
}

pub trait LlmClient: Send + Sync {
    fn send(&self, messages: &[Message]) -> Result<String, ClientError>;

    fn supports_images(&self) -> bool {
        true
    }
}

/// Replays canned responses in order and records what it was sent.
#[derive(Debug, Default)]
pub struct ScriptedClient {
    responses: Vec<String>,
    log: Mutex<Vec<Vec<Message>>>,
}

impl ScriptedClient {
    pub fn new(responses: Vec<String>) -> ScriptedClient {
        ScriptedClient {
            responses,
            log: Mutex::new(Vec::new()),
        }
    }

    /// Responses from a directory, ordered by the first number in each
    /// file name (`1.json`, `2.txt`, `response_3.json`, ...).
    pub fn from_dir(dir: &Path) -> std::io::Result<ScriptedClient> {
        let mut files: Vec<(u64, PathBuf)> = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if !path.is_file() {
                continue;
            }
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            let digits: String = name
                .chars()
                .skip_while(|c| !c.is_ascii_digit())
                .take_while(|c| c.is_ascii_digit())
                .collect();
            if let Ok(n) = digits.parse() {
                files.push((n, path));
            }
        }
        files.sort();
        let responses = files
            .iter()
            .map(|(_, p)| std::fs::read_to_string(p))
            .collect::<Result<_, _>>()?;
        Ok(ScriptedClient::new(responses))
    }

    /// Every message list received so far, one per call.
    pub fn calls(&self) -> Vec<Vec<Message>> {
        self.log.lock().expect("log lock").clone()
    }
}

impl LlmClient for ScriptedClient {
    fn send(&self, messages: &[Message]) -> Result<String, ClientError> {
        let mut log = self.log.lock().expect("log lock");
        let n = log.len();
        log.push(messages.to_vec());
        self.responses.get(n).cloned().ok_or(ClientError::Exhausted(n))
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_s: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".to_string(),
            model: "o4-mini".to_string(),
            api_key_env: "OPENAI_API_KEY".to_string(),
            timeout_s: 600,
        }
    }
}

pub struct HttpClient {
    config: HttpConfig,
    key: String,
    http: reqwest::blocking::Client,
}

impl HttpClient {
    pub fn new(config: HttpConfig) -> Result<HttpClient, ClientError> {
        let key = std::env::var(&config.api_key_env).map_err(|_| ClientError::MissingKey(config.api_key_env.clone()))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_s))
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(HttpClient { config, key, http })
    }

    /// Request body for `messages`.
    pub fn body(model: &str, messages: &[Message]) -> Result<Value, ClientError> {
        let messages = messages
            .iter()
            .map(|m| {
                let role = match m.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                let content = match &m.image {
                    None => json!(m.content),
                    Some(path) => json!([
                        { "type": "text", "text": m.content },
                        { "type": "image_url", "image_url": { "url": data_url(path)? } },
                    ]),
                };
                Ok(json!({ "role": role, "content": content }))
            })
            .collect::<Result<Vec<_>, ClientError>>()?;
        Ok(json!({ "model": model, "messages": messages }))
    }
}

fn data_url(path: &Path) -> Result<String, ClientError> {
    let bytes = std::fs::read(path).map_err(|e| ClientError::Attachment {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("png")
        .to_ascii_lowercase();
    let mime = match ext.as_str() {
        "jpg" | "jpeg" => "image/jpeg",
        "webp" => "image/webp",
        "gif" => "image/gif",
        _ => "image/png",
    };
    Ok(format!(
        "data:{mime};base64,{}",
        base64::engine::general_purpose::STANDARD.encode(bytes)
    ))
}

impl LlmClient for HttpClient {
    fn send(&self, messages: &[Message]) -> Result<String, ClientError> {
        let body = HttpClient::body(&self.config.model, messages)?;
        let resp = self
            .http
            .post(&self.config.endpoint)
            .bearer_auth(&self.key)
            .json(&body)
            .send()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| ClientError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ClientError::Status {
                status: status.as_u16(),
                body: text,
            });
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| ClientError::Malformed(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ClientError::Malformed("no choices[0].message.content".to_string()))
    }
}
