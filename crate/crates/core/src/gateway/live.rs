//! Live backend speaking the OpenAI-compatible chat-completions protocol.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{Backend, BackendReply, OracleError, OracleRequest};

#[derive(Debug, Clone)]
pub struct LiveConfig {
    /// Base URL, e.g. `https://api.example.com`. `/v1/chat/completions` is
    /// appended unless the URL already ends with `/chat/completions`.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    /// Total attempts for transport-level failures (default 3).
    pub attempts: u32,
    /// First backoff delay; doubles per retry (default 500 ms).
    pub backoff_ms: u64,
    /// Maximum concurrently in-flight requests (default 4).
    pub max_in_flight: u32,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com".to_string(),
            model: "gpt-4o-mini".to_string(),
            api_key: None,
            attempts: 3,
            backoff_ms: 500,
            max_in_flight: 4,
        }
    }
}

pub struct LiveBackend {
    config: LiveConfig,
    url: String,
    in_flight: Mutex<u32>,
    slot_freed: Condvar,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<ChatUsage>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

#[derive(Deserialize)]
struct ChatUsage {
    #[serde(default)]
    prompt_tokens: Option<u64>,
    #[serde(default)]
    completion_tokens: Option<u64>,
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Self {
        let trimmed = config.endpoint.trim_end_matches('/');
        let url = if trimmed.ends_with("/chat/completions") {
            trimmed.to_string()
        } else {
            format!("{trimmed}/v1/chat/completions")
        };
        Self {
            config,
            url,
            in_flight: Mutex::new(0),
            slot_freed: Condvar::new(),
        }
    }

    fn acquire_slot(&self) {
        let mut count = self.in_flight.lock().unwrap();
        while *count >= self.config.max_in_flight.max(1) {
            count = self.slot_freed.wait(count).unwrap();
        }
        *count += 1;
    }

    fn release_slot(&self) {
        let mut count = self.in_flight.lock().unwrap();
        *count -= 1;
        drop(count);
        self.slot_freed.notify_one();
    }

    fn post_once(
        &self,
        request: &OracleRequest,
        system_prompt: &str,
        user_prompt: &str,
    ) -> Result<BackendReply, TransportFailure> {
        let mut body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": system_prompt},
                {"role": "user", "content": user_prompt},
            ],
            "temperature": request.sampling.temperature,
        });
        if let Some(seed) = request.sampling.seed {
            body["seed"] = json!(seed);
        }

        let mut call = ureq::post(&self.url).set("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            call = call.set("Authorization", &format!("Bearer {key}"));
        }

        match call.send_json(body) {
            Ok(response) => {
                let parsed: ChatResponse = response.into_json().map_err(|e| TransportFailure {
                    detail: format!("invalid response body: {e}"),
                    retryable: false,
                })?;
                let choice = parsed.choices.into_iter().next().ok_or(TransportFailure {
                    detail: "response carried no choices".to_string(),
                    retryable: false,
                })?;
                let usage = parsed.usage.unwrap_or(ChatUsage {
                    prompt_tokens: None,
                    completion_tokens: None,
                });
                Ok(BackendReply {
                    text: choice.message.content,
                    prompt_tokens: usage.prompt_tokens,
                    completion_tokens: usage.completion_tokens,
                })
            }
            Err(ureq::Error::Status(code, _)) => Err(TransportFailure {
                detail: format!("HTTP status {code}"),
                // Malformed requests (4xx) are never retried.
                retryable: code == 408 || code == 429 || code >= 500,
            }),
            Err(e) => Err(TransportFailure {
                detail: e.to_string(),
                retryable: true,
            }),
        }
    }
}

struct TransportFailure {
    detail: String,
    retryable: bool,
}

impl Backend for LiveBackend {
    fn name(&self) -> &'static str {
        "live"
    }

    fn reply(
        &self,
        request: &OracleRequest,
        system_prompt: &str,
        user_prompt: &str,
    ) -> Result<BackendReply, OracleError> {
        self.acquire_slot();
        let result = self.reply_with_retries(request, system_prompt, user_prompt);
        self.release_slot();
        result
    }
}

impl LiveBackend {
    fn reply_with_retries(
        &self,
        request: &OracleRequest,
        system_prompt: &str,
        user_prompt: &str,
    ) -> Result<BackendReply, OracleError> {
        let attempts = self.config.attempts.max(1);
        let mut backoff = self.config.backoff_ms;
        let mut last_detail = String::new();
        for attempt in 1..=attempts {
            match self.post_once(request, system_prompt, user_prompt) {
                Ok(reply) => return Ok(reply),
                Err(failure) => {
                    if !failure.retryable {
                        return Err(OracleError::Transport {
                            attempts: attempt,
                            detail: failure.detail,
                        });
                    }
                    last_detail = failure.detail;
                    if attempt < attempts {
                        std::thread::sleep(Duration::from_millis(backoff));
                        backoff = backoff.saturating_mul(2);
                    }
                }
            }
        }
        Err(OracleError::Transport {
            attempts,
            detail: last_detail,
        })
    }
}
