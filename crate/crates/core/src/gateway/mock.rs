//! Deterministic scripted mock backend.
//!
//! A mock script is a JSON file of reply rules:
//!
//! ```json
//! {
//!   "entries": [
//!     { "fingerprint": "8d2f0c5a1b3e4d6f", "reply": "canned reply" },
//!     { "kind_wildcard": "ScoreFragment",
//!       "reply": "{\"sc\": {likert:a}, \"im\": 4, \"co\": 4, \"ha\": 1}" },
//!     { "kind_wildcard": "SelectOption", "template": "choose_option",
//!       "when": { "parent_label": "[Scale]" },
//!       "reply": "{\"choice\": \"Community\"}" }
//!   ]
//! }
//! ```
//!
//! Lookup order: an exact fingerprint entry wins; otherwise the first
//! wildcard (in file order) whose kind matches and whose optional `template`
//! and `when` variable filters all match is used. Replies may interpolate
//! request variables as `{name}` plus the derived placeholders below, all of
//! which are pure functions of the request fingerprint, so a reply never
//! depends on call order:
//!
//! - `{fingerprint}` — the request's own fingerprint.
//! - `{likert:SALT}` — integer 1..=5.
//! - `{pct:SALT}` — integer 0..=100.
//! - `{unit:SALT}` — decimal in 0.00..=0.99.
//! - `{pick:N:SALT}` — integer 0..N.
//! - `{options_pick:SALT}` — one entry of the `options` variable.
//! - `{options_picks:SALT}` — JSON array of `min` distinct `options` entries.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::rng::fnv1a64;

use super::requests::{fingerprint, OPTION_SEPARATOR};
use super::{Backend, BackendReply, OracleError, OracleRequest, RequestKind};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockScript {
    pub entries: Vec<MockEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind_wildcard: Option<String>,
    /// Optional template-id filter for wildcard entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    /// Optional variable filters for wildcard entries; all must match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<std::collections::BTreeMap<String, String>>,
    pub reply: String,
}

impl MockScript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, OracleError> {
        let script: MockScript = serde_json::from_str(text).map_err(|e| OracleError::Template {
            template_id: "mock-script".to_string(),
            detail: format!("invalid mock script: {e}"),
        })?;
        script.validate()?;
        Ok(script)
    }

    pub fn from_path(path: &Path) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path).map_err(|e| OracleError::Template {
            template_id: path.display().to_string(),
            detail: format!("cannot read mock script: {e}"),
        })?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), OracleError> {
        for (i, entry) in self.entries.iter().enumerate() {
            let slots = usize::from(entry.fingerprint.is_some())
                + usize::from(entry.kind_wildcard.is_some());
            if slots != 1 {
                return Err(OracleError::Template {
                    template_id: "mock-script".to_string(),
                    detail: format!(
                        "entry {i}: exactly one of `fingerprint` or `kind_wildcard` required"
                    ),
                });
            }
            if let Some(kind) = &entry.kind_wildcard {
                RequestKind::parse(kind).ok_or_else(|| OracleError::Template {
                    template_id: "mock-script".to_string(),
                    detail: format!("entry {i}: unknown request kind `{kind}`"),
                })?;
            }
        }
        Ok(())
    }

    /// Registers an exact reply for `fp`.
    pub fn on_fingerprint(mut self, fp: &str, reply: &str) -> Self {
        self.entries.push(MockEntry {
            fingerprint: Some(fp.to_string()),
            kind_wildcard: None,
            template: None,
            when: None,
            reply: reply.to_string(),
        });
        self
    }

    /// Registers an exact reply for the given request.
    pub fn on_request(self, request: &OracleRequest, reply: &str) -> Self {
        let fp = fingerprint(request);
        self.on_fingerprint(&fp, reply)
    }

    /// Registers a wildcard reply for every request of `kind`.
    pub fn on_kind(mut self, kind: RequestKind, reply: &str) -> Self {
        self.entries.push(MockEntry {
            fingerprint: None,
            kind_wildcard: Some(kind.as_str().to_string()),
            template: None,
            when: None,
            reply: reply.to_string(),
        });
        self
    }

    /// Registers a wildcard reply filtered by template id and variables.
    pub fn on_match(
        mut self,
        kind: RequestKind,
        template: Option<&str>,
        when: &[(&str, &str)],
        reply: &str,
    ) -> Self {
        self.entries.push(MockEntry {
            fingerprint: None,
            kind_wildcard: Some(kind.as_str().to_string()),
            template: template.map(|t| t.to_string()),
            when: if when.is_empty() {
                None
            } else {
                Some(
                    when.iter()
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .collect(),
                )
            },
            reply: reply.to_string(),
        });
        self
    }
}

/// Mock backend: an immutable reply table consulted by fingerprint.
pub struct MockBackend {
    script: MockScript,
    exact: HashMap<String, usize>,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        let mut exact = HashMap::new();
        for (i, entry) in script.entries.iter().enumerate() {
            if let Some(fp) = &entry.fingerprint {
                // First entry wins on duplicate fingerprints.
                exact.entry(fp.clone()).or_insert(i);
            }
        }
        Self { script, exact }
    }

    fn lookup(&self, request: &OracleRequest, fp: &str) -> Option<&MockEntry> {
        if let Some(&i) = self.exact.get(fp) {
            return Some(&self.script.entries[i]);
        }
        self.script.entries.iter().find(|entry| {
            let Some(kind) = &entry.kind_wildcard else {
                return false;
            };
            if RequestKind::parse(kind) != Some(request.kind) {
                return false;
            }
            if let Some(template) = &entry.template {
                if template != &request.template_id {
                    return false;
                }
            }
            if let Some(when) = &entry.when {
                if !when
                    .iter()
                    .all(|(k, v)| request.variables.get(k) == Some(v))
                {
                    return false;
                }
            }
            true
        })
    }
}

impl Backend for MockBackend {
    fn name(&self) -> &'static str {
        "mock"
    }

    fn reply(
        &self,
        request: &OracleRequest,
        _system_prompt: &str,
        _user_prompt: &str,
    ) -> Result<BackendReply, OracleError> {
        let fp = fingerprint(request);
        let entry = self.lookup(request, &fp).ok_or_else(|| OracleError::MockMiss {
            fingerprint: fp.clone(),
            kind: request.kind.as_str().to_string(),
        })?;
        Ok(BackendReply {
            text: expand_reply(&entry.reply, request, &fp),
            prompt_tokens: None,
            completion_tokens: None,
        })
    }
}

fn derived_u64(fp: &str, salt: &str) -> u64 {
    let mut bytes = Vec::with_capacity(fp.len() + salt.len() + 1);
    bytes.extend_from_slice(fp.as_bytes());
    bytes.push(b'#');
    bytes.extend_from_slice(salt.as_bytes());
    fnv1a64(&bytes)
}

fn split_options(request: &OracleRequest) -> Vec<&str> {
    request
        .variables
        .get("options")
        .map(|o| o.split(OPTION_SEPARATOR).collect())
        .unwrap_or_default()
}

/// Expands the placeholders documented in the module header. Anything that
/// is not a recognized placeholder is kept literally (and re-scanned past
/// the opening brace), so canned JSON replies survive untouched.
fn expand_reply(reply: &str, request: &OracleRequest, fp: &str) -> String {
    let mut out = String::with_capacity(reply.len());
    let mut rest = reply;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let expanded = after
            .find('}')
            .and_then(|close| expand_token(&after[..close], request, fp).map(|v| (close, v)));
        match expanded {
            Some((close, value)) => {
                out.push_str(&value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn expand_token(token: &str, request: &OracleRequest, fp: &str) -> Option<String> {
    if token == "fingerprint" {
        return Some(fp.to_string());
    }
    if let Some(value) = request.variables.get(token) {
        return Some(value.clone());
    }
    let mut parts = token.splitn(3, ':');
    let head = parts.next()?;
    match head {
        "likert" => {
            let salt = parts.next()?;
            Some((1 + derived_u64(fp, salt) % 5).to_string())
        }
        "pct" => {
            let salt = parts.next()?;
            Some((derived_u64(fp, salt) % 101).to_string())
        }
        "unit" => {
            let salt = parts.next()?;
            Some(format!("0.{:02}", derived_u64(fp, salt) % 100))
        }
        "pick" => {
            let n: u64 = parts.next()?.parse().ok().filter(|&n| n > 0)?;
            let salt = parts.next()?;
            Some((derived_u64(fp, salt) % n).to_string())
        }
        "options_pick" => {
            let salt = parts.next()?;
            let options = split_options(request);
            if options.is_empty() {
                return None;
            }
            let idx = (derived_u64(fp, salt) % options.len() as u64) as usize;
            Some(options[idx].to_string())
        }
        "options_picks" => {
            let salt = parts.next()?;
            let options = split_options(request);
            if options.is_empty() {
                return None;
            }
            let want: usize = request
                .variables
                .get("min")
                .and_then(|m| m.parse().ok())
                .unwrap_or(1);
            let want = want.min(options.len());
            let start = (derived_u64(fp, salt) % options.len() as u64) as usize;
            let picks: Vec<String> = (0..want)
                .map(|j| format!("\"{}\"", options[(start + j) % options.len()]))
                .collect();
            Some(format!("[{}]", picks.join(", ")))
        }
        _ => None,
    }
}
