//! Prompt template registry.
//!
//! Templates are plain text files with `{placeholder}` slots. `{{` and `}}`
//! escape literal braces (needed for JSON examples inside prompts). The
//! bundled defaults can be overridden by pointing the registry at a
//! directory of `.txt` files whose stems are template ids.

use std::collections::BTreeMap;
use std::path::Path;

use super::OracleError;

macro_rules! bundled {
    ($($id:literal),+ $(,)?) => {
        [$(($id, include_str!(concat!("../../assets/templates/", $id, ".txt")))),+]
    };
}

const DEFAULT_TEMPLATES: [(&str, &str); 16] = bundled![
    "system",
    "generate_sentence",
    "generate_lookahead",
    "generate_mutant",
    "generate_phrase",
    "score_fragment",
    "score_context",
    "describe_behavior",
    "judge_pair",
    "simulate_response",
    "score_creativity",
    "score_chain",
    "choose_leaf",
    "choose_option",
    "choose_options",
    "repair_preamble",
];

#[derive(Debug, Clone)]
pub struct TemplateRegistry {
    templates: BTreeMap<String, String>,
}

impl Default for TemplateRegistry {
    fn default() -> Self {
        Self::bundled()
    }
}

impl TemplateRegistry {
    /// Registry holding the bundled default templates.
    pub fn bundled() -> Self {
        let templates = DEFAULT_TEMPLATES
            .iter()
            .map(|(id, text)| (id.to_string(), text.to_string()))
            .collect();
        Self { templates }
    }

    /// Bundled defaults overlaid with every `.txt` file in `dir`.
    pub fn with_overrides(dir: &Path) -> Result<Self, OracleError> {
        let mut registry = Self::bundled();
        let entries = std::fs::read_dir(dir).map_err(|e| OracleError::Template {
            template_id: dir.display().to_string(),
            detail: format!("cannot read template directory: {e}"),
        })?;
        for entry in entries {
            let path = entry
                .map_err(|e| OracleError::Template {
                    template_id: dir.display().to_string(),
                    detail: e.to_string(),
                })?
                .path();
            if path.extension().is_some_and(|ext| ext == "txt") {
                let id = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or_default()
                    .to_string();
                let text = std::fs::read_to_string(&path).map_err(|e| OracleError::Template {
                    template_id: id.clone(),
                    detail: e.to_string(),
                })?;
                registry.templates.insert(id, text);
            }
        }
        Ok(registry)
    }

    pub fn contains(&self, template_id: &str) -> bool {
        self.templates.contains_key(template_id)
    }

    /// Renders `template_id` with `variables`.
    ///
    /// Every `{placeholder}` in the template must be bound; unused variables
    /// are allowed (they still participate in request fingerprints).
    pub fn render(
        &self,
        template_id: &str,
        variables: &BTreeMap<String, String>,
    ) -> Result<String, OracleError> {
        let template = self
            .templates
            .get(template_id)
            .ok_or_else(|| OracleError::Template {
                template_id: template_id.to_string(),
                detail: "unknown template".to_string(),
            })?;
        render_str(template, variables).map_err(|name| OracleError::Template {
            template_id: template_id.to_string(),
            detail: format!("unbound placeholder `{{{name}}}`"),
        })
    }
}

/// Renders a template string, returning the name of the first unbound
/// placeholder on failure.
pub(crate) fn render_str(
    template: &str,
    variables: &BTreeMap<String, String>,
) -> Result<String, String> {
    let mut out = String::with_capacity(template.len());
    let mut chars = template.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                out.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                out.push('}');
            }
            '{' => {
                let mut name = String::new();
                let mut closed = false;
                for c in chars.by_ref() {
                    if c == '}' {
                        closed = true;
                        break;
                    }
                    name.push(c);
                }
                if !closed || !is_placeholder_name(&name) {
                    // Not a placeholder; keep the raw text.
                    out.push('{');
                    out.push_str(&name);
                    if closed {
                        out.push('}');
                    }
                    continue;
                }
                match variables.get(&name) {
                    Some(value) => out.push_str(value),
                    None => return Err(name),
                }
            }
            _ => out.push(c),
        }
    }
    Ok(out)
}

fn is_placeholder_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}
