//! Expansion rule library.
//!
//! A rule library is a JSON file with a `rules` array; each rule names a
//! parent label and one expansion kind:
//!
//! ```json
//! { "rules": [
//!   { "id": "1", "parent": "[Plan]", "kind": "fixed_children",
//!     "children": ["[Anchor]", "[Open Task]"] },
//!   { "id": "9", "parent": "[Future Horizon]", "kind": "single_choice",
//!     "pool": ["NearFuture (5-15 years)", "MidFuture"] },
//!   { "id": "15", "parent": "[Challenge Seeds 1]", "kind": "multi_choice",
//!     "pool": ["Technology", "Ethics & Morality"], "min": 1, "max": 2 },
//!   { "id": "19", "parent": "[Problem Slot]", "kind": "generated_phrase" }
//! ] }
//! ```
//!
//! The bundled default encodes the fixed five-part skeleton plus the
//! dynamic selection slots used by the planner.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PlanError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpansionKind {
    /// Expands into all listed children unconditionally.
    FixedChildren { children: Vec<String> },
    /// The oracle picks one option from the pool.
    SingleChoice { pool: Vec<String> },
    /// The oracle picks between `min` and `max` options from the pool.
    MultiChoice { pool: Vec<String>, min: usize, max: usize },
    /// The oracle writes a short phrase that becomes the child's payload.
    GeneratedPhrase,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionRule {
    #[serde(rename = "id")]
    pub rule_id: String,
    #[serde(rename = "parent")]
    pub parent_label: String,
    #[serde(flatten)]
    pub expansion: ExpansionKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleLibrary {
    pub rules: Vec<ExpansionRule>,
}

const DEFAULT_RULES: &str = include_str!("../../assets/rules/default_rules.json");

impl RuleLibrary {
    /// The bundled default library.
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_RULES).expect("bundled rule library is valid")
    }

    pub fn parse(text: &str) -> Result<Self, PlanError> {
        let library: RuleLibrary = serde_json::from_str(text).map_err(|e| PlanError::RuleParse {
            detail: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
        library.validate()?;
        Ok(library)
    }

    pub fn from_path(path: &Path) -> Result<Self, PlanError> {
        let text = std::fs::read_to_string(path).map_err(|e| PlanError::RuleParse {
            detail: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// The unique rule whose parent label matches, if any.
    pub fn rule_for(&self, label: &str) -> Option<&ExpansionRule> {
        self.rules.iter().find(|r| r.parent_label == label)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn validate(&self) -> Result<(), PlanError> {
        if self.rules.is_empty() {
            return Err(PlanError::RuleParse {
                detail: "rule library must contain at least one rule".to_string(),
            });
        }
        let mut seen_parents = std::collections::BTreeSet::new();
        for rule in &self.rules {
            let at = |field: &str, detail: String| PlanError::RuleParse {
                detail: format!("rule `{}`, field `{field}`: {detail}", rule.rule_id),
            };
            if rule.parent_label.trim().is_empty() {
                return Err(at("parent", "parent label must be non-empty".to_string()));
            }
            if !seen_parents.insert(rule.parent_label.clone()) {
                return Err(at(
                    "parent",
                    format!("duplicate rule for parent `{}`", rule.parent_label),
                ));
            }
            match &rule.expansion {
                ExpansionKind::FixedChildren { children } => {
                    if children.is_empty() {
                        return Err(at("children", "fixed rules list >= 1 child".to_string()));
                    }
                }
                ExpansionKind::SingleChoice { pool } => {
                    if pool.len() < 2 {
                        return Err(at("pool", "single-choice pools have >= 2 options".to_string()));
                    }
                }
                ExpansionKind::MultiChoice { pool, min, max } => {
                    if !(1 <= *min && min <= max && *max <= pool.len()) {
                        return Err(at(
                            "min/max",
                            format!(
                                "need 1 <= min <= max <= pool size; got min={min}, max={max}, pool={}",
                                pool.len()
                            ),
                        ));
                    }
                }
                ExpansionKind::GeneratedPhrase => {}
            }
        }
        Ok(())
    }
}

/// Loads a rule library from a JSON file.
pub fn load_rule_library(path: &Path) -> Result<RuleLibrary, PlanError> {
    RuleLibrary::from_path(path)
}
