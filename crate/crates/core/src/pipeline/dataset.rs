//! Dataset ingestion: JSON-lines records of `{"title": ..., "theme": ...}`.

use std::path::Path;

use serde::Deserialize;

use crate::planner::Query;

use super::PipelineError;

pub const SAMPLE_DATASET: &str = include_str!("../../assets/sample_dataset.jsonl");

#[derive(Deserialize)]
struct RawEntry {
    title: Option<String>,
    theme: Option<String>,
}

/// Parses a JSON-lines dataset. Blank lines are skipped; a record missing
/// either field fails with its index. An empty file is a valid empty list.
pub fn parse_dataset(text: &str) -> Result<Vec<Query>, PipelineError> {
    let mut queries = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawEntry = serde_json::from_str(line).map_err(|e| PipelineError::Dataset {
            index,
            detail: e.to_string(),
        })?;
        let title = raw.title.ok_or_else(|| PipelineError::Dataset {
            index,
            detail: "missing field `title`".to_string(),
        })?;
        let theme = raw.theme.ok_or_else(|| PipelineError::Dataset {
            index,
            detail: "missing field `theme`".to_string(),
        })?;
        let query = Query::new(&title, &theme).map_err(|e| PipelineError::Dataset {
            index,
            detail: e.to_string(),
        })?;
        queries.push(query);
    }
    Ok(queries)
}

pub fn load_dataset(path: &Path) -> Result<Vec<Query>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!(
        "cannot read dataset {}: {e}",
        path.display()
    )))?;
    parse_dataset(&text)
}

/// The bundled 5-entry sample.
pub fn sample_dataset() -> Vec<Query> {
    parse_dataset(SAMPLE_DATASET).expect("bundled sample parses")
}

/// Stable identifier for a query: its slugged title.
pub fn query_id(query: &Query) -> String {
    let mut slug = String::new();
    let mut last_dash = true;
    for c in query.title.to_lowercase().chars() {
        if c.is_ascii_alphanumeric() {
            slug.push(c);
            last_dash = false;
        } else if !last_dash {
            slug.push('-');
            last_dash = true;
        }
    }
    while slug.ends_with('-') {
        slug.pop();
    }
    if slug.is_empty() {
        slug.push_str("query");
    }
    slug
}

/// Query ids for a whole run, de-duplicated with numeric suffixes.
pub fn query_ids(queries: &[Query]) -> Vec<String> {
    let mut seen = std::collections::BTreeMap::new();
    queries
        .iter()
        .map(|query| {
            let base = query_id(query);
            let count = seen.entry(base.clone()).or_insert(0usize);
            *count += 1;
            if *count == 1 {
                base
            } else {
                format!("{base}-{count}")
            }
        })
        .collect()
}
