//! Batch evaluation of method directories against a reference directory.
//!
//! Each directory holds one `<query_id>.txt` per query; directories must
//! cover the same query ids. Subjective metrics run the four-judgment
//! pairwise protocol per aligned pair; invalid pairs (any failed judgment)
//! are excluded from aggregation and counted.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::gateway::Gateway;
use crate::metrics::{self, PairVerdictSet, VerbLexicon};

use super::PipelineError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubjectiveReport {
    pub positive_rate: f64,
    pub wins: u64,
    pub ties: u64,
    pub losses: u64,
    pub n_pairs: usize,
    pub invalid_pairs: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RougeTriple {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RougeReport {
    pub rouge_1: RougeTriple,
    pub rouge_l: RougeTriple,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub n_pairs: usize,
    pub subjective: BTreeMap<String, SubjectiveReport>,
    pub diverse_verbs_mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rouge_vs_expert: Option<RougeReport>,
    /// Mean of the configured external scorer over aligned pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_scorer_mean: Option<f64>,
}

/// Reads `<id>.txt` files from a directory into an id-sorted map.
pub fn read_context_dir(dir: &Path) -> Result<BTreeMap<String, String>, PipelineError> {
    let mut contexts = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| PipelineError::Io {
        path: dir.display().to_string(),
        detail: e.to_string(),
    })?;
    for entry in entries {
        let path = entry
            .map_err(|e| PipelineError::Io {
                path: dir.display().to_string(),
                detail: e.to_string(),
            })?
            .path();
        if path.extension().is_some_and(|ext| ext == "txt") {
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let text = std::fs::read_to_string(&path).map_err(|e| PipelineError::Io {
                path: path.display().to_string(),
                detail: e.to_string(),
            })?;
            contexts.insert(id, text.trim().to_string());
        }
    }
    Ok(contexts)
}

fn check_alignment(
    method: &str,
    method_ids: &BTreeMap<String, String>,
    reference_ids: &BTreeMap<String, String>,
) -> Result<(), PipelineError> {
    let missing: Vec<&String> = reference_ids
        .keys()
        .filter(|id| !method_ids.contains_key(*id))
        .collect();
    let extra: Vec<&String> = method_ids
        .keys()
        .filter(|id| !reference_ids.contains_key(*id))
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(PipelineError::Alignment(format!(
            "method `{method}`: missing {missing:?}, unexpected {extra:?}"
        )));
    }
    Ok(())
}

/// Evaluates one method directory against the reference.
pub fn evaluate_method(
    gateway: &Gateway,
    method: &str,
    method_dir: &Path,
    reference_dir: &Path,
    metrics_list: &[String],
    expert_dir: Option<&Path>,
) -> Result<EvalReport, PipelineError> {
    let candidates = read_context_dir(method_dir)?;
    let references = read_context_dir(reference_dir)?;
    check_alignment(method, &candidates, &references)?;
    if candidates.is_empty() {
        return Err(PipelineError::Alignment(format!(
            "method `{method}`: no contexts found"
        )));
    }

    let mut subjective = BTreeMap::new();
    for metric in metrics_list {
        let mut verdicts: Vec<PairVerdictSet> = Vec::new();
        let mut invalid = 0usize;
        for (id, candidate) in &candidates {
            let reference = &references[id];
            match metrics::run_pair(gateway, metric, id, candidate, id, reference) {
                Ok(set) => verdicts.push(set),
                Err(_) => invalid += 1,
            }
        }
        if verdicts.is_empty() {
            return Err(PipelineError::Metric(
                crate::metrics::MetricError::NoValidVerdicts,
            ));
        }
        let report = metrics::positive_rate(&verdicts, metric, method)?;
        subjective.insert(
            metric.clone(),
            SubjectiveReport {
                positive_rate: report.positive_rate,
                wins: report.wins,
                ties: report.ties,
                losses: report.losses,
                n_pairs: verdicts.len(),
                invalid_pairs: invalid,
            },
        );
    }

    let lexicon = VerbLexicon::bundled();
    let diverse_verbs_mean = candidates
        .values()
        .map(|text| metrics::diverse_verbs(text, &lexicon))
        .sum::<f64>()
        / candidates.len() as f64;

    let rouge_vs_expert = match expert_dir {
        Some(dir) => {
            let experts = read_context_dir(dir)?;
            check_alignment(method, &candidates, &experts)?;
            let mut one = (0.0, 0.0, 0.0);
            let mut ell = (0.0, 0.0, 0.0);
            for (id, candidate) in &candidates {
                let expert = &experts[id];
                let r1 = metrics::rouge_1(candidate, expert);
                let rl = metrics::rouge_l(candidate, expert);
                one = (one.0 + r1.precision, one.1 + r1.recall, one.2 + r1.f1);
                ell = (ell.0 + rl.precision, ell.1 + rl.recall, ell.2 + rl.f1);
            }
            let n = candidates.len() as f64;
            Some(RougeReport {
                rouge_1: RougeTriple { precision: one.0 / n, recall: one.1 / n, f1: one.2 / n },
                rouge_l: RougeTriple { precision: ell.0 / n, recall: ell.1 / n, f1: ell.2 / n },
            })
        }
        None => None,
    };

    Ok(EvalReport {
        method: method.to_string(),
        n_pairs: candidates.len(),
        subjective,
        diverse_verbs_mean,
        rouge_vs_expert,
        external_scorer_mean: None,
    })
}

/// Per-pair scores from an external command, cached by content hash so a
/// re-run never re-invokes the scorer for unchanged texts.
pub fn external_scores(
    command: &str,
    method_dir: &Path,
    reference_dir: &Path,
    cache_path: &Path,
) -> Result<BTreeMap<String, f64>, PipelineError> {
    let mut parts = command.split_whitespace();
    let program = parts.next().ok_or_else(|| {
        PipelineError::Config("external_scorer command is empty".to_string())
    })?;
    let fixed_args: Vec<&str> = parts.collect();

    let mut cache: BTreeMap<String, f64> = if cache_path.exists() {
        super::read_json(cache_path)?
    } else {
        BTreeMap::new()
    };

    let candidates = read_context_dir(method_dir)?;
    let references = read_context_dir(reference_dir)?;
    let mut scores = BTreeMap::new();
    for (id, candidate) in &candidates {
        let reference = references.get(id).ok_or_else(|| {
            PipelineError::Alignment(format!("external scorer: no reference for `{id}`"))
        })?;
        let key = format!(
            "{id}-{:016x}-{:016x}",
            crate::rng::fnv1a64(candidate.as_bytes()),
            crate::rng::fnv1a64(reference.as_bytes())
        );
        let score = match cache.get(&key) {
            Some(&hit) => hit,
            None => {
                let output = std::process::Command::new(program)
                    .args(&fixed_args)
                    .arg(method_dir.join(format!("{id}.txt")))
                    .arg(reference_dir.join(format!("{id}.txt")))
                    .output()
                    .map_err(|e| PipelineError::Config(format!(
                        "external scorer `{program}` failed to start: {e}"
                    )))?;
                let stdout = String::from_utf8_lossy(&output.stdout);
                let value: f64 = stdout
                    .split_whitespace()
                    .next()
                    .and_then(|token| token.parse().ok())
                    .ok_or_else(|| PipelineError::Config(format!(
                        "external scorer printed no float for `{id}`: {stdout:?}"
                    )))?;
                cache.insert(key.clone(), value);
                value
            }
        };
        scores.insert(id.clone(), score);
    }
    super::write_json(cache_path, &cache)?;
    Ok(scores)
}

/// Evaluates every method directory, writing `eval/<method>.json` under
/// `out_dir` and returning the reports in method order.
#[allow(clippy::too_many_arguments)]
pub fn run_evaluation(
    gateway: &Gateway,
    methods: &[(String, std::path::PathBuf)],
    reference_dir: &Path,
    metrics_list: &[String],
    expert_dir: Option<&Path>,
    external_scorer: Option<&str>,
    out_dir: &Path,
) -> Result<Vec<EvalReport>, PipelineError> {
    let eval_dir = out_dir.join("eval");
    std::fs::create_dir_all(&eval_dir).map_err(|e| PipelineError::Io {
        path: eval_dir.display().to_string(),
        detail: e.to_string(),
    })?;
    let mut reports = Vec::with_capacity(methods.len());
    for (method, dir) in methods {
        let mut report =
            evaluate_method(gateway, method, dir, reference_dir, metrics_list, expert_dir)?;
        if let Some(command) = external_scorer {
            let cache_path = eval_dir.join(format!("{method}_external_cache.json"));
            let scores = external_scores(command, dir, reference_dir, &cache_path)?;
            if !scores.is_empty() {
                report.external_scorer_mean =
                    Some(scores.values().sum::<f64>() / scores.len() as f64);
            }
        }
        super::write_json(&eval_dir.join(format!("{method}.json")), &report)?;
        reports.push(report);
    }
    Ok(reports)
}
