//! Canonical request constructors and fingerprinting.
//!
//! Every oracle call in the crate is built here, so the exact template ids
//! and variable names below are the contract that mock scripts match
//! against. Fingerprints hash the template id, the sorted variables, and the
//! sampling seed; temperature and candidate count are deliberately excluded.

use std::collections::BTreeMap;

use crate::rng::fnv1a64;

use super::{OracleRequest, RequestKind, SamplingParams};

/// Stable 16-hex-digit fingerprint of a request.
pub fn fingerprint(request: &OracleRequest) -> String {
    let mut canonical = String::new();
    canonical.push_str(&request.template_id);
    for (key, value) in &request.variables {
        canonical.push('\x1f');
        canonical.push_str(key);
        canonical.push('=');
        canonical.push_str(value);
    }
    canonical.push('\x1f');
    canonical.push_str("seed=");
    match request.sampling.seed {
        Some(seed) => canonical.push_str(&seed.to_string()),
        None => canonical.push('-'),
    }
    format!("{:016x}", fnv1a64(canonical.as_bytes()))
}

pub(crate) fn vars(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn request(
    kind: RequestKind,
    template_id: &str,
    variables: BTreeMap<String, String>,
    sampling: SamplingParams,
) -> OracleRequest {
    OracleRequest {
        kind,
        template_id: template_id.to_string(),
        variables,
        sampling,
    }
}

/// Candidate next sentence for one search-tree expansion.
#[allow(clippy::too_many_arguments)]
pub fn generate_sentence(
    title: &str,
    theme: &str,
    section_label: &str,
    section_payload: &str,
    history: &str,
    candidate: u32,
    sampling: SamplingParams,
) -> OracleRequest {
    request(
        RequestKind::Generate,
        "generate_sentence",
        vars(&[
            ("title", title),
            ("theme", theme),
            ("section_label", section_label),
            ("section_payload", section_payload),
            ("history", history),
            ("candidate", &candidate.to_string()),
        ]),
        sampling,
    )
}

/// Short continuation used by the low-confidence look-ahead.
pub fn generate_lookahead(
    title: &str,
    theme: &str,
    section_label: &str,
    history: &str,
    fragment: &str,
    span: u32,
    sampling: SamplingParams,
) -> OracleRequest {
    request(
        RequestKind::Generate,
        "generate_lookahead",
        vars(&[
            ("title", title),
            ("theme", theme),
            ("section_label", section_label),
            ("history", history),
            ("fragment", fragment),
            ("span", &span.to_string()),
        ]),
        sampling,
    )
}

/// Niche-targeted edit of a parent context.
pub fn generate_mutant(
    operator: &str,
    parent_text: &str,
    target: (f64, f64, f64),
    sampling: SamplingParams,
) -> OracleRequest {
    request(
        RequestKind::Generate,
        "generate_mutant",
        vars(&[
            ("operator", operator),
            ("parent_text", parent_text),
            ("phi1", &format!("{:.2}", target.0)),
            ("phi2", &format!("{:.2}", target.1)),
            ("phi3", &format!("{:.2}", target.2)),
        ]),
        sampling,
    )
}

/// Short phrase instantiating a generated-phrase outline slot.
pub fn generate_phrase(
    title: &str,
    theme: &str,
    parent_label: &str,
    sampling: SamplingParams,
) -> OracleRequest {
    request(
        RequestKind::Generate,
        "generate_phrase",
        vars(&[("title", title), ("theme", theme), ("parent_label", parent_label)]),
        sampling,
    )
}

pub fn score_fragment(
    fragment: &str,
    history: &str,
    outline_hint: &str,
    sampling: SamplingParams,
) -> OracleRequest {
    request(
        RequestKind::ScoreFragment,
        "score_fragment",
        vars(&[
            ("fragment", fragment),
            ("history", history),
            ("outline_hint", outline_hint),
        ]),
        sampling,
    )
}

pub fn score_context(text: &str, sampling: SamplingParams) -> OracleRequest {
    request(
        RequestKind::ScoreContext,
        "score_context",
        vars(&[("text", text)]),
        sampling,
    )
}

pub fn describe_behavior(text: &str, sampling: SamplingParams) -> OracleRequest {
    request(
        RequestKind::DescribeBehavior,
        "describe_behavior",
        vars(&[("text", text)]),
        sampling,
    )
}

pub fn judge_pair(
    context_a: &str,
    context_b: &str,
    metric: &str,
    checklist: &str,
    round: u32,
    sampling: SamplingParams,
) -> OracleRequest {
    request(
        RequestKind::Judge,
        "judge_pair",
        vars(&[
            ("context_a", context_a),
            ("context_b", context_b),
            ("metric", metric),
            ("checklist", checklist),
            ("round", &round.to_string()),
        ]),
        sampling,
    )
}

pub fn simulate_response(
    profile: &str,
    profile_prompt: &str,
    context_text: &str,
    sampling: SamplingParams,
) -> OracleRequest {
    request(
        RequestKind::SimulateResponse,
        "simulate_response",
        vars(&[
            ("profile", profile),
            ("profile_prompt", profile_prompt),
            ("context_text", context_text),
        ]),
        sampling,
    )
}

pub fn score_creativity(response: &str, sampling: SamplingParams) -> OracleRequest {
    request(
        RequestKind::ScoreCreativity,
        "score_creativity",
        vars(&[("response", response)]),
        sampling,
    )
}

/// 0-100 structural score for one candidate outline branch.
pub fn score_chain(title: &str, theme: &str, chain: &str, sampling: SamplingParams) -> OracleRequest {
    request(
        RequestKind::SelectOption,
        "score_chain",
        vars(&[("title", title), ("theme", theme), ("chain", chain)]),
        sampling,
    )
}

/// Pick the divisible slot to expand next within a branch.
pub fn choose_leaf(chain: &str, options: &str, sampling: SamplingParams) -> OracleRequest {
    request(
        RequestKind::SelectOption,
        "choose_leaf",
        vars(&[("chain", chain), ("options", options)]),
        sampling,
    )
}

/// Pick one option from a rule pool.
pub fn choose_option(
    title: &str,
    theme: &str,
    parent_label: &str,
    options: &str,
    sampling: SamplingParams,
) -> OracleRequest {
    request(
        RequestKind::SelectOption,
        "choose_option",
        vars(&[
            ("title", title),
            ("theme", theme),
            ("parent_label", parent_label),
            ("options", options),
        ]),
        sampling,
    )
}

/// Pick `min..=max` options from a rule pool.
pub fn choose_options(
    title: &str,
    theme: &str,
    parent_label: &str,
    options: &str,
    min: usize,
    max: usize,
    sampling: SamplingParams,
) -> OracleRequest {
    request(
        RequestKind::SelectOption,
        "choose_options",
        vars(&[
            ("title", title),
            ("theme", theme),
            ("parent_label", parent_label),
            ("options", options),
            ("min", &min.to_string()),
            ("max", &max.to_string()),
        ]),
        sampling,
    )
}

/// Same request re-issued after a parse failure. The extra variables change
/// the fingerprint, so scripted mocks can stage a different second reply,
/// and the error text is surfaced to live models via the repair preamble.
pub fn repair(mut original: OracleRequest, error: &str) -> OracleRequest {
    original
        .variables
        .insert("attempt".to_string(), "1".to_string());
    original
        .variables
        .insert("parse_error".to_string(), error.to_string());
    original
}

/// Separator used when rendering option pools into a single variable.
pub const OPTION_SEPARATOR: &str = " | ";

pub fn join_options<S: AsRef<str>>(options: &[S]) -> String {
    options
        .iter()
        .map(|s| s.as_ref())
        .collect::<Vec<_>>()
        .join(OPTION_SEPARATOR)
}
