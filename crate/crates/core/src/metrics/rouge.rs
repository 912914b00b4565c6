//! ROUGE-1 and ROUGE-L over lowercased, punctuation-stripped tokens.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Lowercases, strips punctuation, and splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let token: String = raw
                .chars()
                .filter(|c| !c.is_ascii_punctuation())
                .collect::<String>()
                .to_lowercase();
            if token.is_empty() {
                None
            } else {
                Some(token)
            }
        })
        .collect()
}

fn harmonic_mean(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Unigram overlap with clipped counts.
pub fn rouge_1(candidate: &str, reference: &str) -> RougeScore {
    let cand = tokenize(candidate);
    let reference = tokenize(reference);
    if cand.is_empty() || reference.is_empty() {
        return RougeScore::default();
    }

    let mut ref_counts: HashMap<&str, usize> = HashMap::new();
    for token in &reference {
        *ref_counts.entry(token.as_str()).or_default() += 1;
    }
    let mut overlap = 0usize;
    for token in &cand {
        if let Some(count) = ref_counts.get_mut(token.as_str()) {
            if *count > 0 {
                *count -= 1;
                overlap += 1;
            }
        }
    }

    let precision = overlap as f64 / cand.len() as f64;
    let recall = overlap as f64 / reference.len() as f64;
    RougeScore {
        precision,
        recall,
        f1: harmonic_mean(precision, recall),
    }
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut previous = vec![0usize; b.len() + 1];
    let mut current = vec![0usize; b.len() + 1];
    for token_a in a {
        for (j, token_b) in b.iter().enumerate() {
            current[j + 1] = if token_a == token_b {
                previous[j] + 1
            } else {
                current[j].max(previous[j + 1])
            };
        }
        std::mem::swap(&mut previous, &mut current);
    }
    previous[b.len()]
}

/// Longest-common-subsequence overlap over the token sequences.
pub fn rouge_l(candidate: &str, reference: &str) -> RougeScore {
    let cand = tokenize(candidate);
    let reference = tokenize(reference);
    if cand.is_empty() || reference.is_empty() {
        return RougeScore::default();
    }
    let lcs = lcs_len(&cand, &reference) as f64;
    let precision = lcs / cand.len() as f64;
    let recall = lcs / reference.len() as f64;
    RougeScore {
        precision,
        recall,
        f1: harmonic_mean(precision, recall),
    }
}
