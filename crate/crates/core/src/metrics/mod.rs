//! Evaluation battery: arena-style pairwise judging with position-bias
//! mitigation, positive-rate aggregation, and the deterministic text
//! metrics (action diversity, ROUGE, kappa, Spearman, R²).

pub mod rouge;
pub mod stats;
pub mod verbs;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{Gateway, JudgeLabel, OracleError};

pub use rouge::{rouge_1, rouge_l, RougeScore};
pub use stats::{cohens_kappa, r_squared, spearman};
pub use verbs::{diverse_verbs, VerbLexicon};

/// The six subjective judged dimensions, in reporting order.
pub const SUBJECTIVE_METRICS: [&str; 6] = [
    "coherence",
    "relevance",
    "engagement",
    "significance",
    "concreteness",
    "uncertainty",
];

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("no valid verdict sets to aggregate")]
    NoValidVerdicts,
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Which presentation order a judgment was collected under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PassOrder {
    /// Candidate shown as Context A, reference as Context B.
    AB,
    /// Swapped presentation; the stored label is re-oriented to AB frame.
    BA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedLabel {
    pub order: PassOrder,
    /// Always expressed in the (a, b) frame.
    pub label: JudgeLabel,
}

/// Four judgments of one pair: both orders, two rounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairVerdictSet {
    pub metric: String,
    pub context_a_id: String,
    pub context_b_id: String,
    pub labels: Vec<OrientedLabel>,
}

/// Judges `(a, b)`, `(b, a)`, `(a, b)`, `(b, a)`; swapped-order labels are
/// re-oriented to the `(a, b)` frame before storage.
pub fn run_pair(
    gateway: &Gateway,
    metric: &str,
    context_a_id: &str,
    context_a: &str,
    context_b_id: &str,
    context_b: &str,
) -> Result<PairVerdictSet, MetricError> {
    if context_a.trim().is_empty() || context_b.trim().is_empty() {
        return Err(MetricError::Domain("both contexts must be non-empty".to_string()));
    }
    let mut labels = Vec::with_capacity(4);
    for round in 1..=2u32 {
        let direct = gateway.judge_pair(context_a, context_b, metric, round)?;
        labels.push(OrientedLabel { order: PassOrder::AB, label: direct });

        let swapped = gateway.judge_pair(context_b, context_a, metric, round)?;
        labels.push(OrientedLabel {
            order: PassOrder::BA,
            label: swapped.flipped(),
        });
    }
    Ok(PairVerdictSet {
        metric: metric.to_string(),
        context_a_id: context_a_id.to_string(),
        context_b_id: context_b_id.to_string(),
        labels,
    })
}

/// Aggregated pairwise outcome for one method on one metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub method: String,
    /// `(wins + 0.5 * ties) / total`, in [0, 1].
    pub positive_rate: f64,
    pub wins: u64,
    pub ties: u64,
    pub losses: u64,
}

impl MetricReport {
    pub fn total(&self) -> u64 {
        self.wins + self.ties + self.losses
    }
}

/// Scores the candidate (the A side) over a batch of verdict sets: both
/// win levels count as a win, a tie as half.
pub fn positive_rate(
    verdicts: &[PairVerdictSet],
    metric: &str,
    method: &str,
) -> Result<MetricReport, MetricError> {
    if verdicts.is_empty() {
        return Err(MetricError::NoValidVerdicts);
    }
    let mut wins = 0u64;
    let mut ties = 0u64;
    let mut losses = 0u64;
    for set in verdicts {
        for oriented in &set.labels {
            match oriented.label {
                JudgeLabel::StrongA | JudgeLabel::PreferA => wins += 1,
                JudgeLabel::Tie => ties += 1,
                JudgeLabel::PreferB | JudgeLabel::StrongB => losses += 1,
            }
        }
    }
    let total = wins + ties + losses;
    Ok(MetricReport {
        metric: metric.to_string(),
        method: method.to_string(),
        positive_rate: (wins as f64 + 0.5 * ties as f64) / total as f64,
        wins,
        ties,
        losses,
    })
}
