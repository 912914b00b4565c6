//! Append-only pipeline event log.
//!
//! Every stage pushes typed events into one totally ordered log; invariant
//! tests and the run report read them back. Events carry no wall-clock
//! timestamps so logs replay byte-identically under the mock backend.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum PipelineEvent {
    StageStarted {
        query_id: String,
        stage: String,
    },
    StageCompleted {
        query_id: String,
        stage: String,
    },
    ArchiveInsert {
        context_id: String,
        niche: [usize; 3],
        fitness: f64,
        outcome: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        incumbent_fitness: Option<f64>,
        generation: u64,
    },
    MutantFailed {
        parent: String,
        operator: String,
        reason: String,
        generation: u64,
    },
    GenerationAdvanced {
        generation: u64,
        occupied: usize,
    },
    RefineVerdict {
        context_id: String,
        psi: f64,
        verdict: String,
        cycle: u32,
    },
    RouteBackEnqueued {
        context_id: String,
    },
    BonusEvolutionRound {
        query_id: String,
        contexts: Vec<String>,
    },
    QueryFailed {
        query_id: String,
        error: String,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EventLog {
    events: Vec<PipelineEvent>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: PipelineEvent) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[PipelineEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// One JSON object per line, in log order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("events serialize"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_has_one_line_per_event() {
        let mut log = EventLog::new();
        log.push(PipelineEvent::StageStarted {
            query_id: "q".to_string(),
            stage: "plan".to_string(),
        });
        log.push(PipelineEvent::RouteBackEnqueued {
            context_id: "c".to_string(),
        });
        assert_eq!(log.to_jsonl().lines().count(), 2);
        assert_eq!(log.len(), 2);
    }
}
