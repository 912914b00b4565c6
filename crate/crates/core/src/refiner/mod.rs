//! Assessment-guided refinement gate.
//!
//! Each candidate context is shown to styled virtual participants
//! (talkative, normal, quiet) simulated at temperature 0; their responses
//! are scored for creativity and averaged into the effectiveness Psi. A
//! context whose Psi strictly exceeds the threshold is assessment-ready;
//! otherwise it is routed back to evolution, with a per-lineage cycle cap
//! that downgrades to ready-with-warning instead of looping forever.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{Gateway, OracleError};
use crate::mcts::Context;

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("profile `{profile}` produced an empty response")]
    EmptyGeneration { profile: String },
    #[error("no profiles configured")]
    NoProfiles,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileName {
    Talkative,
    Normal,
    Quiet,
}

impl ProfileName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileName::Talkative => "Talkative",
            ProfileName::Normal => "Normal",
            ProfileName::Quiet => "Quiet",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "Talkative" => Some(ProfileName::Talkative),
            "Normal" => Some(ProfileName::Normal),
            "Quiet" => Some(ProfileName::Quiet),
            _ => None,
        }
    }
}

/// A role-conditioning profile for the participant simulator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticipantProfile {
    pub name: ProfileName,
    pub prompt_fragment: String,
}

/// The three bundled profiles, in presentation order.
pub fn default_profiles() -> Vec<ParticipantProfile> {
    vec![
        ParticipantProfile {
            name: ProfileName::Talkative,
            prompt_fragment: include_str!("../../assets/profiles/talkative.txt")
                .trim()
                .to_string(),
        },
        ParticipantProfile {
            name: ProfileName::Normal,
            prompt_fragment: include_str!("../../assets/profiles/normal.txt").trim().to_string(),
        },
        ParticipantProfile {
            name: ProfileName::Quiet,
            prompt_fragment: include_str!("../../assets/profiles/quiet.txt").trim().to_string(),
        },
    ]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub profile: ProfileName,
    pub text: String,
    pub creativity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Ready,
    RouteBack,
    ReadyWithWarning,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Ready => "ready",
            Verdict::RouteBack => "route_back",
            Verdict::ReadyWithWarning => "ready_with_warning",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectivenessReport {
    pub context_id: String,
    pub responses: Vec<ResponseRecord>,
    pub psi: f64,
    pub verdict: Verdict,
    /// Route-back count for this context's lineage so far.
    pub cycle: u32,
}

/// One `SimulateResponse` call per profile, in profile order.
pub fn simulate_responses(
    gateway: &Gateway,
    context: &Context,
    profiles: &[ParticipantProfile],
) -> Result<Vec<(ProfileName, String)>, RefineError> {
    if profiles.is_empty() {
        return Err(RefineError::NoProfiles);
    }
    let mut responses = Vec::with_capacity(profiles.len());
    for profile in profiles {
        let text = gateway.simulate_response(
            profile.name.as_str(),
            &profile.prompt_fragment,
            &context.text,
        )?;
        if text.trim().is_empty() {
            return Err(RefineError::EmptyGeneration {
                profile: profile.name.as_str().to_string(),
            });
        }
        responses.push((profile.name, text));
    }
    Ok(responses)
}

/// `Psi(C)`: the arithmetic mean of the creativity scores.
pub fn effectiveness(scores: &[f64]) -> f64 {
    assert!(!scores.is_empty(), "effectiveness needs at least one score");
    scores.iter().sum::<f64>() / scores.len() as f64
}

/// The refinement gate. Holds per-lineage route-back counts so persistently
/// weak lineages terminate in `ReadyWithWarning` after `max_cycles`.
#[derive(Debug, Clone)]
pub struct Refiner {
    pub threshold: f64,
    pub max_cycles: u32,
    pub profiles: Vec<ParticipantProfile>,
    route_backs: BTreeMap<String, u32>,
}

impl Refiner {
    pub fn new(threshold: f64, max_cycles: u32, profiles: Vec<ParticipantProfile>) -> Self {
        Self {
            threshold,
            max_cycles: max_cycles.max(1),
            profiles,
            route_backs: BTreeMap::new(),
        }
    }

    pub fn route_backs_for(&self, lineage_root: &str) -> u32 {
        self.route_backs.get(lineage_root).copied().unwrap_or(0)
    }

    /// Simulates, scores, and gates one context. `Psi > threshold` is
    /// required for `Ready` (a Psi exactly at the threshold routes back).
    pub fn refine(
        &mut self,
        gateway: &Gateway,
        context: &Context,
    ) -> Result<EffectivenessReport, RefineError> {
        let responses = simulate_responses(gateway, context, &self.profiles)?;
        let mut records = Vec::with_capacity(responses.len());
        for (profile, text) in responses {
            let creativity = gateway.score_creativity(&text)?;
            records.push(ResponseRecord { profile, text, creativity });
        }
        let scores: Vec<f64> = records.iter().map(|r| r.creativity).collect();
        let psi = effectiveness(&scores);

        let lineage = context.lineage_root.clone();
        let prior = self.route_backs_for(&lineage);
        let (verdict, cycle) = if psi > self.threshold {
            (Verdict::Ready, prior)
        } else if prior < self.max_cycles {
            self.route_backs.insert(lineage, prior + 1);
            (Verdict::RouteBack, prior + 1)
        } else {
            (Verdict::ReadyWithWarning, prior)
        };

        Ok(EffectivenessReport {
            context_id: context.context_id.clone(),
            responses: records,
            psi,
            verdict,
            cycle,
        })
    }
}

impl Default for Refiner {
    fn default() -> Self {
        Self::new(0.6, 3, default_profiles())
    }
}
