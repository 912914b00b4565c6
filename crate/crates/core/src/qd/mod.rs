//! MAP-Elites quality-diversity optimizer.
//!
//! Contexts are mapped into a 3D behavior space (proximity scope, knowledge
//! density, viewpoint diversity), the unit cube is discretized into a grid
//! of niches, and each niche stores the single highest-fitness context seen.
//! Evolution samples parent elites, asks the oracle for niche-targeted
//! edits, and inserts mutants under a strict-improvement replacement rule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{EventLog, PipelineEvent};
use crate::gateway::{Gateway, OracleError};
use crate::mcts::{Context, Provenance};
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("context `{0}` is missing its descriptor or fitness")]
    MissingEvaluation(String),
    #[error("mutation reply was byte-equal to the parent after one re-ask")]
    NoOpMutation,
    #[error("mutation reply was empty after one re-ask")]
    EmptyGeneration,
    #[error("archive has no seeds")]
    NoSeeds,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Behavior descriptor `b(C)` in the unit cube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorDescriptor {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl BehaviorDescriptor {
    /// Builds a descriptor, clamping each component into `[0, 1]`.
    pub fn new(phi1: f64, phi2: f64, phi3: f64) -> Self {
        Self {
            phi1: phi1.clamp(0.0, 1.0),
            phi2: phi2.clamp(0.0, 1.0),
            phi3: phi3.clamp(0.0, 1.0),
        }
    }
}

/// Grid coordinates of one behavioral niche.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NicheIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl NicheIndex {
    pub fn as_array(&self) -> [usize; 3] {
        [self.i, self.j, self.k]
    }

    /// The center of this cell in behavior space.
    pub fn center(&self, bins: usize) -> BehaviorDescriptor {
        let half = |v: usize| (v as f64 + 0.5) / bins as f64;
        BehaviorDescriptor::new(half(self.i), half(self.j), half(self.k))
    }
}

/// Uniform discretization: `min(floor(value * bins), bins - 1)` per axis.
pub fn niche_index(descriptor: &BehaviorDescriptor, bins: usize) -> NicheIndex {
    debug_assert!(bins >= 1);
    let axis = |v: f64| ((v * bins as f64).floor() as usize).min(bins - 1);
    NicheIndex {
        i: axis(descriptor.phi1),
        j: axis(descriptor.phi2),
        k: axis(descriptor.phi3),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationOperator {
    Insertion,
    Deletion,
    Replacement,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 3] = [
        MutationOperator::Insertion,
        MutationOperator::Deletion,
        MutationOperator::Replacement,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MutationOperator::Insertion => "Insertion",
            MutationOperator::Deletion => "Deletion",
            MutationOperator::Replacement => "Replacement",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MutationSpec {
    pub operator: MutationOperator,
    pub target_descriptor: BehaviorDescriptor,
    pub parent: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EliteCell {
    pub context: Context,
    pub fitness: f64,
}

/// The 3D grid archive: at most one elite per niche.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "ArchiveFile", try_from = "ArchiveFile")]
pub struct EliteArchive {
    bins: usize,
    cells: BTreeMap<NicheIndex, EliteCell>,
    generation: u64,
}

/// Serialized archive layout: per-cell records keyed by niche coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveFile {
    pub bins: usize,
    pub generation: u64,
    pub cells: Vec<ArchiveCellRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveCellRecord {
    pub niche: [usize; 3],
    pub fitness: f64,
    pub context: Context,
}

impl From<EliteArchive> for ArchiveFile {
    fn from(archive: EliteArchive) -> Self {
        let cells = archive
            .cells
            .into_iter()
            .map(|(niche, cell)| ArchiveCellRecord {
                niche: niche.as_array(),
                fitness: cell.fitness,
                context: cell.context,
            })
            .collect();
        ArchiveFile {
            bins: archive.bins,
            generation: archive.generation,
            cells,
        }
    }
}

impl TryFrom<ArchiveFile> for EliteArchive {
    type Error = String;

    fn try_from(file: ArchiveFile) -> Result<Self, Self::Error> {
        if file.bins < 1 {
            return Err("bins must be >= 1".to_string());
        }
        let mut cells = BTreeMap::new();
        for record in file.cells {
            let [i, j, k] = record.niche;
            if i >= file.bins || j >= file.bins || k >= file.bins {
                return Err(format!("niche {:?} out of range for bins {}", record.niche, file.bins));
            }
            let niche = NicheIndex { i, j, k };
            if cells
                .insert(
                    niche,
                    EliteCell { context: record.context, fitness: record.fitness },
                )
                .is_some()
            {
                return Err(format!("duplicate niche {:?}", record.niche));
            }
        }
        Ok(EliteArchive { bins: file.bins, cells, generation: file.generation })
    }
}

/// Outcome of one insertion attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InsertOutcome {
    InsertedEmpty,
    Replaced,
    RejectedLower,
    RejectedTie,
}

impl InsertOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            InsertOutcome::InsertedEmpty => "inserted_empty",
            InsertOutcome::Replaced => "replaced",
            InsertOutcome::RejectedLower => "rejected_lower",
            InsertOutcome::RejectedTie => "rejected_tie",
        }
    }
}

impl EliteArchive {
    pub fn new(bins: usize) -> Self {
        Self {
            bins: bins.max(1),
            cells: BTreeMap::new(),
            generation: 0,
        }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn occupied(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &BTreeMap<NicheIndex, EliteCell> {
        &self.cells
    }

    pub fn cell(&self, niche: &NicheIndex) -> Option<&EliteCell> {
        self.cells.get(niche)
    }

    /// Niches with no elite yet, in grid order.
    pub fn empty_niches(&self) -> Vec<NicheIndex> {
        let mut empties = Vec::new();
        for i in 0..self.bins {
            for j in 0..self.bins {
                for k in 0..self.bins {
                    let niche = NicheIndex { i, j, k };
                    if !self.cells.contains_key(&niche) {
                        empties.push(niche);
                    }
                }
            }
        }
        empties
    }

    /// The occupied cell with the highest fitness (ties to the lower niche).
    pub fn best(&self) -> Option<(&NicheIndex, &EliteCell)> {
        self.cells.iter().fold(None, |best, entry| match best {
            Some((_, cell)) if cell.fitness >= entry.1.fitness => best,
            _ => Some(entry),
        })
    }

    pub fn advance_generation(&mut self) {
        self.generation += 1;
    }
}

/// One `DescribeBehavior` request, parsed and clamped.
pub fn describe(gateway: &Gateway, context: &Context) -> Result<BehaviorDescriptor, EvolveError> {
    let (phi1, phi2, phi3) = gateway.describe_behavior(&context.text)?;
    Ok(BehaviorDescriptor::new(phi1, phi2, phi3))
}

/// One `ScoreContext` request averaged into fitness `F(C)`.
pub fn fitness(gateway: &Gateway, context: &Context) -> Result<f64, EvolveError> {
    let scores = gateway.score_context(&context.text)?;
    Ok((scores.s_coh + scores.s_rel + scores.s_eng) / 3.0)
}

/// Fills in descriptor and fitness if absent. Both are computed once per
/// context and cached on it.
pub fn ensure_evaluated(gateway: &Gateway, context: &mut Context) -> Result<(), EvolveError> {
    if context.descriptor.is_none() {
        context.descriptor = Some(describe(gateway, context)?);
    }
    if context.fitness.is_none() {
        context.fitness = Some(fitness(gateway, context)?);
    }
    Ok(())
}

/// Oracle-edited child of `parent` targeting `spec.target_descriptor`.
///
/// The reply must be non-empty and differ from the parent text; one re-ask
/// is attempted before failing.
pub fn mutate(
    gateway: &Gateway,
    parent: &Context,
    spec: &MutationSpec,
    child_id: &str,
) -> Result<Context, EvolveError> {
    let target = (
        spec.target_descriptor.phi1,
        spec.target_descriptor.phi2,
        spec.target_descriptor.phi3,
    );
    let first = gateway
        .generate_mutant(spec.operator.as_str(), &parent.text, target)?
        .trim()
        .to_string();

    let text = if first.is_empty() || first == parent.text {
        let reason = if first.is_empty() {
            "reply was empty"
        } else {
            "reply was identical to the parent text"
        };
        let second = gateway
            .generate_mutant_retry(spec.operator.as_str(), &parent.text, target, reason)?
            .trim()
            .to_string();
        if second.is_empty() {
            return Err(EvolveError::EmptyGeneration);
        }
        if second == parent.text {
            return Err(EvolveError::NoOpMutation);
        }
        second
    } else {
        first
    };

    Ok(Context {
        context_id: child_id.to_string(),
        text,
        outline: parent.outline.clone(),
        provenance: Provenance::Mutant,
        descriptor: None,
        fitness: None,
        parent: Some(parent.context_id.clone()),
        lineage_root: parent.lineage_root.clone(),
    })
}

/// Strict elite replacement: empty niches take the candidate, occupied
/// niches are replaced only on strictly greater fitness; exact ties keep
/// the incumbent.
pub fn try_insert(
    archive: &mut EliteArchive,
    candidate: Context,
) -> Result<(InsertOutcome, NicheIndex), EvolveError> {
    let descriptor = candidate
        .descriptor
        .ok_or_else(|| EvolveError::MissingEvaluation(candidate.context_id.clone()))?;
    let candidate_fitness = candidate
        .fitness
        .ok_or_else(|| EvolveError::MissingEvaluation(candidate.context_id.clone()))?;
    let niche = niche_index(&descriptor, archive.bins);

    let outcome = match archive.cells.get(&niche) {
        None => {
            archive.cells.insert(
                niche,
                EliteCell { context: candidate, fitness: candidate_fitness },
            );
            InsertOutcome::InsertedEmpty
        }
        Some(incumbent) if candidate_fitness > incumbent.fitness => {
            archive.cells.insert(
                niche,
                EliteCell { context: candidate, fitness: candidate_fitness },
            );
            InsertOutcome::Replaced
        }
        Some(incumbent) if candidate_fitness == incumbent.fitness => InsertOutcome::RejectedTie,
        Some(_) => InsertOutcome::RejectedLower,
    };
    Ok((outcome, niche))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvolveBudget {
    pub iterations: usize,
    pub mutants_per_iteration: usize,
}

impl Default for EvolveBudget {
    fn default() -> Self {
        Self { iterations: 30, mutants_per_iteration: 4 }
    }
}

/// Runs MAP-Elites: inserts the seeds, then per iteration samples parents
/// uniformly, schedules operators round-robin, draws targets biased toward
/// empty niches, mutates, evaluates, and inserts. A failed mutant is logged
/// and skipped, never fatal.
pub fn evolve(
    gateway: &Gateway,
    archive: &mut EliteArchive,
    seeds: Vec<Context>,
    budget: &EvolveBudget,
    rng: &mut SplitMix64,
    label_prefix: &str,
    events: &mut EventLog,
) -> Result<(), EvolveError> {
    if seeds.is_empty() && archive.occupied() == 0 {
        return Err(EvolveError::NoSeeds);
    }

    for mut seed in seeds {
        ensure_evaluated(gateway, &mut seed)?;
        let id = seed.context_id.clone();
        let seed_fitness = seed.fitness.expect("just evaluated");
        let niche = niche_index(&seed.descriptor.expect("just evaluated"), archive.bins());
        let incumbent = archive.cell(&niche).map(|c| c.fitness);
        let (outcome, niche) = try_insert(archive, seed)?;
        events.push(PipelineEvent::ArchiveInsert {
            context_id: id,
            niche: niche.as_array(),
            fitness: seed_fitness,
            outcome: outcome.as_str().to_string(),
            incumbent_fitness: incumbent,
            generation: archive.generation(),
        });
    }

    let mut operator_cursor = 0usize;
    for _ in 0..budget.iterations {
        for m in 0..budget.mutants_per_iteration {
            let occupied: Vec<NicheIndex> = archive.cells.keys().copied().collect();
            let parent_niche = occupied[rng.next_below(occupied.len() as u64) as usize];
            let parent = archive.cells[&parent_niche].context.clone();

            let operator = MutationOperator::ALL[operator_cursor % MutationOperator::ALL.len()];
            operator_cursor += 1;

            let empties = archive.empty_niches();
            let target = if !empties.is_empty() && rng.chance(0.5) {
                empties[rng.next_below(empties.len() as u64) as usize].center(archive.bins)
            } else {
                perturbed_target(&parent, parent_niche, archive.bins, rng)
            };

            let spec = MutationSpec {
                operator,
                target_descriptor: target,
                parent: parent.context_id.clone(),
            };
            let child_id = format!("{label_prefix}-g{:03}-m{m}", archive.generation() + 1);

            match mutate_and_insert(gateway, archive, &parent, &spec, &child_id) {
                Ok((outcome, niche, child_fitness, incumbent)) => {
                    events.push(PipelineEvent::ArchiveInsert {
                        context_id: child_id,
                        niche: niche.as_array(),
                        fitness: child_fitness,
                        outcome: outcome.as_str().to_string(),
                        incumbent_fitness: incumbent,
                        generation: archive.generation(),
                    });
                }
                Err(error) => {
                    events.push(PipelineEvent::MutantFailed {
                        parent: parent.context_id.clone(),
                        operator: operator.as_str().to_string(),
                        reason: error.to_string(),
                        generation: archive.generation(),
                    });
                }
            }
        }
        archive.advance_generation();
        events.push(PipelineEvent::GenerationAdvanced {
            generation: archive.generation(),
            occupied: archive.occupied(),
        });
    }
    Ok(())
}

fn mutate_and_insert(
    gateway: &Gateway,
    archive: &mut EliteArchive,
    parent: &Context,
    spec: &MutationSpec,
    child_id: &str,
) -> Result<(InsertOutcome, NicheIndex, f64, Option<f64>), EvolveError> {
    let mut child = mutate(gateway, parent, spec, child_id)?;
    ensure_evaluated(gateway, &mut child)?;
    let child_fitness = child.fitness.expect("just evaluated");
    let niche = niche_index(&child.descriptor.expect("just evaluated"), archive.bins());
    let incumbent = archive.cell(&niche).map(|c| c.fitness);
    let (outcome, niche) = try_insert(archive, child)?;
    Ok((outcome, niche, child_fitness, incumbent))
}

/// Target drawn by shifting the parent's cell by at most one cell per axis.
fn perturbed_target(
    parent: &Context,
    parent_niche: NicheIndex,
    bins: usize,
    rng: &mut SplitMix64,
) -> BehaviorDescriptor {
    let base = parent
        .descriptor
        .map(|d| niche_index(&d, bins))
        .unwrap_or(parent_niche);
    let shift = |v: usize, rng: &mut SplitMix64| -> usize {
        let offset = rng.next_below(3) as i64 - 1;
        (v as i64 + offset).clamp(0, bins as i64 - 1) as usize
    };
    NicheIndex {
        i: shift(base.i, rng),
        j: shift(base.j, rng),
        k: shift(base.k, rng),
    }
    .center(bins)
}
