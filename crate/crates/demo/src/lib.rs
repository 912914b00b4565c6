//! Browser demo over the core pipeline.
//!
//! Three interactive operations run fully client-side against a synthetic
//! in-memory oracle (a [`Backend`] whose replies are hash-derived from each
//! request, so every run replays deterministically for a given seed):
//!
//! - `plan_outline` — rule-guided hypertree construction and the decided
//!   outline for a title/theme.
//! - `run_search` — sentence-level UCT search over a synthetic reward
//!   landscape, exposing visit counts, values, and the extracted path.
//! - `evolve_archive` — MAP-Elites evolution with per-generation coverage
//!   and the final niche grid.
//!
//! Each export returns a JSON string for the page's renderer.

use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

use scenforge::gateway::{Backend, BackendReply, Gateway, OracleError, OracleRequest};
use scenforge::mcts::{self, EvaluationWeights, SearchBudget};
use scenforge::planner::{self, Outline, OutlineSection, PlanLimits, Query, RuleLibrary};
use scenforge::qd::{self, EliteArchive, EvolveBudget};
use scenforge::rng::fnv1a64;

/// Deterministic synthetic oracle: every reply is a pure function of the
/// request fingerprint and the demo seed.
struct SyntheticBackend {
    seed: u64,
}

impl SyntheticBackend {
    fn hash(&self, request: &OracleRequest, salt: &str) -> u64 {
        let fp = scenforge::gateway::fingerprint(request);
        fnv1a64(format!("{fp}:{salt}:{}", self.seed).as_bytes())
    }

    fn pick<'a>(&self, request: &OracleRequest, salt: &str, pool: &[&'a str]) -> &'a str {
        pool[(self.hash(request, salt) % pool.len() as u64) as usize]
    }

    fn options(request: &OracleRequest) -> Vec<String> {
        request
            .variables
            .get("options")
            .map(|o| o.split(" | ").map(str::to_string).collect())
            .unwrap_or_default()
    }

    fn unit(&self, request: &OracleRequest, salt: &str) -> f64 {
        (self.hash(request, salt) % 100) as f64 / 100.0
    }

    fn sentence(&self, request: &OracleRequest) -> String {
        const ACTORS: [&str; 6] = [
            "The council", "A field team", "Local families", "The planning board",
            "Young volunteers", "An oversight group",
        ];
        const ACTIONS: [&str; 6] = [
            "weighs", "questions", "maps", "tests", "defends", "reworks",
        ];
        const OBJECTS: [&str; 6] = [
            "a fragile compromise", "the rollout timetable", "an unproven safeguard",
            "the shared budget", "a quiet trade-off", "the fallback plan",
        ];
        const TAILS: [&str; 4] = [
            "as costs shift", "while trust frays", "under public scrutiny",
            "before the deadline",
        ];
        format!(
            "{} {} {} {}.",
            self.pick(request, "actor", &ACTORS),
            self.pick(request, "action", &ACTIONS),
            self.pick(request, "object", &OBJECTS),
            self.pick(request, "tail", &TAILS),
        )
    }
}

impl Backend for SyntheticBackend {
    fn name(&self) -> &str {
        "synthetic"
    }

    fn reply(
        &self,
        request: &OracleRequest,
        _system: &str,
        _user: &str,
    ) -> Result<BackendReply, OracleError> {
        let text = match request.template_id.as_str() {
            "generate_sentence" => self.sentence(request),
            "generate_lookahead" => format!("{} {}", self.sentence(request), "The pause does not last."),
            "generate_mutant" => {
                // Embed the target profile so the descriptor rater below can
                // move the mutant toward its niche, with a little jitter.
                let phi = |k: &str| request.variables.get(k).cloned().unwrap_or_default();
                format!(
                    "[styled {} {} {}] {}",
                    phi("phi1"),
                    phi("phi2"),
                    phi("phi3"),
                    self.sentence(request)
                )
            }
            "generate_phrase" => "pressure on shared ground".to_string(),
            "score_fragment" => format!(
                r#"{{"sc": {}, "im": {}, "co": {}, "ha": 1}}"#,
                1 + self.hash(request, "sc") % 5,
                1 + self.hash(request, "im") % 5,
                1 + self.hash(request, "co") % 5,
            ),
            "score_context" => format!(
                r#"{{"coh": {:.2}, "rel": {:.2}, "eng": {:.2}}}"#,
                self.unit(request, "coh"),
                self.unit(request, "rel"),
                self.unit(request, "eng"),
            ),
            "describe_behavior" => {
                let text = request.variables.get("text").cloned().unwrap_or_default();
                let (p1, p2, p3) = match styled_profile(&text) {
                    Some(target) => target,
                    None => (
                        self.unit(request, "p1"),
                        self.unit(request, "p2"),
                        self.unit(request, "p3"),
                    ),
                };
                format!(r#"{{"phi1": {p1:.2}, "phi2": {p2:.2}, "phi3": {p3:.2}}}"#)
            }
            "score_creativity" => format!(r#"{{"rating": {}}}"#, 1 + self.hash(request, "cre") % 5),
            "simulate_response" => format!("I can see several tensions here. {}", self.sentence(request)),
            "judge_pair" => "Tie".to_string(),
            "score_chain" => format!(r#"{{"score": {}}}"#, self.hash(request, "chain") % 101),
            "choose_leaf" | "choose_option" => {
                let options = Self::options(request);
                let index = (self.hash(request, "choice") % options.len() as u64) as usize;
                format!(r#"{{"choice": "{}"}}"#, options[index])
            }
            "choose_options" => {
                let options = Self::options(request);
                let min: usize = request.variables["min"].parse().unwrap_or(1);
                let max: usize = request.variables["max"].parse().unwrap_or(min);
                let count = (min + (self.hash(request, "count") % (max - min + 1) as u64) as usize)
                    .min(options.len());
                let start = (self.hash(request, "start") % options.len() as u64) as usize;
                let picks: Vec<String> = (0..count)
                    .map(|j| format!("\"{}\"", options[(start + j) % options.len()]))
                    .collect();
                format!(r#"{{"choices": [{}]}}"#, picks.join(", "))
            }
            other => format!("synthetic reply for {other}"),
        };
        Ok(BackendReply { text, prompt_tokens: None, completion_tokens: None })
    }
}

/// Parses the `[styled p1 p2 p3]` prefix mutants carry.
fn styled_profile(text: &str) -> Option<(f64, f64, f64)> {
    let inner = text.strip_prefix("[styled ")?.split(']').next()?;
    let mut parts = inner.split_whitespace();
    let p1 = parts.next()?.parse().ok()?;
    let p2 = parts.next()?.parse().ok()?;
    let p3 = parts.next()?.parse().ok()?;
    Some((p1, p2, p3))
}

fn gateway(seed: u64) -> Gateway {
    Gateway::new(Box::new(SyntheticBackend { seed })).with_seed(seed)
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

// ---- plan_outline -----------------------------------------------------------

#[derive(Serialize)]
struct TreeNodeView {
    id: String,
    label: String,
    payload: Option<String>,
    parent: Option<usize>,
    depth: usize,
}

#[derive(Serialize)]
struct PlanView {
    nodes: Vec<TreeNodeView>,
    outline: Outline,
    node_count: usize,
}

/// Builds a hypertree outline for a title/theme with the bundled grammar.
#[wasm_bindgen]
pub fn plan_outline(title: &str, theme: &str, seed: u32) -> String {
    let query = match Query::new(title, theme) {
        Ok(query) => query,
        Err(error) => return error_json(&error.to_string()),
    };
    let gateway = gateway(u64::from(seed));
    let rules = RuleLibrary::bundled();
    let tree = match planner::ht_construct(&gateway, query, &rules, PlanLimits::default()) {
        Ok(tree) => tree,
        Err(error) => return error_json(&error.to_string()),
    };
    let outline = match planner::ht_decide(&gateway, &tree) {
        Ok(outline) => outline,
        Err(error) => return error_json(&error.to_string()),
    };
    let nodes: Vec<TreeNodeView> = tree
        .nodes()
        .iter()
        .map(|node| TreeNodeView {
            id: node.id.clone(),
            label: node.label.clone(),
            payload: node.payload.clone(),
            parent: node.parent,
            depth: node.depth,
        })
        .collect();
    let view = PlanView { node_count: nodes.len(), nodes, outline };
    serde_json::to_string(&view).unwrap_or_else(|e| error_json(&e.to_string()))
}

// ---- run_search -------------------------------------------------------------

#[derive(Serialize)]
struct SearchNodeView {
    id: String,
    fragment: String,
    visits: u64,
    value: f64,
    parent: Option<usize>,
    depth: usize,
}

#[derive(Serialize)]
struct SimView {
    sim: usize,
    r_e: f64,
    lookahead: bool,
}

#[derive(Serialize)]
struct SearchView {
    nodes: Vec<SearchNodeView>,
    best_path: Vec<usize>,
    sims: Vec<SimView>,
    lookaheads: usize,
    extracted: String,
}

/// Runs one section's UCT search over the synthetic reward landscape.
/// `c_centi` and `tau_centi` are hundredths (e.g. 141 -> c = 1.41).
#[wasm_bindgen]
pub fn run_search(seed: u32, simulations: u32, u: u32, depth_cap: u32, c_centi: u32, tau_centi: u32) -> String {
    if simulations == 0 || u == 0 || depth_cap == 0 {
        return error_json("simulations, u, and depth_cap must be >= 1");
    }
    if simulations > 2000 {
        return error_json("simulations capped at 2000 for the demo");
    }
    let gateway = gateway(u64::from(seed));
    let query = Query::new("Demo", "synthetic landscape").unwrap();
    let section = OutlineSection { label: "[Scene Setting]".to_string(), payload: None };
    let weights = EvaluationWeights::default().with_tau(f64::from(tau_centi.min(100)) / 100.0);
    let budget = SearchBudget {
        simulations: simulations as usize,
        u,
        depth_cap: depth_cap as usize,
        c: f64::from(c_centi) / 100.0,
        weights,
        lookahead_len: 2,
    };
    let run = match mcts::run_section(&gateway, &query, &section, "", &budget) {
        Ok(run) => run,
        Err(error) => return error_json(&error.to_string()),
    };
    let nodes: Vec<SearchNodeView> = run
        .tree
        .nodes()
        .iter()
        .map(|node| SearchNodeView {
            id: node.id.clone(),
            fragment: node.fragment.clone(),
            visits: node.visit_count,
            value: node.value,
            parent: node.parent,
            depth: node.depth,
        })
        .collect();
    let sims: Vec<SimView> = run
        .trace
        .sims
        .iter()
        .map(|sim| SimView { sim: sim.sim, r_e: sim.r_e, lookahead: sim.lookahead })
        .collect();
    let view = SearchView {
        lookaheads: sims.iter().filter(|s| s.lookahead).count(),
        nodes,
        best_path: run.best_path.clone(),
        sims,
        extracted: run.sentences.join(" "),
    };
    serde_json::to_string(&view).unwrap_or_else(|e| error_json(&e.to_string()))
}

// ---- evolve_archive ----------------------------------------------------------

#[derive(Serialize)]
struct GenerationView {
    generation: u64,
    occupied: usize,
}

#[derive(Serialize)]
struct CellView {
    niche: [usize; 3],
    fitness: f64,
    context_id: String,
    provenance: String,
}

#[derive(Serialize)]
struct ArchiveView {
    bins: usize,
    capacity: usize,
    series: Vec<GenerationView>,
    cells: Vec<CellView>,
    replacements: usize,
}

/// Evolves a MAP-Elites archive from two synthetic seeds.
#[wasm_bindgen]
pub fn evolve_archive(seed: u32, bins: u32, iterations: u32, mutants_per_iteration: u32) -> String {
    if bins == 0 || bins > 8 {
        return error_json("bins must lie in 1..=8 for the demo");
    }
    if iterations > 300 || mutants_per_iteration == 0 || mutants_per_iteration > 16 {
        return error_json("iterations capped at 300 and mutants at 16 for the demo");
    }
    let gateway = gateway(u64::from(seed));
    let outline = Outline { sections: vec![], source_chain: "chain-000".to_string() };
    let seeds = ["A quiet neighborhood faces a new system.", "A regional board faces a public audit."]
        .iter()
        .enumerate()
        .map(|(i, text)| scenforge::Context {
            context_id: format!("seed-{i}"),
            text: text.to_string(),
            outline: outline.clone(),
            provenance: scenforge::mcts::Provenance::Seed,
            descriptor: None,
            fitness: None,
            parent: None,
            lineage_root: format!("seed-{i}"),
        })
        .collect();

    let mut archive = EliteArchive::new(bins as usize);
    let mut events = scenforge::event::EventLog::new();
    let budget = EvolveBudget {
        iterations: iterations as usize,
        mutants_per_iteration: mutants_per_iteration as usize,
    };
    let mut rng = scenforge::rng::SplitMix64::new(u64::from(seed));
    if let Err(error) = qd::evolve(&gateway, &mut archive, seeds, &budget, &mut rng, "demo", &mut events) {
        return error_json(&error.to_string());
    }

    let mut series = Vec::new();
    let mut replacements = 0usize;
    for event in events.events() {
        match event {
            scenforge::event::PipelineEvent::GenerationAdvanced { generation, occupied } => {
                series.push(GenerationView { generation: *generation, occupied: *occupied });
            }
            scenforge::event::PipelineEvent::ArchiveInsert { outcome, .. }
                if outcome == "replaced" =>
            {
                replacements += 1;
            }
            _ => {}
        }
    }
    let cells: Vec<CellView> = archive
        .cells()
        .iter()
        .map(|(niche, cell)| CellView {
            niche: niche.as_array(),
            fitness: cell.fitness,
            context_id: cell.context.context_id.clone(),
            provenance: match cell.context.provenance {
                scenforge::mcts::Provenance::Seed => "seed".to_string(),
                scenforge::mcts::Provenance::Mutant => "mutant".to_string(),
            },
        })
        .collect();
    let view = ArchiveView {
        bins: archive.bins(),
        capacity: archive.bins().pow(3),
        series,
        cells,
        replacements,
    };
    serde_json::to_string(&view).unwrap_or_else(|e| error_json(&e.to_string()))
}
