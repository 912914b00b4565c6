//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use scenforge::event::{EventLog, PipelineEvent};
use scenforge::gateway::mock::MockScript;
use scenforge::gateway::{
    requests, Backend, BackendReply, FragmentScores, Gateway, OracleError, OracleRequest,
    RequestKind, SamplingParams,
};
use scenforge::mcts::{
    self, aggregate_immediate, backpropagate, EvaluationWeights, SearchBudget, SearchTree,
};
use scenforge::metrics;
use scenforge::pipeline::{self, RunConfig};
use scenforge::planner::{self, Outline, OutlineSection, PlanLimits, Query, RuleLibrary};
use scenforge::qd::{self, BehaviorDescriptor, EliteArchive, EvolveBudget};
use scenforge::refiner::{default_profiles, Refiner, Verdict};
use scenforge::rng::SplitMix64;

fn pass(criterion: u32, what: &str) {
    println!("criterion {criterion}: PASS - {what}");
}

fn sampling(seed: u64) -> SamplingParams {
    SamplingParams {
        temperature: 0.0,
        max_candidates: 1,
        seed: Some(seed),
    }
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scenforge-acceptance-{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

// ---- criterion 1: equation fidelity ----------------------------------------

#[test]
fn criterion_1_equation_fidelity() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(101);

    // Immediate-value aggregation against the direct formula, including the
    // group-2 worked example.
    let worked = aggregate_immediate(
        FragmentScores { s_sc: 0.8, s_im: 0.6, s_co: 0.7, s_ha: 0.1 },
        &EvaluationWeights::group(2).unwrap(),
    );
    assert!((worked - 0.639).abs() < 1e-12, "worked example: {worked}");

    for _ in 0..100 {
        let raw = (rng.next_f64(), rng.next_f64(), rng.next_f64());
        let total = raw.0 + raw.1 + raw.2;
        let weights = EvaluationWeights::new(raw.0 / total, raw.1 / total, raw.2 / total, 0.5)
            .expect("normalized weights");
        let scores = FragmentScores {
            s_sc: rng.next_f64(),
            s_im: rng.next_f64(),
            s_co: rng.next_f64(),
            s_ha: rng.next_f64(),
        };
        let got = aggregate_immediate(scores, &weights);
        let want = (weights.w_sc * scores.s_sc
            + weights.w_im * scores.s_im
            + weights.w_co * scores.s_co)
            * (1.0 - scores.s_ha);
        assert!((got - want).abs() < 1e-12);
    }

    // Backpropagation update rule, including the (0.6, 2, 0.9) -> (3, 0.7)
    // worked example.
    let check = |v_old: f64, n_old: u64, r: f64| {
        let mut tree = SearchTree::new();
        let child = tree.add_child(0, "x.".to_string());
        tree.set_stats(child, n_old, v_old);
        backpropagate(&mut tree, child, r);
        let node = tree.node(child);
        assert_eq!(node.visit_count, n_old + 1);
        let want = (v_old * n_old as f64 + r) / (n_old as f64 + 1.0);
        assert!((node.value - want).abs() < 1e-12);
        (node.visit_count, node.value)
    };
    let (n, v) = check(0.6, 2, 0.9);
    assert_eq!(n, 3);
    assert!((v - 0.7).abs() < 1e-12);
    for _ in 0..100 {
        check(rng.next_f64(), rng.next_below(50), rng.next_f64());
    }

    assert!(start.elapsed().as_secs_f64() < 1.0, "criterion 1 exceeded 1 s");
    pass(1, "immediate-value aggregation and backpropagation reproduced to 1e-12 on worked examples and 100 random tuples each");
}

// ---- criteria 2 and 3: scripted search tree ---------------------------------

/// Scripted reward landscape for a 3-level, u=2 tree. Sentences are named
/// by their path, rewards come from a Likert table; weights (1, 0, 0) with
/// zero hallucination make the propagated reward exactly (L-1)/4.
struct ScriptedTree {
    query: Query,
    section: OutlineSection,
    rewards: BTreeMap<&'static str, i64>,
}

impl ScriptedTree {
    fn new() -> Self {
        let mut rewards = BTreeMap::new();
        rewards.insert("A0.", 3);
        rewards.insert("A1.", 4);
        rewards.insert("B00.", 3);
        rewards.insert("B01.", 2);
        rewards.insert("B10.", 4);
        rewards.insert("B11.", 2);
        rewards.insert("C000.", 3);
        rewards.insert("C001.", 2);
        rewards.insert("C010.", 2);
        rewards.insert("C011.", 1);
        rewards.insert("C100.", 3);
        rewards.insert("C101.", 5);
        rewards.insert("C110.", 2);
        rewards.insert("C111.", 1);
        Self {
            query: Query::new("Scripted", "reward landscape").unwrap(),
            section: OutlineSection { label: "[S]".to_string(), payload: None },
            rewards,
        }
    }

    fn child_name(history: &[&str], candidate: u32) -> String {
        match history.len() {
            0 => format!("A{candidate}."),
            1 => {
                let parent = &history[0][1..history[0].len() - 1];
                format!("B{parent}{candidate}.")
            }
            _ => {
                let parent = &history[1][1..history[1].len() - 1];
                format!("C{parent}{candidate}.")
            }
        }
    }

    fn script(&self) -> MockScript {
        let mut script = MockScript::new();
        // Expansion replies for every reachable (history, candidate) pair.
        let histories: Vec<Vec<&str>> = vec![
            vec![],
            vec!["A0."], vec!["A1."],
            vec!["A0.", "B00."], vec!["A0.", "B01."],
            vec!["A1.", "B10."], vec!["A1.", "B11."],
        ];
        for history in &histories {
            for candidate in 0..2u32 {
                let request = requests::generate_sentence(
                    &self.query.title,
                    &self.query.theme,
                    "[S]",
                    "",
                    &history.join(" "),
                    candidate,
                    sampling(7),
                );
                script = script.on_request(&request, &Self::child_name(history, candidate));
            }
        }
        // Evaluation replies: reward keyed by the evaluated fragment.
        for (fragment, likert) in &self.rewards {
            let history = self.history_of(fragment);
            let request = requests::score_fragment(fragment, &history, "[S]", sampling(7));
            script = script.on_request(
                &request,
                &format!(r#"{{"sc": {likert}, "im": 1, "co": 1, "ha": 1}}"#),
            );
        }
        script
    }

    fn history_of(&self, fragment: &str) -> String {
        match fragment.as_bytes()[0] {
            b'A' => String::new(),
            b'B' => format!("A{}.", &fragment[1..2]),
            _ => format!("A{}. B{}.", &fragment[1..2], &fragment[1..3]),
        }
    }

    fn reward(&self, fragment: &str) -> f64 {
        (self.rewards[fragment] - 1) as f64 / 4.0
    }

    /// Exhaustive enumeration oracle: every root-to-leaf path ranked by the
    /// mean of its per-node rewards.
    fn best_path_by_enumeration(&self) -> Vec<String> {
        let mut best: Option<(f64, Vec<String>)> = None;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let first = format!("A{a}.");
                    let second = format!("B{a}{b}.");
                    let third = format!("C{a}{b}{c}.");
                    let mean = (self.reward(&first) + self.reward(&second) + self.reward(&third)) / 3.0;
                    if best.as_ref().is_none_or(|(score, _)| mean > *score) {
                        best = Some((mean, vec![first, second, third]));
                    }
                }
            }
        }
        best.unwrap().1
    }
}

fn run_scripted_search() -> (ScriptedTree, mcts::SectionRun) {
    let scripted = ScriptedTree::new();
    let gateway = Gateway::mock(scripted.script()).with_seed(7);
    let budget = SearchBudget {
        simulations: 200,
        u: 2,
        depth_cap: 3,
        c: 1.414,
        weights: EvaluationWeights::new(1.0, 0.0, 0.0, 0.0).unwrap(),
        lookahead_len: 2,
    };
    let run = mcts::run_section(&gateway, &scripted.query, &scripted.section, "", &budget)
        .expect("scripted search runs");
    (scripted, run)
}

#[test]
fn criterion_2_mcts_oracle_equivalence() {
    let start = Instant::now();
    let (scripted, run) = run_scripted_search();

    let expected = scripted.best_path_by_enumeration();
    assert_eq!(expected, vec!["A1.", "B10.", "C101."]);
    assert_eq!(run.sentences, expected, "extracted path disagrees with enumeration");

    // The winning branch's visit count strictly exceeds every sibling's at
    // each level of the extracted path.
    let tree = &run.tree;
    for &winner in &run.best_path {
        let parent = tree.node(winner).parent.expect("non-root");
        for &sibling in &tree.node(parent).children {
            if sibling != winner {
                assert!(
                    tree.node(winner).visit_count > tree.node(sibling).visit_count,
                    "winner {} not dominant over sibling {}",
                    tree.node(winner).fragment,
                    tree.node(sibling).fragment
                );
            }
        }
    }

    assert!(start.elapsed().as_secs_f64() < 5.0, "criterion 2 exceeded 5 s");
    pass(2, "200-simulation search recovers the enumeration-optimal path with dominant visit counts");
}

#[test]
fn criterion_3_running_mean_identity() {
    let (_, run) = run_scripted_search();
    let tree = &run.tree;

    for node in tree.nodes() {
        let through: Vec<f64> = run
            .trace
            .sims
            .iter()
            .filter(|sim| sim.path.contains(&node.id))
            .map(|sim| sim.r_e)
            .collect();
        assert_eq!(node.visit_count as usize, through.len(), "visit count vs trace");
        if !through.is_empty() {
            let mean = through.iter().sum::<f64>() / through.len() as f64;
            assert!(
                (node.value - mean).abs() < 1e-9,
                "node {} value {} vs trace mean {mean}",
                node.id,
                node.value
            );
        }
    }
    pass(3, "every node's value equals the mean of logged rewards through it (1e-9)");
}

// ---- criteria 4 and 5: MAP-Elites ------------------------------------------

fn hash_world_script() -> MockScript {
    MockScript::new()
        .on_match(
            RequestKind::Generate,
            Some("generate_mutant"),
            &[],
            "Universe member {pick:24:u}.",
        )
        .on_kind(
            RequestKind::DescribeBehavior,
            r#"{"phi1": {unit:p1}, "phi2": {unit:p2}, "phi3": {unit:p3}}"#,
        )
        .on_kind(RequestKind::ScoreContext, r#"{"coh": {unit:c}, "rel": {unit:r}, "eng": {unit:e}}"#)
}

fn seed_context(id: &str, text: &str) -> scenforge::Context {
    scenforge::Context {
        context_id: id.to_string(),
        text: text.to_string(),
        outline: Outline { sections: vec![], source_chain: "chain-000".to_string() },
        provenance: scenforge::mcts::Provenance::Seed,
        descriptor: None,
        fitness: None,
        parent: None,
        lineage_root: id.to_string(),
    }
}

#[test]
fn criterion_4_map_elites_invariants() {
    let start = Instant::now();
    let gateway = Gateway::mock(hash_world_script()).with_seed(7);
    let mut archive = EliteArchive::new(3);
    let mut events = EventLog::new();
    let seeds = vec![seed_context("s1", "Seed alpha."), seed_context("s2", "Seed beta.")];
    let budget = EvolveBudget { iterations: 30, mutants_per_iteration: 4 };
    let mut rng = SplitMix64::new(7);
    qd::evolve(&gateway, &mut archive, seeds, &budget, &mut rng, "acc4", &mut events).unwrap();

    // Replay the event log: per-niche fitness must be non-decreasing with
    // strict improvement on every replacement and byte-equality on ties;
    // occupied-niche count must never drop.
    let mut fitness_by_niche: BTreeMap<[usize; 3], f64> = BTreeMap::new();
    let mut last_occupied = 0usize;
    let mut replacements = 0usize;
    for event in events.events() {
        match event {
            PipelineEvent::ArchiveInsert { niche, fitness, outcome, incumbent_fitness, .. } => {
                match outcome.as_str() {
                    "inserted_empty" => {
                        assert!(!fitness_by_niche.contains_key(niche));
                        fitness_by_niche.insert(*niche, *fitness);
                    }
                    "replaced" => {
                        let old = incumbent_fitness.expect("replacement has incumbent");
                        assert!(*fitness > old, "replacement must strictly improve");
                        assert_eq!(fitness_by_niche[niche], old);
                        fitness_by_niche.insert(*niche, *fitness);
                        replacements += 1;
                    }
                    "rejected_tie" => {
                        assert_eq!(
                            fitness_by_niche[niche], *fitness,
                            "tie must be byte-equal fitness"
                        );
                    }
                    "rejected_lower" => {
                        assert!(*fitness < fitness_by_niche[niche]);
                    }
                    other => panic!("unknown outcome {other}"),
                }
            }
            PipelineEvent::GenerationAdvanced { occupied, .. } => {
                assert!(*occupied >= last_occupied, "coverage must not decrease");
                last_occupied = *occupied;
            }
            _ => {}
        }
    }
    assert_eq!(archive.generation(), 30);
    assert_eq!(archive.occupied(), fitness_by_niche.len());
    for (niche, cell) in archive.cells() {
        assert_eq!(fitness_by_niche[&niche.as_array()], cell.fitness);
    }
    assert!(replacements > 0, "landscape should produce at least one replacement");

    assert!(start.elapsed().as_secs_f64() < 10.0, "criterion 4 exceeded 10 s");
    pass(4, "30-iteration evolution keeps per-niche monotonicity, coverage growth, and strict replacement");
}

#[test]
fn criterion_5_brute_force_archive_equivalence() {
    let gateway = Gateway::mock(hash_world_script()).with_seed(7);

    // The scripted mutant universe: 24 possible mutant texts plus 2 seeds.
    let mut universe: Vec<String> = (0..24).map(|k| format!("Universe member {k}.")).collect();
    universe.push("Seed alpha.".to_string());
    universe.push("Seed beta.".to_string());
    assert!(universe.len() <= 50);

    // Brute-force oracle: evaluate every universe member directly and take
    // the per-niche argmax.
    let mut expected: BTreeMap<[usize; 3], f64> = BTreeMap::new();
    for text in &universe {
        let ctx = seed_context("probe", text);
        let descriptor = qd::describe(&gateway, &ctx).unwrap();
        let fitness = qd::fitness(&gateway, &ctx).unwrap();
        let niche = qd::niche_index(&descriptor, 3).as_array();
        let slot = expected.entry(niche).or_insert(f64::NEG_INFINITY);
        if fitness > *slot {
            *slot = fitness;
        }
    }

    // Evolution over the same scripted world. The budget is oversized so
    // the deterministic mutation stream certainly visits all 24 texts.
    let mut archive = EliteArchive::new(3);
    let mut events = EventLog::new();
    let seeds = vec![seed_context("s1", "Seed alpha."), seed_context("s2", "Seed beta.")];
    let budget = EvolveBudget { iterations: 120, mutants_per_iteration: 4 };
    let mut rng = SplitMix64::new(7);
    qd::evolve(&gateway, &mut archive, seeds, &budget, &mut rng, "acc5", &mut events).unwrap();

    assert_eq!(
        archive.occupied(),
        expected.len(),
        "archive should cover exactly the brute-force niches"
    );
    for (niche, cell) in archive.cells() {
        let want = expected[&niche.as_array()];
        assert_eq!(cell.fitness, want, "niche {:?} elite differs from brute force", niche);
        assert!(universe.contains(&cell.context.text));
        // Lineage integrity: every elite's lineage terminates at a seed.
        assert!(["s1", "s2"].contains(&cell.context.lineage_root.as_str()));
    }
    pass(5, "final archive elites equal the exhaustive per-niche argmax over the scripted universe (exact)");
}

// ---- criterion 6: refiner gate ----------------------------------------------

#[test]
fn criterion_6_refiner_gate() {
    // Distinct per-profile creativity ratings; Psi is their hand average.
    let script = MockScript::new()
        .on_kind(RequestKind::SimulateResponse, "{profile} response.")
        .on_match(
            RequestKind::ScoreCreativity,
            None,
            &[("response", "Talkative response.")],
            r#"{"rating": 4}"#,
        )
        .on_match(
            RequestKind::ScoreCreativity,
            None,
            &[("response", "Normal response.")],
            r#"{"rating": 3}"#,
        )
        .on_match(
            RequestKind::ScoreCreativity,
            None,
            &[("response", "Quiet response.")],
            r#"{"rating": 5}"#,
        );
    let gateway = Gateway::mock(script).with_seed(7);
    let mut refiner = Refiner::new(0.6, 3, default_profiles());
    let report = refiner.refine(&gateway, &seed_context("c", "scenario")).unwrap();
    let hand_average = (0.75 + 0.5 + 1.0) / 3.0;
    assert!((report.psi - hand_average).abs() < 1e-12);
    assert_eq!(report.verdict, Verdict::Ready);

    // Psi exactly at the threshold routes back (strict "exceeds").
    let boundary = MockScript::new()
        .on_kind(RequestKind::SimulateResponse, "{profile} response.")
        .on_kind(RequestKind::ScoreCreativity, r#"{"rating": 3}"#);
    let gateway = Gateway::mock(boundary).with_seed(7);
    let mut refiner = Refiner::new(0.5, 3, default_profiles());
    let report = refiner.refine(&gateway, &seed_context("b", "scenario")).unwrap();
    assert_eq!(report.psi, 0.5);
    assert_eq!(report.verdict, Verdict::RouteBack);

    // A persistently weak lineage: exactly max_cycles route-backs, then
    // ready-with-warning.
    let weak = MockScript::new()
        .on_kind(RequestKind::SimulateResponse, "{profile} response.")
        .on_kind(RequestKind::ScoreCreativity, r#"{"rating": 1}"#);
    let gateway = Gateway::mock(weak).with_seed(7);
    let max_cycles = 3;
    let mut refiner = Refiner::new(0.6, max_cycles, default_profiles());
    let ctx = seed_context("weak", "scenario");
    let mut route_backs = 0;
    for _ in 0..max_cycles {
        let report = refiner.refine(&gateway, &ctx).unwrap();
        assert_eq!(report.verdict, Verdict::RouteBack);
        route_backs += 1;
    }
    assert_eq!(route_backs, max_cycles);
    let capped = refiner.refine(&gateway, &ctx).unwrap();
    assert_eq!(capped.verdict, Verdict::ReadyWithWarning);

    pass(6, "Psi matches hand averages (1e-12), threshold equality routes back, cycle cap ends in ready-with-warning");
}

// ---- criterion 7: evaluation protocol ----------------------------------------

#[test]
fn criterion_7_evaluation_protocol() {
    // Reference vs itself under the symmetric judge: exactly 50% on every
    // subjective metric.
    let dir = temp_dir("c7-reference");
    for (id, text) in [("q1", "first scenario"), ("q2", "second scenario"), ("q3", "third")] {
        std::fs::write(dir.join(format!("{id}.txt")), text).unwrap();
    }
    let gateway = Gateway::mock(MockScript::new().on_kind(RequestKind::Judge, "Tie")).with_seed(7);
    let metric_names: Vec<String> = metrics::SUBJECTIVE_METRICS.iter().map(|m| m.to_string()).collect();
    let report =
        pipeline::eval::evaluate_method(&gateway, "self", &dir, &dir, &metric_names, None).unwrap();
    assert_eq!(report.subjective.len(), 6);
    for (metric, sub) in &report.subjective {
        assert_eq!(sub.positive_rate, 0.5, "{metric} must be exactly 50%");
        assert_eq!(sub.invalid_pairs, 0);
    }

    // Every pair record carries exactly 4 labels in both orders.
    let set = metrics::run_pair(&gateway, "coherence", "a", "alpha", "b", "beta").unwrap();
    assert_eq!(set.labels.len(), 4);
    let ab = set.labels.iter().filter(|l| l.order == metrics::PassOrder::AB).count();
    assert_eq!(ab, 2);

    // A position-biased judge nets to exactly 50% after reorientation.
    let biased = Gateway::mock(MockScript::new().on_kind(RequestKind::Judge, "A>B")).with_seed(7);
    let set = metrics::run_pair(&biased, "coherence", "a", "alpha", "b", "beta").unwrap();
    let report = metrics::positive_rate(&[set], "coherence", "biased").unwrap();
    assert_eq!(report.positive_rate, 0.5);
    assert_eq!(report.wins, 2);
    assert_eq!(report.losses, 2);

    pass(7, "self-comparison is exactly 50% per metric, arity is 4, and position bias nets out");
}

// ---- criterion 8: deterministic metrics --------------------------------------

#[test]
fn criterion_8_deterministic_metrics() {
    // Five hand-computed ROUGE fixtures, exact.
    let r = metrics::rouge_1("the cat sat", "the cat ran");
    assert_eq!((r.precision, r.recall, r.f1), (2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0));

    let r = metrics::rouge_l("a b c d", "a c d");
    assert_eq!((r.precision, r.recall), (0.75, 1.0));
    assert!((r.f1 - 6.0 / 7.0).abs() < 1e-15);

    let r = metrics::rouge_1("one two three", "one two three");
    assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));

    let r = metrics::rouge_1("aa bb", "cc dd");
    assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));

    let r = metrics::rouge_l("a b c", "c b a");
    assert_eq!(r.precision, 1.0 / 3.0);

    // rouge_l F1 <= rouge_1 F1 over 1,000 random token-sequence pairs.
    let mut rng = SplitMix64::new(88);
    let alphabet = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];
    let sequence = |rng: &mut SplitMix64| {
        let len = rng.next_below(14) as usize;
        (0..len)
            .map(|_| alphabet[rng.next_below(alphabet.len() as u64) as usize])
            .collect::<Vec<_>>()
            .join(" ")
    };
    for _ in 0..1000 {
        let cand = sequence(&mut rng);
        let reference = sequence(&mut rng);
        let one = metrics::rouge_1(&cand, &reference);
        let ell = metrics::rouge_l(&cand, &reference);
        assert!(ell.f1 <= one.f1 + 1e-12, "`{cand}` vs `{reference}`");
    }

    // Kappa worked cases to 1e-12.
    assert!((metrics::cohens_kappa(&["W", "L", "T"], &["W", "L", "T"]).unwrap() - 1.0).abs() < 1e-12);
    assert!(metrics::cohens_kappa(&["W", "W", "L", "L"], &["W", "L", "W", "L"]).unwrap().abs() < 1e-12);
    assert!(metrics::cohens_kappa(&["W", "W", "W"], &["L", "L", "L"]).unwrap().abs() < 1e-12);

    // Spearman fixtures.
    let rho = metrics::spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert!((rho - 0.8).abs() < 1e-12);
    let up = metrics::spearman(&[1.0, 2.0, 5.0], &[2.0, 7.0, 9.0]).unwrap();
    assert!((up - 1.0).abs() < 1e-12);
    let down = metrics::spearman(&[1.0, 2.0, 5.0], &[9.0, 7.0, 2.0]).unwrap();
    assert!((down + 1.0).abs() < 1e-12);

    pass(8, "ROUGE fixtures exact, LCS bound holds on 1,000 random pairs, kappa and Spearman match worked cases");
}

// ---- criterion 9: grammar fidelity -------------------------------------------

const AI_PARTNER_SCRIPT: &str =
    include_str!("../assets/mock/ai_partner_script.json");

fn ai_partner_query() -> Query {
    Query::new(
        "AI Partner",
        "Human-AI companionship and autonomy: ethics, emotional reliance, privacy, and governance of pervasive personal AI assistants.",
    )
    .unwrap()
}

/// The instantiated outline skeleton the bundled grammar derives for the
/// scripted choices, as a pre-order label sequence.
fn expected_skeleton() -> Vec<&'static str> {
    vec![
        "[Plan]",
        "[Anchor]",
        "[Future Horizon]",
        "[NearFuture (5-15 years)]",
        "[Place]",
        "[Scale]",
        "[Community]",
        "[Challenge Seeds 1]",
        "[Technology]",
        "[Ethics & Morality]",
        "[Psychological Health]",
        "[Scene Setting]",
        "[Scenario Frame]",
        "[Everyday Life]",
        "[Constraint Hints]",
        "[Policy]",
        "[Budget]",
        "[Time Limit]",
        "[Challenge Seeds 2]",
        "[Technology]",
        "[Ethics & Morality]",
        "[Characters & Interaction]",
        "[Interaction Goal]",
        "[Negotiation Meeting]",
        "[Dispute Focus]",
        "[Trust Conflict]",
        "[Problem Slot]",
        "AI autonomy in human-AI emotional companionship",
        "[Challenge Seeds 3]",
        "[Technology]",
        "[Ethics & Morality]",
        "[Psychological Health]",
        "[Conflict & Challenge]",
        "[Challenge Seeds 4]",
        "[Technology]",
        "[Ethics & Morality]",
        "[Psychological Health]",
        "[Social Relationships]",
        "[Law & Justice]",
        "[Creativity Triggers]",
        "[Uncertainty Cue]",
        "[Contradiction Cue]",
        "[Open Task]",
        "[Challenge Identification]",
        "[Solution Exploration]",
    ]
}

/// Choice backend answering straight from the request pools, hash-seeded.
struct RandomChoiceBackend {
    salt: u64,
}

impl RandomChoiceBackend {
    fn pick_index(&self, request: &OracleRequest, extra: u64, n: usize) -> usize {
        let fp = requests::fingerprint(request);
        let h = scenforge::rng::fnv1a64(format!("{fp}:{}:{extra}", self.salt).as_bytes());
        (h % n as u64) as usize
    }
}

impl Backend for RandomChoiceBackend {
    fn name(&self) -> &str {
        "random-choice"
    }

    fn reply(
        &self,
        request: &OracleRequest,
        _system: &str,
        _user: &str,
    ) -> Result<BackendReply, OracleError> {
        let options: Vec<&str> = request
            .variables
            .get("options")
            .map(|o| o.split(" | ").collect())
            .unwrap_or_default();
        let text = match request.template_id.as_str() {
            "choose_option" | "choose_leaf" => {
                let pick = options[self.pick_index(request, 0, options.len())];
                format!(r#"{{"choice": "{pick}"}}"#)
            }
            "choose_options" => {
                let min: usize = request.variables["min"].parse().unwrap();
                let max: usize = request.variables["max"].parse().unwrap();
                let count = min + self.pick_index(request, 1, max - min + 1);
                let start = self.pick_index(request, 2, options.len());
                let picks: Vec<String> = (0..count.min(options.len()))
                    .map(|j| format!("\"{}\"", options[(start + j) % options.len()]))
                    .collect();
                format!(r#"{{"choices": [{}]}}"#, picks.join(", "))
            }
            "score_chain" => format!(r#"{{"score": {}}}"#, self.pick_index(request, 3, 101)),
            "generate_phrase" => format!("generated phrase {}", self.salt),
            other => panic!("unexpected template in randomized run: {other}"),
        };
        Ok(BackendReply { text, prompt_tokens: None, completion_tokens: None })
    }
}

#[test]
fn criterion_9_grammar_fidelity() {
    // Part 1: the scripted choices reproduce the instantiated skeleton,
    // label for label, through the bundled rule library.
    let script = MockScript::parse(AI_PARTNER_SCRIPT).unwrap();
    let gateway = Gateway::mock(script).with_seed(7);
    let rules = RuleLibrary::bundled();
    let tree = planner::ht_construct(
        &gateway,
        ai_partner_query(),
        &rules,
        PlanLimits { max_iterations: 64, beam: 3 },
    )
    .unwrap();

    let instantiations = tree.instantiations();
    assert_eq!(instantiations.len(), 1, "constructed tree holds one candidate chain");
    let labels: Vec<&str> = instantiations[0]
        .iter()
        .map(|&i| tree.node(i).label.as_str())
        .collect();
    assert_eq!(labels, expected_skeleton(), "outline skeleton mismatch");

    let outline = planner::ht_decide(&gateway, &tree).unwrap();
    assert_eq!(outline.sections.len(), 27);
    assert_eq!(outline.sections[0].label, "[NearFuture (5-15 years)]");
    planner::verify_rule_soundness(&tree, &rules).unwrap();

    // Part 2: fifty randomized constructions, every hyperedge justified by
    // a library rule.
    for salt in 0..50u64 {
        let gateway =
            Gateway::new(Box::new(RandomChoiceBackend { salt })).with_seed(salt);
        let tree = planner::ht_construct(
            &gateway,
            ai_partner_query(),
            &rules,
            PlanLimits { max_iterations: 64, beam: 3 },
        )
        .unwrap_or_else(|e| panic!("randomized run {salt}: {e}"));
        planner::verify_rule_soundness(&tree, &rules)
            .unwrap_or_else(|e| panic!("randomized run {salt}: {e}"));
    }

    pass(9, "scripted run reproduces the instantiated skeleton; 50 randomized runs stay rule-justified");
}

// ---- criterion 10: end-to-end replay -----------------------------------------

#[test]
fn criterion_10_end_to_end_replay() {
    let start = Instant::now();
    let config_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/sample.json");
    assert!(config_path.exists(), "sample config missing at {}", config_path.display());

    let run = |out: &PathBuf| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_scenforge"))
            .args([
                "pipeline",
                "--config",
                config_path.to_str().unwrap(),
                "--backend",
                "mock",
                "--seed",
                "7",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .expect("pipeline binary runs");
        assert!(status.success(), "pipeline exited with {status}");
    };

    let out1 = temp_dir("c10-run1");
    let out2 = temp_dir("c10-run2");
    run(&out1);
    run(&out2);

    for file in ["archive.json", "report.json"] {
        let a = std::fs::read(out1.join(file)).unwrap();
        let b = std::fs::read(out2.join(file)).unwrap();
        assert_eq!(a, b, "{file} is not byte-identical across replays");
        assert!(!a.is_empty());
    }

    // Five queries, none failed.
    let report: pipeline::RunReport = pipeline::read_json(&out1.join("report.json")).unwrap();
    assert_eq!(report.queries.len(), 5);
    assert!(report.queries.iter().all(|q| q.status == "ok"));

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "replay pair took {elapsed:.1} s");
    pass(10, "two pipeline runs over the 5-query sample are byte-identical and complete in time");
}

// ---- criterion 11: live smoke (manual, non-gating) ----------------------------

/// Manual check against a real endpoint. Provide `SCENFORGE_ENDPOINT` (or
/// rely on the OpenAI default), `SCENFORGE_MODEL`, and an API key in
/// `OPENAI_API_KEY`, then run:
/// `cargo test --test acceptance criterion_11 -- --ignored --nocapture`
#[test]
#[ignore = "requires a live OpenAI-compatible endpoint"]
fn criterion_11_live_smoke() {
    let mut config = RunConfig {
        backend: pipeline::BackendKind::Live,
        ..RunConfig::default()
    };
    if let Ok(model) = std::env::var("SCENFORGE_MODEL") {
        config.live.model = model;
    }
    config.mcts.simulations = 2;
    config.mcts.u = 2;
    config.mcts.depth_cap = 2;
    config.archive.iterations = 2;
    config.archive.mutants_per_iteration = 2;

    let queries = vec![sample_query()];
    let out = temp_dir("c11-live");
    let summary = pipeline::run_pipeline(&queries, &config, &out).unwrap();
    assert_eq!(summary.failed_queries, 0);

    let archives: BTreeMap<String, EliteArchive> =
        pipeline::read_json(&out.join("archive.json")).unwrap();
    let archive = archives.values().next().unwrap();
    assert!(archive.occupied() >= 1);
    println!(
        "live smoke: {} oracle calls, {} prompt tokens, {} reply tokens",
        summary.report.totals.oracle_calls,
        summary.report.totals.prompt_tokens,
        summary.report.totals.reply_tokens
    );
    pass(11, "one query completed all four stages against the live endpoint");
}

fn sample_query() -> Query {
    pipeline::sample_dataset().remove(0)
}

// Descriptor construction is exercised indirectly everywhere; pin the
// clamping contract here once.
#[test]
fn descriptor_components_stay_in_the_unit_cube() {
    let d = BehaviorDescriptor::new(-0.3, 0.4, 1.9);
    assert_eq!((d.phi1, d.phi2, d.phi3), (0.0, 0.4, 1.0));
}
