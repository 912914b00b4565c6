//! Hypertree outline planner.
//!
//! Outline design is cast as rule-guided hypertree search: starting from a
//! `[Plan]` root, the planner alternates selection (which branch, which
//! divisible slot) and expansion (apply the unique matching rule) until no
//! divisible node remains or the iteration cap is hit, then flattens the
//! decided chain into an [`Outline`].
//!
//! Two chain notions coexist here. During construction a chain is a
//! root-to-frontier path whose terminal hyperedge still contains divisible
//! slots — that is what gets scored and pruned to the beam. At decide time a
//! chain is one complete instantiation of the tree (one child group chosen
//! per expanded node); with the construction above each node carries a
//! single group, so a constructed tree holds exactly one candidate and is
//! decided without a scoring call.

pub mod rules;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{Gateway, OracleError};

pub use rules::{load_rule_library, ExpansionKind, ExpansionRule, RuleLibrary};

/// A title/theme pair seeding one pipeline run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub title: String,
    pub theme: String,
}

impl Query {
    pub fn new(title: &str, theme: &str) -> Result<Self, PlanError> {
        let title = title.trim();
        let theme = theme.trim();
        if title.is_empty() || theme.is_empty() {
            return Err(PlanError::InvalidQuery(
                "title and theme must be non-empty".to_string(),
            ));
        }
        Ok(Self {
            title: title.to_string(),
            theme: theme.to_string(),
        })
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("rule library: {detail}")]
    RuleParse { detail: String },
    #[error("no divisible node remains")]
    NoDivisibleNode,
    #[error("invalid limit: {0}")]
    InvalidLimit(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("generated phrase for `{label}` was empty")]
    EmptyPhrase { label: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// One structural unit of the hypertree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperNode {
    pub id: String,
    pub label: String,
    /// Instantiated content for choice and generated-phrase children.
    pub payload: Option<String>,
    pub parent: Option<usize>,
    /// One inner list per applied hyperedge. Construction applies at most
    /// one; synthetic trees may carry alternatives for decide to rank.
    pub child_groups: Vec<Vec<usize>>,
    pub depth: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperTree {
    pub query: Query,
    nodes: Vec<HyperNode>,
}

/// A scored branch: `node_path` runs from the root, each entry a child of
/// its predecessor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperChain {
    pub chain_id: String,
    pub node_path: Vec<usize>,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineSection {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
}

/// The decided chain flattened into ordered sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outline {
    pub sections: Vec<OutlineSection>,
    pub source_chain: String,
}

impl HyperTree {
    /// Fresh tree holding only the root node.
    pub fn new(query: Query, root_label: &str) -> Self {
        let root = HyperNode {
            id: "n0000".to_string(),
            label: root_label.to_string(),
            payload: None,
            parent: None,
            child_groups: Vec::new(),
            depth: 0,
        };
        Self { query, nodes: vec![root] }
    }

    pub fn node(&self, index: usize) -> &HyperNode {
        &self.nodes[index]
    }

    pub fn nodes(&self) -> &[HyperNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when some rule matches the node label and no hyperedge has been
    /// applied yet.
    pub fn divisible(&self, index: usize, rules: &RuleLibrary) -> bool {
        let node = &self.nodes[index];
        node.child_groups.is_empty() && rules.rule_for(&node.label).is_some()
    }

    /// Appends one hyperedge under `parent`. Children are created in the
    /// given order with ids continuing the creation sequence.
    pub fn add_group(&mut self, parent: usize, children: Vec<(String, Option<String>)>) -> Vec<usize> {
        let depth = self.nodes[parent].depth + 1;
        let mut group = Vec::with_capacity(children.len());
        for (label, payload) in children {
            let index = self.nodes.len();
            self.nodes.push(HyperNode {
                id: format!("n{index:04}"),
                label,
                payload,
                parent: Some(parent),
                child_groups: Vec::new(),
                depth,
            });
            group.push(index);
        }
        self.nodes[parent].child_groups.push(group.clone());
        group
    }

    fn path_to(&self, index: usize) -> Vec<usize> {
        let mut path = vec![index];
        let mut cursor = index;
        while let Some(parent) = self.nodes[cursor].parent {
            path.push(parent);
            cursor = parent;
        }
        path.reverse();
        path
    }

    /// Divisible members across the node's applied hyperedges, in id order.
    fn divisible_frontier(&self, index: usize, rules: &RuleLibrary) -> Vec<usize> {
        self.nodes[index]
            .child_groups
            .iter()
            .flatten()
            .copied()
            .filter(|&child| self.divisible(child, rules))
            .collect()
    }

    /// Construction-phase candidate chains: one per node whose frontier
    /// still contains a divisible slot, plus the bare root while it has not
    /// been expanded. Chains are identified by their terminal node id.
    pub fn select_candidates(&self, rules: &RuleLibrary) -> Vec<(HyperChain, Vec<usize>)> {
        let mut candidates = Vec::new();
        if self.nodes[0].child_groups.is_empty() {
            if self.divisible(0, rules) {
                let chain = HyperChain {
                    chain_id: self.nodes[0].id.clone(),
                    node_path: vec![0],
                    score: None,
                };
                candidates.push((chain, vec![0]));
            }
            return candidates;
        }
        for index in 0..self.nodes.len() {
            let frontier = self.divisible_frontier(index, rules);
            if frontier.is_empty() {
                continue;
            }
            let chain = HyperChain {
                chain_id: self.nodes[index].id.clone(),
                node_path: self.path_to(index),
                score: None,
            };
            candidates.push((chain, frontier));
        }
        candidates
    }

    /// Renders a construction-phase chain for scoring prompts.
    pub fn render_select_chain(&self, chain: &HyperChain, frontier: &[usize]) -> String {
        let mut out = String::new();
        for (depth, &index) in chain.node_path.iter().enumerate() {
            out.push_str(&"  ".repeat(depth));
            out.push_str(&self.nodes[index].label);
            out.push('\n');
        }
        let labels: Vec<&str> = frontier.iter().map(|&i| self.nodes[i].label.as_str()).collect();
        out.push_str("Expandable: ");
        out.push_str(&labels.join(" | "));
        out
    }

    /// All complete instantiations: one child group chosen per expanded
    /// node, every unexpanded node a leaf. Nodes are listed in pre-order.
    pub fn instantiations(&self) -> Vec<Vec<usize>> {
        self.subtree_instantiations(0)
    }

    fn subtree_instantiations(&self, index: usize) -> Vec<Vec<usize>> {
        let node = &self.nodes[index];
        if node.child_groups.is_empty() {
            return vec![vec![index]];
        }
        let mut results = Vec::new();
        for group in &node.child_groups {
            // Cartesian product over the group's children, first child
            // varying slowest so enumeration order is stable.
            let mut combos: Vec<Vec<usize>> = vec![vec![index]];
            for &child in group {
                let child_options = self.subtree_instantiations(child);
                let mut next = Vec::with_capacity(combos.len() * child_options.len());
                for combo in &combos {
                    for option in &child_options {
                        let mut merged = combo.clone();
                        merged.extend(option.iter().copied());
                        next.push(merged);
                    }
                }
                combos = next;
            }
            results.extend(combos);
        }
        results
    }

    /// Renders a full instantiation as an indented skeleton.
    pub fn render_instantiation(&self, instantiation: &[usize]) -> String {
        let included: std::collections::BTreeSet<usize> = instantiation.iter().copied().collect();
        let mut out = String::new();
        for &index in instantiation {
            let node = &self.nodes[index];
            out.push_str(&"  ".repeat(node.depth));
            out.push_str(&node.label);
            out.push('\n');
        }
        debug_assert!(included.contains(&0));
        out
    }

    /// Leaves of an instantiation, in pre-order.
    fn instantiation_leaves(&self, instantiation: &[usize]) -> Vec<usize> {
        instantiation
            .iter()
            .copied()
            .filter(|&i| self.nodes[i].child_groups.is_empty())
            .collect()
    }
}

/// Construction limits for [`ht_construct`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlanLimits {
    pub max_iterations: usize,
    pub beam: usize,
}

impl Default for PlanLimits {
    fn default() -> Self {
        Self { max_iterations: 64, beam: 3 }
    }
}

/// Scores candidate chains, keeps the top `beam`, and picks each kept
/// chain's divisible slot to expand.
pub fn ht_select(
    gateway: &Gateway,
    tree: &HyperTree,
    beam: usize,
) -> Result<Vec<(HyperChain, usize)>, PlanError> {
    ht_select_with(gateway, tree, &RuleLibrary::bundled(), beam)
}

pub fn ht_select_with(
    gateway: &Gateway,
    tree: &HyperTree,
    rules: &RuleLibrary,
    beam: usize,
) -> Result<Vec<(HyperChain, usize)>, PlanError> {
    let mut candidates = tree.select_candidates(rules);
    if candidates.is_empty() {
        return Err(PlanError::NoDivisibleNode);
    }

    if candidates.len() > 1 {
        for (chain, frontier) in &mut candidates {
            let rendered = tree.render_select_chain(chain, frontier);
            let score = gateway.score_chain(&tree.query.title, &tree.query.theme, &rendered)?;
            chain.score = Some(score);
        }
        candidates.sort_by(|(a, _), (b, _)| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.chain_id.cmp(&b.chain_id))
        });
    }
    candidates.truncate(beam.max(1));

    let mut selected = Vec::with_capacity(candidates.len());
    for (chain, frontier) in candidates {
        let leaf = if frontier.len() == 1 {
            frontier[0]
        } else {
            let rendered = tree.render_select_chain(&chain, &frontier);
            let labels: Vec<String> = frontier
                .iter()
                .map(|&i| tree.node(i).label.clone())
                .collect();
            let choice = gateway.choose_leaf(&rendered, &labels)?;
            frontier
                .iter()
                .copied()
                .find(|&i| tree.node(i).label == choice)
                .expect("choose_leaf returns a pool member")
        };
        selected.push((chain, leaf));
    }
    Ok(selected)
}

/// Applies the unique matching rule to a divisible node, appending one
/// hyperedge. The node stops being divisible afterwards.
pub fn ht_expand(
    gateway: &Gateway,
    tree: &mut HyperTree,
    node_index: usize,
    rules: &RuleLibrary,
) -> Result<Vec<usize>, PlanError> {
    debug_assert!(tree.divisible(node_index, rules));
    let label = tree.node(node_index).label.clone();
    let rule = rules
        .rule_for(&label)
        .ok_or_else(|| PlanError::InvalidLimit(format!("no rule matches `{label}`")))?
        .clone();
    let query = tree.query.clone();

    let children: Vec<(String, Option<String>)> = match &rule.expansion {
        ExpansionKind::FixedChildren { children } => {
            children.iter().map(|c| (c.clone(), None)).collect()
        }
        ExpansionKind::SingleChoice { pool } => {
            let pick = gateway.choose_option(&query.title, &query.theme, &label, pool)?;
            vec![(format!("[{pick}]"), Some(pick))]
        }
        ExpansionKind::MultiChoice { pool, min, max } => {
            let picks =
                gateway.choose_options(&query.title, &query.theme, &label, pool, *min, *max)?;
            picks
                .into_iter()
                .map(|pick| (format!("[{pick}]"), Some(pick)))
                .collect()
        }
        ExpansionKind::GeneratedPhrase => {
            let phrase = gateway
                .generate_phrase(&query.title, &query.theme, &label)?
                .trim()
                .to_string();
            if phrase.is_empty() {
                return Err(PlanError::EmptyPhrase { label });
            }
            vec![(phrase.clone(), Some(phrase))]
        }
    };
    Ok(tree.add_group(node_index, children))
}

/// Seeds a `[Plan]` root and alternates select/expand until no divisible
/// node remains or the iteration limit is reached.
pub fn ht_construct(
    gateway: &Gateway,
    query: Query,
    rules: &RuleLibrary,
    limits: PlanLimits,
) -> Result<HyperTree, PlanError> {
    if limits.max_iterations < 1 {
        return Err(PlanError::InvalidLimit("max_iterations must be >= 1".to_string()));
    }
    if limits.beam < 1 {
        return Err(PlanError::InvalidLimit("beam must be >= 1".to_string()));
    }
    let mut tree = HyperTree::new(query, "[Plan]");
    for _ in 0..limits.max_iterations {
        let selected = match ht_select_with(gateway, &tree, rules, limits.beam) {
            Ok(selected) => selected,
            Err(PlanError::NoDivisibleNode) => break,
            Err(other) => return Err(other),
        };
        for (_, leaf) in selected {
            ht_expand(gateway, &mut tree, leaf, rules)?;
        }
    }
    Ok(tree)
}

/// Globally ranks the candidate chains and flattens the winner into an
/// [`Outline`]. A single candidate is decided without a scoring call; ties
/// go to the lower chain id.
pub fn ht_decide(gateway: &Gateway, tree: &HyperTree) -> Result<Outline, PlanError> {
    let instantiations = tree.instantiations();
    debug_assert!(!instantiations.is_empty());

    let winner = if instantiations.len() == 1 {
        0
    } else {
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for (index, instantiation) in instantiations.iter().enumerate() {
            let rendered = tree.render_instantiation(instantiation);
            let score = gateway.score_chain(&tree.query.title, &tree.query.theme, &rendered)?;
            if score > best_score {
                best_score = score;
                best = index;
            }
        }
        best
    };

    let leaves = tree.instantiation_leaves(&instantiations[winner]);
    let sections = leaves
        .into_iter()
        .map(|index| {
            let node = tree.node(index);
            OutlineSection {
                label: node.label.clone(),
                payload: node.payload.clone(),
            }
        })
        .collect();
    Ok(Outline {
        sections,
        source_chain: format!("chain-{winner:03}"),
    })
}

/// Checks that every hyperedge in the tree is justified by exactly one
/// library rule whose parent label matches and whose shape the group obeys.
pub fn verify_rule_soundness(tree: &HyperTree, rules: &RuleLibrary) -> Result<(), String> {
    for index in 0..tree.len() {
        let node = tree.node(index);
        for group in &node.child_groups {
            let rule = rules
                .rule_for(&node.label)
                .ok_or_else(|| format!("node `{}` expanded without a matching rule", node.label))?;
            let labels: Vec<&str> = group.iter().map(|&c| tree.node(c).label.as_str()).collect();
            let payloads: Vec<Option<&str>> =
                group.iter().map(|&c| tree.node(c).payload.as_deref()).collect();
            match &rule.expansion {
                ExpansionKind::FixedChildren { children } => {
                    let expected: Vec<&str> = children.iter().map(String::as_str).collect();
                    if labels != expected {
                        return Err(format!(
                            "fixed rule `{}` mismatch: {labels:?} vs {expected:?}",
                            rule.rule_id
                        ));
                    }
                }
                ExpansionKind::SingleChoice { pool } => {
                    if group.len() != 1 {
                        return Err(format!("single-choice rule `{}` yielded {} children", rule.rule_id, group.len()));
                    }
                    let payload = payloads[0].ok_or("choice child missing payload")?;
                    if !pool.iter().any(|o| o == payload) {
                        return Err(format!("choice `{payload}` not in pool of rule `{}`", rule.rule_id));
                    }
                }
                ExpansionKind::MultiChoice { pool, min, max } => {
                    if group.len() < *min || group.len() > *max {
                        return Err(format!(
                            "multi-choice rule `{}` yielded {} children (want {min}..={max})",
                            rule.rule_id,
                            group.len()
                        ));
                    }
                    let mut seen = std::collections::BTreeSet::new();
                    for payload in &payloads {
                        let payload = payload.ok_or("choice child missing payload")?;
                        if !pool.iter().any(|o| o == payload) {
                            return Err(format!("choice `{payload}` not in pool of rule `{}`", rule.rule_id));
                        }
                        if !seen.insert(payload) {
                            return Err(format!("duplicate choice `{payload}` in rule `{}`", rule.rule_id));
                        }
                    }
                }
                ExpansionKind::GeneratedPhrase => {
                    if group.len() != 1 || payloads[0].is_none_or(|p| p.trim().is_empty()) {
                        return Err(format!("phrase rule `{}` yielded an invalid group", rule.rule_id));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::mock::MockScript;
    use crate::gateway::{requests, RequestKind};

    fn query() -> Query {
        Query::new("AI Partner", "Human-AI companionship and autonomy").unwrap()
    }

    fn gateway(script: MockScript) -> Gateway {
        Gateway::mock(script).with_seed(7)
    }

    #[test]
    fn query_requires_non_empty_fields() {
        assert!(Query::new("  ", "theme").is_err());
        assert!(Query::new("title", "").is_err());
        let q = Query::new(" t ", " h ").unwrap();
        assert_eq!(q.title, "t");
    }

    #[test]
    fn fresh_tree_selects_root_without_oracle_calls() {
        let gw = gateway(MockScript::new());
        let tree = HyperTree::new(query(), "[Plan]");
        let selected = ht_select_with(&gw, &tree, &RuleLibrary::bundled(), 3).unwrap();
        assert_eq!(selected.len(), 1);
        assert_eq!(selected[0].1, 0);
        assert_eq!(gw.call_count(), 0);
    }

    #[test]
    fn select_scores_chains_and_keeps_argmax() {
        // Library: A -> [B][C] fixed; B -> [D][E] fixed; C, D, E choices.
        let library = RuleLibrary::parse(
            r#"{"rules": [
                {"id": "a", "parent": "[A]", "kind": "fixed_children", "children": ["[B]", "[C]"]},
                {"id": "b", "parent": "[B]", "kind": "fixed_children", "children": ["[D]", "[E]"]},
                {"id": "c", "parent": "[C]", "kind": "single_choice", "pool": ["c1", "c2"]},
                {"id": "d", "parent": "[D]", "kind": "single_choice", "pool": ["d1", "d2"]},
                {"id": "e", "parent": "[E]", "kind": "single_choice", "pool": ["e1", "e2"]}
            ]}"#,
        )
        .unwrap();

        let mut tree = HyperTree::new(query(), "[A]");
        tree.add_group(0, vec![("[B]".into(), None), ("[C]".into(), None)]);
        tree.add_group(1, vec![("[D]".into(), None), ("[E]".into(), None)]);

        // Two chains: terminal [A] (frontier [C]) and terminal [B]
        // (frontier [D], [E]). Score the [B] chain higher.
        let candidates = tree.select_candidates(&library);
        assert_eq!(candidates.len(), 2);

        let sampling = crate::gateway::SamplingParams {
            temperature: 0.0,
            max_candidates: 1,
            seed: Some(7),
        };
        let mut script = MockScript::new();
        for (chain, frontier) in &candidates {
            let rendered = tree.render_select_chain(chain, frontier);
            let request =
                requests::score_chain(&query().title, &query().theme, &rendered, sampling.clone());
            let reply = if chain.chain_id == "n0001" {
                r#"{"score": 90}"#
            } else {
                r#"{"score": 40}"#
            };
            script = script.on_request(&request, reply);
        }
        script = script.on_match(
            RequestKind::SelectOption,
            Some("choose_leaf"),
            &[],
            r#"{"choice": "[D]"}"#,
        );

        let gw = gateway(script);
        let selected = ht_select_with(&gw, &tree, &library, 1).unwrap();
        assert_eq!(selected.len(), 1);
        assert_eq!(selected[0].0.chain_id, "n0001");
        assert_eq!(selected[0].0.score, Some(0.9));
        assert_eq!(tree.node(selected[0].1).label, "[D]");
    }

    #[test]
    fn fully_expanded_tree_reports_no_divisible_node() {
        let library = RuleLibrary::parse(
            r#"{"rules": [
                {"id": "a", "parent": "[A]", "kind": "fixed_children", "children": ["[B]"]}
            ]}"#,
        )
        .unwrap();
        let mut tree = HyperTree::new(query(), "[A]");
        tree.add_group(0, vec![("[B]".into(), None)]);
        let gw = gateway(MockScript::new());
        let err = ht_select_with(&gw, &tree, &library, 3).unwrap_err();
        assert!(matches!(err, PlanError::NoDivisibleNode));
    }

    #[test]
    fn expand_anchor_emits_the_fixed_group() {
        let library = RuleLibrary::bundled();
        let mut tree = HyperTree::new(query(), "[Anchor]");
        let gw = gateway(MockScript::new());
        let group = ht_expand(&gw, &mut tree, 0, &library).unwrap();
        let labels: Vec<&str> = group.iter().map(|&i| tree.node(i).label.as_str()).collect();
        assert_eq!(
            labels,
            vec!["[Future Horizon]", "[Place]", "[Scale]", "[Challenge Seeds 1]"]
        );
        assert_eq!(gw.call_count(), 0);
    }

    #[test]
    fn expand_choice_node_carries_the_picked_payload() {
        let library = RuleLibrary::bundled();
        let mut tree = HyperTree::new(query(), "[Future Horizon]");
        let gw = gateway(MockScript::new().on_kind(
            RequestKind::SelectOption,
            r#"{"choice": "NearFuture (5-15 years)"}"#,
        ));
        let group = ht_expand(&gw, &mut tree, 0, &library).unwrap();
        assert_eq!(group.len(), 1);
        let child = tree.node(group[0]);
        assert_eq!(child.label, "[NearFuture (5-15 years)]");
        assert_eq!(child.payload.as_deref(), Some("NearFuture (5-15 years)"));
    }

    #[test]
    fn expand_multi_choice_emits_one_child_per_pick() {
        let library = RuleLibrary::bundled();
        let mut tree = HyperTree::new(query(), "[Challenge Seeds 2]");
        let gw = gateway(MockScript::new().on_kind(
            RequestKind::SelectOption,
            r#"{"choices": ["Technology", "Ethics & Morality"]}"#,
        ));
        let group = ht_expand(&gw, &mut tree, 0, &library).unwrap();
        let labels: Vec<&str> = group.iter().map(|&i| tree.node(i).label.as_str()).collect();
        assert_eq!(labels, vec!["[Technology]", "[Ethics & Morality]"]);
    }

    #[test]
    fn construct_rejects_zero_iterations() {
        let gw = gateway(MockScript::new());
        let err = ht_construct(
            &gw,
            query(),
            &RuleLibrary::bundled(),
            PlanLimits { max_iterations: 0, beam: 3 },
        )
        .unwrap_err();
        assert!(matches!(err, PlanError::InvalidLimit(_)));
    }

    #[test]
    fn construct_halts_when_children_have_no_rules() {
        let library = RuleLibrary::parse(
            r#"{"rules": [
                {"id": "1", "parent": "[Plan]", "kind": "fixed_children",
                 "children": ["[Anchor]", "[Scene Setting]", "[Characters & Interaction]",
                              "[Conflict & Challenge]", "[Open Task]"]}
            ]}"#,
        )
        .unwrap();
        let gw = gateway(MockScript::new());
        let tree = ht_construct(&gw, query(), &library, PlanLimits::default()).unwrap();
        // Root plus the five children from the single applicable rule.
        assert_eq!(tree.len(), 6);
        verify_rule_soundness(&tree, &library).unwrap();
    }

    #[test]
    fn decide_single_chain_needs_no_scoring_call() {
        let mut tree = HyperTree::new(query(), "[A]");
        tree.add_group(0, vec![("[B]".into(), None), ("[C]".into(), None)]);
        let gw = gateway(MockScript::new());
        let outline = ht_decide(&gw, &tree).unwrap();
        assert_eq!(gw.call_count(), 0);
        assert_eq!(outline.sections.len(), 2);
        assert_eq!(outline.source_chain, "chain-000");
    }

    #[test]
    fn decide_ranks_alternative_instantiations() {
        // Root with three alternative hyperedges: decide must score each
        // instantiation and keep the argmax (ties to the lower chain id).
        let mut tree = HyperTree::new(query(), "[A]");
        tree.add_group(0, vec![("[B]".into(), None)]);
        tree.add_group(0, vec![("[C]".into(), None)]);
        tree.add_group(0, vec![("[D]".into(), None)]);

        let sampling = crate::gateway::SamplingParams {
            temperature: 0.0,
            max_candidates: 1,
            seed: Some(7),
        };
        let instantiations = tree.instantiations();
        assert_eq!(instantiations.len(), 3);
        let scores = ["20", "90", "50"];
        let mut script = MockScript::new();
        for (inst, score) in instantiations.iter().zip(scores) {
            let rendered = tree.render_instantiation(inst);
            let request =
                requests::score_chain(&query().title, &query().theme, &rendered, sampling.clone());
            script = script.on_request(&request, &format!(r#"{{"score": {score}}}"#));
        }
        let gw = gateway(script);
        let outline = ht_decide(&gw, &tree).unwrap();
        assert_eq!(outline.source_chain, "chain-001");
        assert_eq!(outline.sections[0].label, "[C]");
    }

    #[test]
    fn decide_breaks_ties_by_lower_chain_id() {
        let mut tree = HyperTree::new(query(), "[A]");
        tree.add_group(0, vec![("[B]".into(), None)]);
        tree.add_group(0, vec![("[C]".into(), None)]);
        let gw = gateway(
            MockScript::new().on_kind(RequestKind::SelectOption, r#"{"score": 70}"#),
        );
        let outline = ht_decide(&gw, &tree).unwrap();
        assert_eq!(outline.source_chain, "chain-000");
        assert_eq!(outline.sections[0].label, "[B]");
    }

    #[test]
    fn node_count_is_monotone_and_groups_unique() {
        let library = RuleLibrary::bundled();
        let script = MockScript::new()
            .on_match(RequestKind::SelectOption, Some("choose_leaf"), &[], r#"{"choice": "{options_pick:l}"}"#)
            .on_match(RequestKind::SelectOption, Some("choose_option"), &[], r#"{"choice": "{options_pick:o}"}"#)
            .on_match(RequestKind::SelectOption, Some("choose_options"), &[], r#"{"choices": {options_picks:m}}"#)
            .on_match(RequestKind::SelectOption, Some("score_chain"), &[], r#"{"score": {pct:s}}"#)
            .on_match(RequestKind::Generate, Some("generate_phrase"), &[], "core tension of the scenario");
        let gw = gateway(script);
        let tree = ht_construct(&gw, query(), &library, PlanLimits::default()).unwrap();
        verify_rule_soundness(&tree, &library).unwrap();
        for node in tree.nodes() {
            assert!(node.child_groups.len() <= 1);
        }
        // Construction exhausted every divisible node.
        for index in 0..tree.len() {
            assert!(!tree.divisible(index, &library));
        }
    }
}
