//! Sentence-level Monte Carlo Tree Search context generator.
//!
//! One search tree per outline section: UCT selection, U-way expansion,
//! dual-horizon evaluation, and running-mean backpropagation, followed by
//! greedy best-path extraction. Earlier sections' extracted text is threaded
//! into later sections as fixed history.

pub mod segment;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{FragmentScores, Gateway, OracleError};
use crate::planner::{Outline, OutlineSection, Query};
use crate::qd::BehaviorDescriptor;

pub use segment::segment_sentences;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("all candidate generations were empty")]
    EmptyGeneration,
    #[error("search tree has no expanded children")]
    EmptyTree,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// One node of the search tree: a sentence fragment plus UCT statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchNode {
    pub id: String,
    /// Empty at the root.
    pub fragment: String,
    pub visit_count: u64,
    pub value: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
}

impl Default for SearchTree {
    fn default() -> Self {
        Self::new()
    }
}

impl SearchTree {
    pub fn new() -> Self {
        Self {
            nodes: vec![SearchNode {
                id: "s0000".to_string(),
                fragment: String::new(),
                visit_count: 0,
                value: 0.0,
                parent: None,
                children: Vec::new(),
                depth: 0,
            }],
        }
    }

    pub fn node(&self, index: usize) -> &SearchNode {
        &self.nodes[index]
    }

    pub fn nodes(&self) -> &[SearchNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_child(&mut self, parent: usize, fragment: String) -> usize {
        let index = self.nodes.len();
        let depth = self.nodes[parent].depth + 1;
        self.nodes.push(SearchNode {
            id: format!("s{index:04}"),
            fragment,
            visit_count: 0,
            value: 0.0,
            parent: Some(parent),
            children: Vec::new(),
            depth,
        });
        self.nodes[parent].children.push(index);
        index
    }

    /// Overwrites a node's UCT statistics. Intended for synthetic trees in
    /// tests and demos.
    pub fn set_stats(&mut self, index: usize, visit_count: u64, value: f64) {
        self.nodes[index].visit_count = visit_count;
        self.nodes[index].value = value;
    }

    /// Sentence fragments from the root down to (and including) `index`.
    pub fn path_fragments(&self, index: usize) -> Vec<&str> {
        let mut path = Vec::new();
        let mut cursor = Some(index);
        while let Some(i) = cursor {
            if !self.nodes[i].fragment.is_empty() {
                path.push(self.nodes[i].fragment.as_str());
            }
            cursor = self.nodes[i].parent;
        }
        path.reverse();
        path
    }

    fn path_ids(&self, index: usize) -> Vec<String> {
        let mut path = Vec::new();
        let mut cursor = Some(index);
        while let Some(i) = cursor {
            path.push(self.nodes[i].id.clone());
            cursor = self.nodes[i].parent;
        }
        path.reverse();
        path
    }
}

/// Aggregation weights and the look-ahead trigger threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationWeights {
    pub w_sc: f64,
    pub w_im: f64,
    pub w_co: f64,
    pub tau: f64,
}

impl EvaluationWeights {
    pub fn new(w_sc: f64, w_im: f64, w_co: f64, tau: f64) -> Result<Self, SearchError> {
        if w_sc < 0.0 || w_im < 0.0 || w_co < 0.0 {
            return Err(SearchError::Domain("weights must be non-negative".to_string()));
        }
        if (w_sc + w_im + w_co - 1.0).abs() > 1e-9 {
            return Err(SearchError::Domain(format!(
                "weights must sum to 1, got {}",
                w_sc + w_im + w_co
            )));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(SearchError::Domain("tau must lie in [0, 1]".to_string()));
        }
        Ok(Self { w_sc, w_im, w_co, tau })
    }

    /// The three preset weight groups; group 2 is the default.
    pub fn group(group: u8) -> Result<Self, SearchError> {
        match group {
            1 => Self::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.5),
            2 => Self::new(0.4, 0.3, 0.3, 0.5),
            3 => Self::new(0.5, 0.25, 0.25, 0.5),
            other => Err(SearchError::Domain(format!("unknown weight group {other}"))),
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }
}

impl Default for EvaluationWeights {
    fn default() -> Self {
        Self::group(2).expect("group 2 preset is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Seed,
    Mutant,
}

/// A generated context: text plus the outline that guided it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Context {
    pub context_id: String,
    pub text: String,
    pub outline: Outline,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<BehaviorDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    /// The seed ancestor this context descends from (itself for seeds).
    pub lineage_root: String,
}

/// Per-section search budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchBudget {
    pub simulations: usize,
    pub u: u32,
    pub depth_cap: usize,
    pub c: f64,
    pub weights: EvaluationWeights,
    pub lookahead_len: u32,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            simulations: 24,
            u: 3,
            depth_cap: 6,
            c: 1.414,
            weights: EvaluationWeights::default(),
            lookahead_len: 2,
        }
    }
}

/// One logged simulation: the evaluated node, its root path, the propagated
/// reward, and whether the look-ahead fired.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimRecord {
    pub sim: usize,
    pub path: Vec<String>,
    pub evaluated: String,
    pub r_e: f64,
    pub lookahead: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionTrace {
    pub section: String,
    pub sims: Vec<SimRecord>,
}

/// Outcome of searching one outline section.
#[derive(Debug)]
pub struct SectionRun {
    pub tree: SearchTree,
    pub best_path: Vec<usize>,
    pub sentences: Vec<String>,
    pub trace: SectionTrace,
}

/// `UCT(s) = V(s) + c * sqrt(ln N(parent) / N(s))`.
pub fn uct_score(node: &SearchNode, parent_visits: u64, c: f64) -> Result<f64, SearchError> {
    if parent_visits < 1 {
        return Err(SearchError::Domain("parent visit count must be >= 1".to_string()));
    }
    if node.visit_count < 1 {
        return Err(SearchError::Domain(
            "unvisited nodes bypass UCT scoring".to_string(),
        ));
    }
    let exploration = ((parent_visits as f64).ln() / node.visit_count as f64).sqrt();
    Ok(node.value + c * exploration)
}

/// Walks from the root taking the max-UCT child at each level. Any
/// unvisited child is chosen immediately, before visited siblings; ties
/// break toward the lower node id. Returns a leaf.
pub fn select(tree: &SearchTree, c: f64) -> usize {
    let mut cursor = 0usize;
    loop {
        let node = tree.node(cursor);
        if node.children.is_empty() {
            return cursor;
        }
        if let Some(&unvisited) = node
            .children
            .iter()
            .find(|&&child| tree.node(child).visit_count == 0)
        {
            return unvisited;
        }
        let parent_visits = node.visit_count.max(1);
        cursor = node
            .children
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let ua = uct_score(tree.node(a), parent_visits, c).unwrap_or(f64::NEG_INFINITY);
                let ub = uct_score(tree.node(b), parent_visits, c).unwrap_or(f64::NEG_INFINITY);
                ua.partial_cmp(&ub)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(b.cmp(&a)) // lower index wins ties
            })
            .expect("children non-empty");
    }
}

fn outline_hint(section: &OutlineSection) -> String {
    match &section.payload {
        Some(payload) if payload != &section.label => format!("{}: {payload}", section.label),
        _ => section.label.clone(),
    }
}

fn joined_history(outer: &str, path: &[&str]) -> String {
    let mut parts: Vec<&str> = Vec::new();
    if !outer.is_empty() {
        parts.push(outer);
    }
    parts.extend(path.iter().copied());
    parts.join(" ")
}

/// Samples `u` candidate next sentences, truncates each reply to its first
/// sentence, merges byte-identical siblings, and appends the new children.
pub fn expand(
    gateway: &Gateway,
    tree: &mut SearchTree,
    node_index: usize,
    query: &Query,
    section: &OutlineSection,
    outer_history: &str,
    u: u32,
) -> Result<Vec<usize>, SearchError> {
    let history = joined_history(outer_history, &tree.path_fragments(node_index));
    let payload = section.payload.clone().unwrap_or_default();
    let mut fragments: Vec<String> = Vec::new();
    for candidate in 0..u.max(1) {
        let reply = gateway.generate_sentence(
            &query.title,
            &query.theme,
            &section.label,
            &payload,
            &history,
            candidate,
        )?;
        if let Some(first) = segment_sentences(&reply).into_iter().next() {
            if !fragments.contains(&first) {
                fragments.push(first);
            }
        }
    }
    if fragments.is_empty() {
        return Err(SearchError::EmptyGeneration);
    }
    Ok(fragments
        .into_iter()
        .map(|fragment| tree.add_child(node_index, fragment))
        .collect())
}

/// `V_imm = (w_sc*s_sc + w_im*s_im + w_co*s_co) * (1 - s_ha)`.
pub fn aggregate_immediate(scores: FragmentScores, weights: &EvaluationWeights) -> f64 {
    let weighted = weights.w_sc * scores.s_sc + weights.w_im * scores.s_im + weights.w_co * scores.s_co;
    weighted * (1.0 - scores.s_ha)
}

/// Dual-horizon valuation: immediate scoring, plus a short-continuation
/// re-score when the immediate value falls below `tau`. The continuation is
/// evaluated once and discarded. Returns `(r_e, lookahead_fired)`.
pub fn evaluate(
    gateway: &Gateway,
    query: &Query,
    section: &OutlineSection,
    fragment: &str,
    history: &str,
    weights: &EvaluationWeights,
    lookahead_len: u32,
) -> Result<(f64, bool), SearchError> {
    if fragment.trim().is_empty() {
        return Err(SearchError::Domain("fragment must be non-empty".to_string()));
    }
    let hint = outline_hint(section);
    let scores = gateway.score_fragment(fragment, history, &hint)?;
    let immediate = aggregate_immediate(scores, weights);
    if immediate >= weights.tau {
        return Ok((immediate, false));
    }

    let continuation = gateway.generate_lookahead(
        &query.title,
        &query.theme,
        &section.label,
        history,
        fragment,
        lookahead_len,
    )?;
    let span: Vec<String> = segment_sentences(&continuation)
        .into_iter()
        .take(lookahead_len.max(1) as usize)
        .collect();
    let concatenated = if span.is_empty() {
        fragment.to_string()
    } else {
        format!("{fragment} {}", span.join(" "))
    };
    let rescored = gateway.score_fragment(&concatenated, history, &hint)?;
    Ok((aggregate_immediate(rescored, weights), true))
}

/// Propagates `r_e` from `leaf` to the root: `N += 1`,
/// `V = (V*N_old + r_e) / N_new` at every node on the path.
pub fn backpropagate(tree: &mut SearchTree, leaf: usize, r_e: f64) {
    let mut cursor = Some(leaf);
    while let Some(index) = cursor {
        let node = &mut tree.nodes[index];
        let old_visits = node.visit_count as f64;
        node.visit_count += 1;
        node.value = (node.value * old_visits + r_e) / node.visit_count as f64;
        cursor = node.parent;
    }
}

/// Greedy root-to-leaf descent by child value; ties break toward the higher
/// visit count, then the lower node id. Excludes the root.
pub fn extract_best(tree: &SearchTree) -> Result<Vec<usize>, SearchError> {
    if tree.node(0).children.is_empty() {
        return Err(SearchError::EmptyTree);
    }
    let mut path = Vec::new();
    let mut cursor = 0usize;
    while !tree.node(cursor).children.is_empty() {
        cursor = tree
            .node(cursor)
            .children
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let na = tree.node(a);
                let nb = tree.node(b);
                na.value
                    .partial_cmp(&nb.value)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(na.visit_count.cmp(&nb.visit_count))
                    .then(b.cmp(&a)) // lower index wins remaining ties
            })
            .expect("children non-empty");
        path.push(cursor);
    }
    Ok(path)
}

/// Runs the full search loop for one outline section.
pub fn run_section(
    gateway: &Gateway,
    query: &Query,
    section: &OutlineSection,
    outer_history: &str,
    budget: &SearchBudget,
) -> Result<SectionRun, SearchError> {
    if budget.simulations < 1 {
        return Err(SearchError::Domain("simulations must be >= 1".to_string()));
    }
    let mut tree = SearchTree::new();
    let mut sims = Vec::with_capacity(budget.simulations);

    for sim in 0..budget.simulations {
        let mut node = select(&tree, budget.c);
        let should_expand = {
            let n = tree.node(node);
            n.children.is_empty()
                && (node == 0 || (n.visit_count > 0 && n.depth < budget.depth_cap))
        };
        if should_expand {
            let children = expand(gateway, &mut tree, node, query, section, outer_history, budget.u)?;
            node = children[0];
        }

        let fragment = tree.node(node).fragment.clone();
        let parent_history = match tree.node(node).parent {
            Some(parent) => joined_history(outer_history, &tree.path_fragments(parent)),
            None => outer_history.to_string(),
        };
        let (r_e, lookahead) = evaluate(
            gateway,
            query,
            section,
            &fragment,
            &parent_history,
            &budget.weights,
            budget.lookahead_len,
        )?;
        backpropagate(&mut tree, node, r_e);
        sims.push(SimRecord {
            sim,
            path: tree.path_ids(node),
            evaluated: tree.node(node).id.clone(),
            r_e,
            lookahead,
        });
    }

    let best_path = extract_best(&tree)?;
    let sentences = best_path
        .iter()
        .map(|&i| tree.node(i).fragment.clone())
        .collect();
    Ok(SectionRun {
        tree,
        best_path,
        sentences,
        trace: SectionTrace {
            section: section.label.clone(),
            sims,
        },
    })
}

/// Builds a seed context by searching each outline section in order, with
/// all previously extracted text as fixed history.
pub fn generate_seed(
    gateway: &Gateway,
    query: &Query,
    outline: &Outline,
    budget: &SearchBudget,
    context_id: &str,
) -> Result<(Context, Vec<SectionTrace>), SearchError> {
    if outline.sections.is_empty() {
        return Err(SearchError::Domain("outline must be non-empty".to_string()));
    }
    let mut sentences: Vec<String> = Vec::new();
    let mut traces = Vec::with_capacity(outline.sections.len());

    for section in &outline.sections {
        let history = sentences.join(" ");
        let run = run_section(gateway, query, section, &history, budget)?;
        if run.sentences.iter().all(|s| s.trim().is_empty()) {
            return Err(SearchError::EmptyGeneration);
        }
        sentences.extend(run.sentences);
        traces.push(run.trace);
    }

    Ok((
        Context {
            context_id: context_id.to_string(),
            text: sentences.join(" "),
            outline: outline.clone(),
            provenance: Provenance::Seed,
            descriptor: None,
            fitness: None,
            parent: None,
            lineage_root: context_id.to_string(),
        },
        traces,
    ))
}
