//! Run configuration.
//!
//! A config file is JSON with every field optional; unset fields take the
//! defaults below. Relative paths inside a config resolve against the
//! config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::mcts::{EvaluationWeights, SearchBudget};
use crate::planner::PlanLimits;
use crate::qd::EvolveBudget;

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Live,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LiveSettings {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub attempts: u32,
    pub backoff_ms: u64,
    pub max_in_flight: u32,
}

impl Default for LiveSettings {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com".to_string(),
            model: "gpt-4o-mini".to_string(),
            api_key_env: "OPENAI_API_KEY".to_string(),
            attempts: 3,
            backoff_ms: 500,
            max_in_flight: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerSettings {
    pub beam: usize,
    pub max_iterations: usize,
    /// Optional rule library path; the bundled grammar otherwise.
    pub rules: Option<PathBuf>,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        Self { beam: 3, max_iterations: 64, rules: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MctsSettings {
    pub c: f64,
    pub u: u32,
    pub simulations: usize,
    pub depth_cap: usize,
    pub tau: f64,
    /// Preset weight group 1, 2, or 3; overridden by `weights`.
    pub weights_group: u8,
    pub weights: Option<WeightTriple>,
    pub lookahead_len: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeightTriple {
    pub w_sc: f64,
    pub w_im: f64,
    pub w_co: f64,
}

impl Default for MctsSettings {
    fn default() -> Self {
        Self {
            c: 1.414,
            u: 3,
            simulations: 24,
            depth_cap: 6,
            tau: 0.5,
            weights_group: 2,
            weights: None,
            lookahead_len: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchiveSettings {
    pub bins: usize,
    pub iterations: usize,
    pub mutants_per_iteration: usize,
    /// Budget for the route-back bonus round.
    pub bonus_iterations: usize,
}

impl Default for ArchiveSettings {
    fn default() -> Self {
        Self { bins: 3, iterations: 30, mutants_per_iteration: 4, bonus_iterations: 10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RefinerSettings {
    pub threshold: f64,
    pub max_cycles: u32,
}

impl Default for RefinerSettings {
    fn default() -> Self {
        Self { threshold: 0.6, max_cycles: 3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationSettings {
    pub metrics: Vec<String>,
    /// Optional external similarity scorer: a command invoked per aligned
    /// pair as `<command...> <candidate_file> <reference_file>`, printing a
    /// single float. Results are cached under the evaluation directory.
    pub external_scorer: Option<String>,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        Self {
            metrics: crate::metrics::SUBJECTIVE_METRICS
                .iter()
                .map(|m| m.to_string())
                .collect(),
            external_scorer: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub backend: BackendKind,
    pub seed: u64,
    /// JSON-lines dataset path; the bundled 5-entry sample otherwise.
    pub dataset: Option<PathBuf>,
    /// Mock script path, or "builtin" for the bundled sample script.
    pub mock_script: String,
    /// Directory of `.txt` prompt templates overlaying the bundled ones.
    pub templates: Option<PathBuf>,
    pub generation_temperature: f64,
    pub live: LiveSettings,
    pub planner: PlannerSettings,
    pub mcts: MctsSettings,
    pub archive: ArchiveSettings,
    pub refiner: RefinerSettings,
    pub evaluation: EvaluationSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Mock,
            seed: 7,
            dataset: None,
            mock_script: "builtin".to_string(),
            templates: None,
            generation_temperature: 0.7,
            live: LiveSettings::default(),
            planner: PlannerSettings::default(),
            mcts: MctsSettings::default(),
            archive: ArchiveSettings::default(),
            refiner: RefinerSettings::default(),
            evaluation: EvaluationSettings::default(),
        }
    }
}

impl RunConfig {
    /// Loads a config file and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.anchor_paths(base);
        config.validate()?;
        Ok(config)
    }

    fn anchor_paths(&mut self, base: &Path) {
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        if let Some(dataset) = &mut self.dataset {
            anchor(dataset);
        }
        if let Some(templates) = &mut self.templates {
            anchor(templates);
        }
        if let Some(rules) = &mut self.planner.rules {
            anchor(rules);
        }
        if self.mock_script != "builtin" {
            let mut p = PathBuf::from(&self.mock_script);
            anchor(&mut p);
            self.mock_script = p.to_string_lossy().into_owned();
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: String| Err(PipelineError::Config(msg));
        if self.mcts.c < 0.0 {
            return fail("mcts.c must be >= 0".to_string());
        }
        if !(0.0..=1.0).contains(&self.mcts.tau) {
            return fail("mcts.tau must lie in [0, 1]".to_string());
        }
        if self.mcts.u < 1 || self.mcts.simulations < 1 || self.mcts.depth_cap < 1 {
            return fail("mcts.u, simulations, and depth_cap must be >= 1".to_string());
        }
        if self.planner.beam < 1 || self.planner.max_iterations < 1 {
            return fail("planner.beam and max_iterations must be >= 1".to_string());
        }
        if self.archive.bins < 1 || self.archive.mutants_per_iteration < 1 {
            return fail("archive.bins and mutants_per_iteration must be >= 1".to_string());
        }
        if !(0.0..=1.0).contains(&self.refiner.threshold) {
            return fail("refiner.threshold must lie in [0, 1]".to_string());
        }
        if self.refiner.max_cycles < 1 {
            return fail("refiner.max_cycles must be >= 1".to_string());
        }
        if self.generation_temperature < 0.0 {
            return fail("generation_temperature must be >= 0".to_string());
        }
        self.evaluation_weights().map(|_| ())
    }

    /// The configured aggregation weights: an explicit triple if present,
    /// else the selected preset group.
    pub fn evaluation_weights(&self) -> Result<EvaluationWeights, PipelineError> {
        let weights = match self.mcts.weights {
            Some(triple) => EvaluationWeights::new(triple.w_sc, triple.w_im, triple.w_co, self.mcts.tau),
            None => EvaluationWeights::group(self.mcts.weights_group),
        }
        .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(weights.with_tau(self.mcts.tau))
    }

    pub fn search_budget(&self) -> Result<SearchBudget, PipelineError> {
        Ok(SearchBudget {
            simulations: self.mcts.simulations,
            u: self.mcts.u,
            depth_cap: self.mcts.depth_cap,
            c: self.mcts.c,
            weights: self.evaluation_weights()?,
            lookahead_len: self.mcts.lookahead_len,
        })
    }

    pub fn plan_limits(&self) -> PlanLimits {
        PlanLimits {
            max_iterations: self.planner.max_iterations,
            beam: self.planner.beam,
        }
    }

    pub fn evolve_budget(&self) -> EvolveBudget {
        EvolveBudget {
            iterations: self.archive.iterations,
            mutants_per_iteration: self.archive.mutants_per_iteration,
        }
    }

    pub fn bonus_budget(&self) -> EvolveBudget {
        EvolveBudget {
            iterations: self.archive.bonus_iterations,
            mutants_per_iteration: self.archive.mutants_per_iteration,
        }
    }
}
