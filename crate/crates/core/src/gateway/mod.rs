//! Model gateway: the single abstraction through which every other module
//! obtains text generation, structured scoring, and judging.
//!
//! All outbound requests are built in [`requests`], rendered against the
//! template registry, and answered by a [`Backend`] — either the scripted
//! [`mock::MockBackend`] or the OpenAI-compatible live backend. No other
//! module in the crate constructs requests or touches transport concerns.

pub mod mock;
pub mod requests;
pub mod template;

#[cfg(feature = "live")]
pub mod live;

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use requests::fingerprint;
pub use template::TemplateRegistry;

/// What a request asks the model to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RequestKind {
    Generate,
    ScoreFragment,
    ScoreContext,
    DescribeBehavior,
    Judge,
    SimulateResponse,
    ScoreCreativity,
    SelectOption,
}

impl RequestKind {
    pub const ALL: [RequestKind; 8] = [
        RequestKind::Generate,
        RequestKind::ScoreFragment,
        RequestKind::ScoreContext,
        RequestKind::DescribeBehavior,
        RequestKind::Judge,
        RequestKind::SimulateResponse,
        RequestKind::ScoreCreativity,
        RequestKind::SelectOption,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RequestKind::Generate => "Generate",
            RequestKind::ScoreFragment => "ScoreFragment",
            RequestKind::ScoreContext => "ScoreContext",
            RequestKind::DescribeBehavior => "DescribeBehavior",
            RequestKind::Judge => "Judge",
            RequestKind::SimulateResponse => "SimulateResponse",
            RequestKind::ScoreCreativity => "ScoreCreativity",
            RequestKind::SelectOption => "SelectOption",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_candidates: u32,
    pub seed: Option<u64>,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            max_candidates: 1,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub kind: RequestKind,
    pub template_id: String,
    pub variables: BTreeMap<String, String>,
    pub sampling: SamplingParams,
}

/// Normalized per-fragment evaluator scores, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FragmentScores {
    pub s_sc: f64,
    pub s_im: f64,
    pub s_co: f64,
    pub s_ha: f64,
}

/// Normalized whole-context quality scores, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityScores {
    pub s_coh: f64,
    pub s_rel: f64,
    pub s_eng: f64,
}

/// One of the five ordered pairwise-preference labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JudgeLabel {
    StrongA,
    PreferA,
    Tie,
    PreferB,
    StrongB,
}

impl JudgeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            JudgeLabel::StrongA => "A>>B",
            JudgeLabel::PreferA => "A>B",
            JudgeLabel::Tie => "Tie",
            JudgeLabel::PreferB => "B>A",
            JudgeLabel::StrongB => "B>>A",
        }
    }

    /// Strict parse; no free text accepted.
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim() {
            "A>>B" => Some(JudgeLabel::StrongA),
            "A>B" => Some(JudgeLabel::PreferA),
            "Tie" => Some(JudgeLabel::Tie),
            "B>A" => Some(JudgeLabel::PreferB),
            "B>>A" => Some(JudgeLabel::StrongB),
            _ => None,
        }
    }

    /// The same verdict seen from the swapped presentation order.
    pub fn flipped(&self) -> Self {
        match self {
            JudgeLabel::StrongA => JudgeLabel::StrongB,
            JudgeLabel::PreferA => JudgeLabel::PreferB,
            JudgeLabel::Tie => JudgeLabel::Tie,
            JudgeLabel::PreferB => JudgeLabel::PreferA,
            JudgeLabel::StrongB => JudgeLabel::StrongA,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("template `{template_id}`: {detail}")]
    Template { template_id: String, detail: String },
    #[error("transport failure after {attempts} attempt(s): {detail}")]
    Transport { attempts: u32, detail: String },
    #[error("scorer reply unparseable after repair: {detail}")]
    ScoreParse { detail: String },
    #[error("no mock entry matches fingerprint {fingerprint} (kind {kind})")]
    MockMiss { fingerprint: String, kind: String },
    #[error("oracle chose `{choice}`, which is not in the candidate pool")]
    ChoiceOutOfPool { choice: String },
    #[error("{0}")]
    Domain(String),
}

/// Maps a 5-point Likert rating onto `[0, 1]` via `(rating - 1) / 4`.
pub fn normalize_likert(rating: i64) -> Result<f64, OracleError> {
    if !(1..=5).contains(&rating) {
        return Err(OracleError::Domain(format!(
            "Likert rating {rating} outside [1, 5]"
        )));
    }
    Ok((rating - 1) as f64 / 4.0)
}

/// Raw reply from a backend, with token usage when the transport reports it.
#[derive(Debug)]
pub struct BackendReply {
    pub text: String,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

/// A reply source. Implementations must be pure with respect to the request
/// under `temperature` 0 so scripted runs replay byte-identically.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn reply(
        &self,
        request: &OracleRequest,
        system_prompt: &str,
        user_prompt: &str,
    ) -> Result<BackendReply, OracleError>;
}

/// One logged gateway call. Token counts fall back to whitespace estimates
/// when the backend does not report usage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CallRecord {
    pub index: u64,
    pub kind: String,
    pub template_id: String,
    pub fingerprint: String,
    pub prompt_tokens: u64,
    pub reply_tokens: u64,
}

fn estimate_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// The oracle gateway. Thread-safe: requests may be issued concurrently.
pub struct Gateway {
    registry: TemplateRegistry,
    checklists: BTreeMap<String, String>,
    backend: Box<dyn Backend>,
    seed: Option<u64>,
    generation_temperature: f64,
    log: Mutex<Vec<CallRecord>>,
}

const DEFAULT_CHECKLISTS: [(&str, &str); 6] = [
    ("coherence", include_str!("../../assets/checklists/coherence.txt")),
    ("relevance", include_str!("../../assets/checklists/relevance.txt")),
    ("engagement", include_str!("../../assets/checklists/engagement.txt")),
    ("significance", include_str!("../../assets/checklists/significance.txt")),
    ("concreteness", include_str!("../../assets/checklists/concreteness.txt")),
    ("uncertainty", include_str!("../../assets/checklists/uncertainty.txt")),
];

impl Gateway {
    pub fn new(backend: Box<dyn Backend>) -> Self {
        Self {
            registry: TemplateRegistry::bundled(),
            checklists: DEFAULT_CHECKLISTS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            backend,
            seed: None,
            generation_temperature: 0.7,
            log: Mutex::new(Vec::new()),
        }
    }

    /// Gateway over a scripted mock backend.
    pub fn mock(script: mock::MockScript) -> Self {
        Self::new(Box::new(mock::MockBackend::new(script)))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_generation_temperature(mut self, temperature: f64) -> Self {
        self.generation_temperature = temperature;
        self
    }

    pub fn with_registry(mut self, registry: TemplateRegistry) -> Self {
        self.registry = registry;
        self
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    /// Sampling parameters for a request kind: generation uses the
    /// configured temperature, every scoring/judging/simulation call runs at
    /// temperature 0.
    pub fn sampling(&self, kind: RequestKind) -> SamplingParams {
        let temperature = match kind {
            RequestKind::Generate => self.generation_temperature,
            _ => 0.0,
        };
        SamplingParams {
            temperature,
            max_candidates: 1,
            seed: self.seed,
        }
    }

    pub fn metric_checklist(&self, metric: &str) -> Option<&str> {
        self.checklists.get(&metric.to_ascii_lowercase()).map(|s| s.as_str())
    }

    pub fn call_log(&self) -> Vec<CallRecord> {
        self.log.lock().unwrap().clone()
    }

    pub fn call_count(&self) -> u64 {
        self.log.lock().unwrap().len() as u64
    }

    pub fn token_totals(&self) -> (u64, u64) {
        let log = self.log.lock().unwrap();
        log.iter()
            .fold((0, 0), |(p, r), c| (p + c.prompt_tokens, r + c.reply_tokens))
    }

    /// Sends one request and returns the raw model text.
    pub fn complete(&self, request: &OracleRequest) -> Result<String, OracleError> {
        let mut user_prompt = self
            .registry
            .render(&request.template_id, &request.variables)?;
        // Repair re-asks carry the parse error; surface it ahead of the
        // original prompt so live models see what went wrong.
        if let Some(error) = request.variables.get("parse_error") {
            let mut preamble_vars = BTreeMap::new();
            preamble_vars.insert("error".to_string(), error.clone());
            let preamble = self.registry.render("repair_preamble", &preamble_vars)?;
            user_prompt = format!("{preamble}\n\n{user_prompt}");
        }
        let system_prompt = self.registry.render("system", &BTreeMap::new())?;

        let reply = self
            .backend
            .reply(request, &system_prompt, &user_prompt)?;

        let record = CallRecord {
            index: 0,
            kind: request.kind.as_str().to_string(),
            template_id: request.template_id.clone(),
            fingerprint: fingerprint(request),
            prompt_tokens: reply
                .prompt_tokens
                .unwrap_or_else(|| estimate_tokens(&user_prompt) + estimate_tokens(&system_prompt)),
            reply_tokens: reply
                .completion_tokens
                .unwrap_or_else(|| estimate_tokens(&reply.text)),
        };
        let mut log = self.log.lock().unwrap();
        let mut record = record;
        record.index = log.len() as u64;
        log.push(record);
        Ok(reply.text)
    }

    /// Completes a request and parses the reply, re-asking once with the
    /// parse error before giving up.
    fn completed_parsed<T>(
        &self,
        request: OracleRequest,
        parse: impl Fn(&str) -> Result<T, ParseFailure>,
    ) -> Result<T, OracleError> {
        let text = self.complete(&request)?;
        match parse(&text) {
            Ok(value) => Ok(value),
            Err(first) => {
                let retry = requests::repair(request, &first.detail);
                let text = self.complete(&retry)?;
                parse(&text).map_err(|second| second.into_error())
            }
        }
    }

    // ---- typed operations -------------------------------------------------

    /// Multi-aspect Likert scoring of one candidate sentence, normalized.
    pub fn score_fragment(
        &self,
        fragment: &str,
        history: &str,
        outline_hint: &str,
    ) -> Result<FragmentScores, OracleError> {
        if fragment.trim().is_empty() {
            return Err(OracleError::Domain("fragment must be non-empty".to_string()));
        }
        let request = requests::score_fragment(
            fragment,
            history,
            outline_hint,
            self.sampling(RequestKind::ScoreFragment),
        );
        self.completed_parsed(request, parse_fragment_scores)
    }

    /// Whole-context quality scores, clamped into `[0, 1]`.
    pub fn score_context(&self, text: &str) -> Result<QualityScores, OracleError> {
        let request = requests::score_context(text, self.sampling(RequestKind::ScoreContext));
        self.completed_parsed(request, parse_quality_scores)
    }

    /// Behavior descriptor components, clamped into `[0, 1]`.
    pub fn describe_behavior(&self, text: &str) -> Result<(f64, f64, f64), OracleError> {
        let request =
            requests::describe_behavior(text, self.sampling(RequestKind::DescribeBehavior));
        self.completed_parsed(request, parse_behavior)
    }

    /// Checklist-grounded pairwise judgment along one metric.
    pub fn judge_pair(
        &self,
        context_a: &str,
        context_b: &str,
        metric: &str,
        round: u32,
    ) -> Result<JudgeLabel, OracleError> {
        if context_a.trim().is_empty() || context_b.trim().is_empty() {
            return Err(OracleError::Domain(
                "both contexts must be non-empty".to_string(),
            ));
        }
        let checklist = self
            .metric_checklist(metric)
            .ok_or_else(|| OracleError::Template {
                template_id: "judge_pair".to_string(),
                detail: format!("no checklist registered for metric `{metric}`"),
            })?
            .to_string();
        let request = requests::judge_pair(
            context_a,
            context_b,
            metric,
            &checklist,
            round,
            self.sampling(RequestKind::Judge),
        );
        self.completed_parsed(request, |text| {
            JudgeLabel::parse(strip_fences(text)).ok_or_else(|| ParseFailure::malformed(
                format!("expected one of A>>B, A>B, Tie, B>A, B>>A; got `{}`", text.trim()),
            ))
        })
    }

    /// Role-conditioned participant simulation at temperature 0.
    pub fn simulate_response(
        &self,
        profile: &str,
        profile_prompt: &str,
        context_text: &str,
    ) -> Result<String, OracleError> {
        let request = requests::simulate_response(
            profile,
            profile_prompt,
            context_text,
            self.sampling(RequestKind::SimulateResponse),
        );
        self.complete(&request)
    }

    /// Creativity rating of one response, Likert-normalized into `[0, 1]`.
    pub fn score_creativity(&self, response: &str) -> Result<f64, OracleError> {
        let request =
            requests::score_creativity(response, self.sampling(RequestKind::ScoreCreativity));
        self.completed_parsed(request, |text| {
            let value: serde_json::Value = serde_json::from_str(strip_fences(text))
                .map_err(|e| ParseFailure::malformed(format!("invalid JSON: {e}")))?;
            let rating = value
                .get("rating")
                .and_then(|v| v.as_i64())
                .ok_or_else(|| ParseFailure::malformed("missing integer `rating`".to_string()))?;
            normalize_likert(rating)
                .map_err(|e| ParseFailure::malformed(e.to_string()))
        })
    }

    /// 0-100 chain score normalized into `[0, 1]`.
    pub fn score_chain(&self, title: &str, theme: &str, chain: &str) -> Result<f64, OracleError> {
        let request =
            requests::score_chain(title, theme, chain, self.sampling(RequestKind::SelectOption));
        self.completed_parsed(request, |text| {
            let value: serde_json::Value = serde_json::from_str(strip_fences(text))
                .map_err(|e| ParseFailure::malformed(format!("invalid JSON: {e}")))?;
            let score = value
                .get("score")
                .and_then(|v| v.as_i64())
                .ok_or_else(|| ParseFailure::malformed("missing integer `score`".to_string()))?;
            Ok(score.clamp(0, 100) as f64 / 100.0)
        })
    }

    /// Picks one entry from `options`; the reply must name a pool member.
    pub fn choose_leaf(&self, chain: &str, options: &[String]) -> Result<String, OracleError> {
        let joined = requests::join_options(options);
        let request =
            requests::choose_leaf(chain, &joined, self.sampling(RequestKind::SelectOption));
        self.completed_parsed(request, |text| parse_choice(text, options))
    }

    /// Picks one option from a rule pool.
    pub fn choose_option(
        &self,
        title: &str,
        theme: &str,
        parent_label: &str,
        options: &[String],
    ) -> Result<String, OracleError> {
        let joined = requests::join_options(options);
        let request = requests::choose_option(
            title,
            theme,
            parent_label,
            &joined,
            self.sampling(RequestKind::SelectOption),
        );
        self.completed_parsed(request, |text| parse_choice(text, options))
    }

    /// Candidate next sentence for one search-tree expansion.
    pub fn generate_sentence(
        &self,
        title: &str,
        theme: &str,
        section_label: &str,
        section_payload: &str,
        history: &str,
        candidate: u32,
    ) -> Result<String, OracleError> {
        let request = requests::generate_sentence(
            title,
            theme,
            section_label,
            section_payload,
            history,
            candidate,
            self.sampling(RequestKind::Generate),
        );
        self.complete(&request)
    }

    /// Short continuation sampled for the low-confidence look-ahead.
    pub fn generate_lookahead(
        &self,
        title: &str,
        theme: &str,
        section_label: &str,
        history: &str,
        fragment: &str,
        span: u32,
    ) -> Result<String, OracleError> {
        let request = requests::generate_lookahead(
            title,
            theme,
            section_label,
            history,
            fragment,
            span,
            self.sampling(RequestKind::Generate),
        );
        self.complete(&request)
    }

    /// Niche-targeted edit of a parent context.
    pub fn generate_mutant(
        &self,
        operator: &str,
        parent_text: &str,
        target: (f64, f64, f64),
    ) -> Result<String, OracleError> {
        let request = requests::generate_mutant(
            operator,
            parent_text,
            target,
            self.sampling(RequestKind::Generate),
        );
        self.complete(&request)
    }

    /// Re-asks a mutant edit whose first reply violated the mutation
    /// contract (empty or byte-equal to the parent). The retry carries the
    /// violation as repair context and fingerprints differently.
    pub fn generate_mutant_retry(
        &self,
        operator: &str,
        parent_text: &str,
        target: (f64, f64, f64),
        reason: &str,
    ) -> Result<String, OracleError> {
        let request = requests::generate_mutant(
            operator,
            parent_text,
            target,
            self.sampling(RequestKind::Generate),
        );
        self.complete(&requests::repair(request, reason))
    }

    /// Short phrase instantiating a generated-phrase outline slot.
    pub fn generate_phrase(
        &self,
        title: &str,
        theme: &str,
        parent_label: &str,
    ) -> Result<String, OracleError> {
        let request = requests::generate_phrase(
            title,
            theme,
            parent_label,
            self.sampling(RequestKind::Generate),
        );
        self.complete(&request)
    }

    /// Picks between `min` and `max` options from a rule pool.
    ///
    /// A reply with a wrong count is re-asked once, then clamped
    /// deterministically: truncated to `max`, or padded from the pool head
    /// with options not already picked up to `min`.
    pub fn choose_options(
        &self,
        title: &str,
        theme: &str,
        parent_label: &str,
        options: &[String],
        min: usize,
        max: usize,
    ) -> Result<Vec<String>, OracleError> {
        let joined = requests::join_options(options);
        let request = requests::choose_options(
            title,
            theme,
            parent_label,
            &joined,
            min,
            max,
            self.sampling(RequestKind::SelectOption),
        );

        let text = self.complete(&request)?;
        let first = parse_choices(&text, options, min, max);
        let failure = match first {
            Ok(picks) => return Ok(picks),
            Err(failure) => failure,
        };

        let retry = requests::repair(request, &failure.detail);
        let text = self.complete(&retry)?;
        match parse_choices(&text, options, min, max) {
            Ok(picks) => Ok(picks),
            Err(second) => match second.count_violation {
                Some(picks) => Ok(clamp_picks(picks, options, min, max)),
                None => Err(second.into_error()),
            },
        }
    }
}

fn clamp_picks(mut picks: Vec<String>, options: &[String], min: usize, max: usize) -> Vec<String> {
    picks.truncate(max);
    for option in options {
        if picks.len() >= min {
            break;
        }
        if !picks.contains(option) {
            picks.push(option.clone());
        }
    }
    picks
}

struct ParseFailure {
    detail: String,
    out_of_pool: Option<String>,
    /// Valid picks recovered from a reply with a wrong count.
    count_violation: Option<Vec<String>>,
}

impl ParseFailure {
    fn malformed(detail: String) -> Self {
        Self {
            detail,
            out_of_pool: None,
            count_violation: None,
        }
    }

    fn into_error(self) -> OracleError {
        match self.out_of_pool {
            Some(choice) => OracleError::ChoiceOutOfPool { choice },
            None => OracleError::ScoreParse { detail: self.detail },
        }
    }
}

/// Strips a single layer of Markdown code fences, if present.
fn strip_fences(text: &str) -> &str {
    let trimmed = text.trim();
    let Some(inner) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let Some(inner) = inner.strip_suffix("```") else {
        return trimmed;
    };
    let inner = inner.strip_prefix("json").unwrap_or(inner);
    inner.trim()
}

fn parse_fragment_scores(text: &str) -> Result<FragmentScores, ParseFailure> {
    #[derive(Deserialize)]
    struct Reply {
        sc: i64,
        im: i64,
        co: i64,
        ha: i64,
    }
    let reply: Reply = serde_json::from_str(strip_fences(text))
        .map_err(|e| ParseFailure::malformed(format!("invalid JSON: {e}")))?;
    let norm = |rating: i64| {
        normalize_likert(rating).map_err(|e| ParseFailure::malformed(e.to_string()))
    };
    Ok(FragmentScores {
        s_sc: norm(reply.sc)?,
        s_im: norm(reply.im)?,
        s_co: norm(reply.co)?,
        s_ha: norm(reply.ha)?,
    })
}

fn parse_quality_scores(text: &str) -> Result<QualityScores, ParseFailure> {
    #[derive(Deserialize)]
    struct Reply {
        coh: f64,
        rel: f64,
        eng: f64,
    }
    let reply: Reply = serde_json::from_str(strip_fences(text))
        .map_err(|e| ParseFailure::malformed(format!("invalid JSON: {e}")))?;
    Ok(QualityScores {
        s_coh: reply.coh.clamp(0.0, 1.0),
        s_rel: reply.rel.clamp(0.0, 1.0),
        s_eng: reply.eng.clamp(0.0, 1.0),
    })
}

fn parse_behavior(text: &str) -> Result<(f64, f64, f64), ParseFailure> {
    #[derive(Deserialize)]
    struct Reply {
        phi1: f64,
        phi2: f64,
        phi3: f64,
    }
    let reply: Reply = serde_json::from_str(strip_fences(text))
        .map_err(|e| ParseFailure::malformed(format!("invalid JSON: {e}")))?;
    Ok((
        reply.phi1.clamp(0.0, 1.0),
        reply.phi2.clamp(0.0, 1.0),
        reply.phi3.clamp(0.0, 1.0),
    ))
}

fn parse_choice(text: &str, options: &[String]) -> Result<String, ParseFailure> {
    let value: serde_json::Value = serde_json::from_str(strip_fences(text))
        .map_err(|e| ParseFailure::malformed(format!("invalid JSON: {e}")))?;
    let choice = value
        .get("choice")
        .and_then(|v| v.as_str())
        .ok_or_else(|| ParseFailure::malformed("missing string `choice`".to_string()))?;
    if options.iter().any(|o| o == choice) {
        Ok(choice.to_string())
    } else {
        Err(ParseFailure {
            detail: format!("choice `{choice}` is not one of the offered options"),
            out_of_pool: Some(choice.to_string()),
            count_violation: None,
        })
    }
}

fn parse_choices(
    text: &str,
    options: &[String],
    min: usize,
    max: usize,
) -> Result<Vec<String>, ParseFailure> {
    let value: serde_json::Value = serde_json::from_str(strip_fences(text))
        .map_err(|e| ParseFailure::malformed(format!("invalid JSON: {e}")))?;
    let raw = value
        .get("choices")
        .and_then(|v| v.as_array())
        .ok_or_else(|| ParseFailure::malformed("missing array `choices`".to_string()))?;

    let mut picks: Vec<String> = Vec::new();
    for item in raw {
        let choice = item
            .as_str()
            .ok_or_else(|| ParseFailure::malformed("non-string entry in `choices`".to_string()))?;
        if !options.iter().any(|o| o == choice) {
            return Err(ParseFailure {
                detail: format!("choice `{choice}` is not one of the offered options"),
                out_of_pool: Some(choice.to_string()),
                count_violation: None,
            });
        }
        if !picks.iter().any(|p| p == choice) {
            picks.push(choice.to_string());
        }
    }

    if picks.len() < min || picks.len() > max {
        return Err(ParseFailure {
            detail: format!(
                "expected between {min} and {max} distinct choices, got {}",
                picks.len()
            ),
            out_of_pool: None,
            count_violation: Some(picks),
        });
    }
    Ok(picks)
}
