//! Action diversity: distinct verb lemmas over total verb tokens.
//!
//! Verb tokens are recognized against a bundled lemma list with regular
//! inflection folding (-s/-es/-ies, -ed/-d/-ied, -ing with consonant
//! doubling and silent-e restoration) plus a table of common irregular
//! forms. The lexicon is replaceable at load time.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

const DEFAULT_LEXICON: &str = include_str!("../../assets/verbs.txt");

// Irregular form -> lemma. Inflection folding handles the regular rest.
const IRREGULAR_FORMS: [(&str, &str); 93] = [
    ("am", "be"), ("is", "be"), ("are", "be"), ("was", "be"), ("were", "be"),
    ("been", "be"), ("being", "be"),
    ("ate", "eat"), ("eaten", "eat"),
    ("bore", "bear"), ("borne", "bear"),
    ("beat", "beat"), ("beaten", "beat"),
    ("became", "become"), ("began", "begin"), ("begun", "begin"),
    ("bent", "bend"), ("bet", "bet"), ("bound", "bind"), ("bit", "bite"),
    ("bitten", "bite"), ("blew", "blow"), ("blown", "blow"),
    ("broke", "break"), ("broken", "break"), ("bred", "breed"),
    ("brought", "bring"), ("built", "build"), ("burnt", "burn"),
    ("burst", "burst"), ("bought", "buy"), ("caught", "catch"),
    ("chose", "choose"), ("chosen", "choose"), ("came", "come"),
    ("cost", "cost"), ("crept", "creep"), ("cut", "cut"), ("dealt", "deal"),
    ("dug", "dig"), ("did", "do"), ("done", "do"), ("drew", "draw"),
    ("drawn", "draw"), ("drank", "drink"), ("drunk", "drink"),
    ("drove", "drive"), ("driven", "drive"), ("fell", "fall"),
    ("fallen", "fall"), ("fed", "feed"), ("felt", "feel"),
    ("fought", "fight"), ("found", "find"), ("fled", "flee"),
    ("flew", "fly"), ("flown", "fly"), ("forbade", "forbid"),
    ("forgot", "forget"), ("forgotten", "forget"), ("forgave", "forgive"),
    ("froze", "freeze"), ("frozen", "freeze"), ("got", "get"),
    ("gotten", "get"), ("gave", "give"), ("given", "give"),
    ("went", "go"), ("gone", "go"), ("goes", "go"), ("grew", "grow"),
    ("grown", "grow"), ("hung", "hang"), ("had", "have"), ("has", "have"),
    ("heard", "hear"), ("held", "hold"), ("kept", "keep"), ("knew", "know"),
    ("known", "know"), ("led", "lead"), ("left", "leave"), ("lent", "lend"),
    ("lay", "lie"), ("lost", "lose"), ("made", "make"), ("meant", "mean"),
    ("met", "meet"), ("paid", "pay"), ("ran", "run"), ("said", "say"),
    ("saw", "see"), ("seen", "see"),
];

#[derive(Debug, Clone)]
pub struct VerbLexicon {
    lemmas: HashSet<String>,
    irregular: HashMap<String, String>,
}

impl Default for VerbLexicon {
    fn default() -> Self {
        Self::bundled()
    }
}

impl VerbLexicon {
    pub fn bundled() -> Self {
        Self::from_lines(DEFAULT_LEXICON)
    }

    pub fn from_lines(text: &str) -> Self {
        let lemmas = text
            .lines()
            .map(str::trim)
            .filter(|line| !line.is_empty() && !line.starts_with('#'))
            .map(|line| line.to_lowercase())
            .collect();
        let irregular = IRREGULAR_FORMS
            .iter()
            .map(|(form, lemma)| (form.to_string(), lemma.to_string()))
            .collect();
        Self { lemmas, irregular }
    }

    pub fn from_path(path: &Path) -> std::io::Result<Self> {
        Ok(Self::from_lines(&std::fs::read_to_string(path)?))
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }

    /// The lemma for `token` if it reads as a verb form, lowercased.
    pub fn lemma_of(&self, token: &str) -> Option<String> {
        let token = token.to_lowercase();
        if let Some(lemma) = self.irregular.get(&token) {
            return Some(lemma.clone());
        }
        if self.lemmas.contains(&token) {
            return Some(token);
        }
        unfold_inflections(&token)
            .into_iter()
            .find(|candidate| self.lemmas.contains(candidate))
    }
}

/// Candidate lemmas for a regularly inflected surface form.
fn unfold_inflections(token: &str) -> Vec<String> {
    let mut candidates = Vec::new();
    let mut push = |s: String| {
        if s.len() >= 2 && !candidates.contains(&s) {
            candidates.push(s);
        }
    };

    if let Some(stem) = token.strip_suffix("ies") {
        push(format!("{stem}y"));
    }
    if let Some(stem) = token.strip_suffix("es") {
        push(stem.to_string());
        push(format!("{stem}e"));
    }
    if let Some(stem) = token.strip_suffix('s') {
        push(stem.to_string());
    }
    if let Some(stem) = token.strip_suffix("ied") {
        push(format!("{stem}y"));
    }
    if let Some(stem) = token.strip_suffix("ed") {
        push(stem.to_string());
        push(format!("{stem}e"));
        if ends_with_doubled_consonant(stem) {
            push(stem[..stem.len() - 1].to_string());
        }
    }
    if let Some(stem) = token.strip_suffix("ing") {
        push(stem.to_string());
        push(format!("{stem}e"));
        if ends_with_doubled_consonant(stem) {
            push(stem[..stem.len() - 1].to_string());
        }
    }
    candidates
}

fn ends_with_doubled_consonant(stem: &str) -> bool {
    let bytes = stem.as_bytes();
    bytes.len() >= 2
        && bytes[bytes.len() - 1] == bytes[bytes.len() - 2]
        && !matches!(bytes[bytes.len() - 1], b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Percentage of distinct verb lemmas among verb tokens:
/// `100 * distinct / total`, with 100 for texts holding no verb tokens.
pub fn diverse_verbs(text: &str, lexicon: &VerbLexicon) -> f64 {
    let mut total = 0usize;
    let mut distinct: BTreeSet<String> = BTreeSet::new();
    for raw in text.split_whitespace() {
        let token: String = raw.chars().filter(|c| c.is_ascii_alphabetic()).collect();
        if token.is_empty() {
            continue;
        }
        if let Some(lemma) = lexicon.lemma_of(&token) {
            total += 1;
            distinct.insert(lemma);
        }
    }
    if total == 0 {
        return 100.0;
    }
    100.0 * distinct.len() as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_verb_lowers_the_ratio() {
        let lexicon = VerbLexicon::bundled();
        let score = diverse_verbs("run run run", &lexicon);
        assert!((score - 100.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn all_distinct_verbs_score_100() {
        let lexicon = VerbLexicon::bundled();
        assert_eq!(diverse_verbs("run jump swim", &lexicon), 100.0);
    }

    #[test]
    fn no_verbs_scores_100_by_convention() {
        let lexicon = VerbLexicon::bundled();
        assert_eq!(diverse_verbs("", &lexicon), 100.0);
        assert_eq!(diverse_verbs("the blue sky", &lexicon), 100.0);
    }

    #[test]
    fn inflections_fold_onto_the_lemma() {
        let lexicon = VerbLexicon::bundled();
        assert_eq!(lexicon.lemma_of("runs").as_deref(), Some("run"));
        assert_eq!(lexicon.lemma_of("running").as_deref(), Some("run"));
        assert_eq!(lexicon.lemma_of("ran").as_deref(), Some("run"));
        assert_eq!(lexicon.lemma_of("stopped").as_deref(), Some("stop"));
        assert_eq!(lexicon.lemma_of("making").as_deref(), Some("make"));
        assert_eq!(lexicon.lemma_of("carried").as_deref(), Some("carry"));
        assert_eq!(lexicon.lemma_of("went").as_deref(), Some("go"));
        assert_eq!(lexicon.lemma_of("xylophone"), None);

        // Inflected repeats still count as one lemma.
        let score = diverse_verbs("run runs running", &lexicon);
        assert!((score - 100.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn lexicon_is_reasonably_sized() {
        assert!(VerbLexicon::bundled().len() > 700);
    }
}
