//! Sentence segmentation.
//!
//! Splits on terminal punctuation (`.` `!` `?`) followed by whitespace,
//! keeping the punctuation with the left segment. A short abbreviation list
//! suppresses false splits after titles and Latin abbreviations.

const ABBREVIATIONS: [&str; 5] = ["Dr.", "Mr.", "Ms.", "e.g.", "i.e."];

/// Splits `text` into sentences. Never returns empty segments; empty input
/// yields an empty list.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut segments = Vec::new();
    let mut start = 0usize;

    for i in 0..chars.len() {
        let c = chars[i];
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let at_boundary = chars.get(i + 1).is_none_or(|next| next.is_whitespace());
        if !at_boundary {
            continue;
        }
        if c == '.' && ends_with_abbreviation(&chars[start..=i]) {
            continue;
        }
        let segment: String = chars[start..=i].iter().collect();
        let segment = segment.trim();
        if !segment.is_empty() {
            segments.push(segment.to_string());
        }
        start = i + 1;
    }

    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        let tail = tail.trim();
        if !tail.is_empty() {
            segments.push(tail.to_string());
        }
    }
    segments
}

fn ends_with_abbreviation(segment: &[char]) -> bool {
    let end = segment.len();
    let mut word_start = end;
    while word_start > 0 && !segment[word_start - 1].is_whitespace() {
        word_start -= 1;
    }
    let word: String = segment[word_start..end].iter().collect();
    ABBREVIATIONS.contains(&word.as_str())
}
