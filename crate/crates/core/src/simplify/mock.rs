//! Rule-based offline rewriter used in place of a remote language model.
//!
//! Three passes, in order: glossary substitution of jargon, splitting of long
//! sentences at a coordinating conjunction, and a fixed lead-in prefix.

use crate::error::SimplifyError;
use crate::textseg::{segment_sentences, tokenize_words};

pub const MOCK_PREFIX: &str = "Your chest X-ray shows: ";

/// Sentences longer than this many words are split.
pub const MAX_SENTENCE_WORDS: usize = 15;
/// A split point must come after this many words.
const MIN_SPLIT_WORD: usize = 8;

const CONJUNCTIONS: [&str; 7] = ["for", "and", "nor", "but", "or", "yet", "so"];

/// Jargon term (lowercase) and its plain-language replacement.
pub const GLOSSARY: &[(&str, &str)] = &[
    ("acute cardiopulmonary abnormality", "new heart or lung problem"),
    ("acute cardiopulmonary process", "new heart or lung problem"),
    ("airspace disease", "lung infection or fluid"),
    ("atelectasis", "partly collapsed lung"),
    ("atherosclerotic calcification", "hard buildup in the blood vessels"),
    ("bilateral", "on both sides"),
    ("bilaterally", "on both sides"),
    ("calcified granuloma", "old healed spot"),
    ("cardiac silhouette", "heart outline"),
    ("cardiomediastinal silhouette", "heart and mid chest outline"),
    ("cardiomegaly", "an enlarged heart"),
    ("chronic obstructive pulmonary disease", "long-term lung disease"),
    ("clinical correlation is recommended", "your doctor should check this"),
    ("consolidation", "dense area in the lung"),
    ("costophrenic angle", "lung corner"),
    ("costophrenic angles", "lung corners"),
    ("degenerative changes", "wear and tear"),
    ("degenerative", "worn"),
    ("demonstrate", "show"),
    ("demonstrated", "seen"),
    ("dextroconvex", "right-bending"),
    ("emphysema", "damaged air sacs"),
    ("examination", "exam"),
    ("granuloma", "old healed spot"),
    ("hemidiaphragm", "breathing muscle"),
    ("hemidiaphragms", "breathing muscles"),
    ("hyperinflated", "too full of air"),
    ("identified", "seen"),
    ("infectious process", "infection"),
    ("infiltrate", "hazy spot"),
    ("interstitial edema", "fluid in the lung tissue"),
    ("interstitial markings", "lung lines"),
    ("interval change", "change since the last X-ray"),
    ("lymphadenopathy", "swollen lymph nodes"),
    ("mediastinal contours", "mid chest outline"),
    ("multilevel", "many-level"),
    ("opacities", "cloudy areas"),
    ("opacity", "cloudy area"),
    ("osseous structures", "bones"),
    ("parenchymal", "lung"),
    ("perihilar", "near the lung roots"),
    ("pleural effusion", "fluid around the lungs"),
    ("pleural effusions", "fluid around the lungs"),
    ("pneumonia", "lung infection"),
    ("pneumothorax", "a collapsed lung"),
    ("posteroanterior", "front to back"),
    ("postoperative", "after surgery"),
    ("pulmonary edema", "fluid in the lungs"),
    ("pulmonary vascular congestion", "extra blood in the lung vessels"),
    ("pulmonary vasculature", "lung blood vessels"),
    ("pulmonary", "lung"),
    ("radiograph", "X-ray"),
    ("radiographs", "X-rays"),
    ("radiography", "X-rays"),
    ("redemonstrated", "seen again"),
    ("scoliosis", "curved spine"),
    ("sternotomy wires", "wires from past chest surgery"),
    ("subsegmental", "small"),
    ("thoracic spine", "upper back bones"),
    ("tortuous aorta", "curvy main blood vessel"),
    ("unremarkable", "normal"),
    ("visualized", "seen"),
    ("within normal limits", "normal"),
];

/// Applies the three rewrite passes. Deterministic and side-effect free.
pub fn mock_simplify(text: &str) -> Result<String, SimplifyError> {
    if text.trim().is_empty() {
        return Err(SimplifyError::EmptyReport(String::new()));
    }
    let substituted = substitute_glossary(text);
    let split = split_long_sentences(&substituted);
    Ok(format!("{MOCK_PREFIX}{split}"))
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b >= 0x80
}

/// Sentence start: preceded only by whitespace back to a terminator, and not
/// the very beginning of the text.
fn starts_later_sentence(text: &str, at: usize) -> bool {
    let before = text[..at].trim_end();
    !before.is_empty() && before.ends_with(['.', '!', '?'])
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Replaces glossary terms, longest match first, on whole-word boundaries.
/// Replacements are lowercase unless they open a sentence after the first.
pub fn substitute_glossary(text: &str) -> String {
    let mut terms: Vec<&(&str, &str)> = GLOSSARY.iter().collect();
    terms.sort_by_key(|(term, _)| std::cmp::Reverse(term.len()));

    let lower = text.to_ascii_lowercase();
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    let mut copied_from = 0;
    while i < bytes.len() {
        let at_boundary = i == 0 || !is_word_byte(bytes[i - 1]);
        let hit = if at_boundary {
            terms.iter().find(|(term, _)| {
                lower[i..].starts_with(term) && bytes.get(i + term.len()).is_none_or(|b| !is_word_byte(*b))
            })
        } else {
            None
        };
        match hit {
            Some((term, phrase)) => {
                out.push_str(&text[copied_from..i]);
                let capital = bytes[i].is_ascii_uppercase() && starts_later_sentence(text, i);
                if capital {
                    out.push_str(&capitalize(phrase));
                } else {
                    out.push_str(phrase);
                }
                i += term.len();
                copied_from = i;
            }
            None => {
                i += 1;
                while i < bytes.len() && !text.is_char_boundary(i) {
                    i += 1;
                }
            }
        }
    }
    out.push_str(&text[copied_from..]);
    out
}

/// Splits every sentence longer than [`MAX_SENTENCE_WORDS`] words at the first
/// coordinating conjunction after word [`MIN_SPLIT_WORD`], repeatedly.
pub fn split_long_sentences(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 16);
    let mut copied_from = 0;
    for span in segment_sentences(text) {
        out.push_str(&text[copied_from..span.start]);
        out.push_str(&split_sentence(span.slice(text)));
        copied_from = span.end;
    }
    out.push_str(&text[copied_from..]);
    out
}

fn split_sentence(sentence: &str) -> String {
    let words = tokenize_words(sentence);
    if words.len() <= MAX_SENTENCE_WORDS {
        return sentence.to_string();
    }
    let split_at = words
        .iter()
        .enumerate()
        .skip(MIN_SPLIT_WORD)
        .find(|(_, w)| CONJUNCTIONS.contains(&w.text.to_ascii_lowercase().as_str()))
        .map(|(_, w)| w);
    let Some(conj) = split_at else {
        return sentence.to_string();
    };

    let head = sentence[..conj.start].trim_end().trim_end_matches([',', ';', ':']).trim_end();
    let tail = &sentence[conj.start..];
    format!("{head}. {}", split_sentence(&capitalize(tail)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glossary_is_large_enough_and_lowercase() {
        assert!(GLOSSARY.len() >= 30);
        for (term, _) in GLOSSARY {
            assert_eq!(*term, term.to_lowercase());
        }
        let mut terms: Vec<_> = GLOSSARY.iter().map(|(t, _)| t).collect();
        terms.sort();
        terms.dedup();
        assert_eq!(terms.len(), GLOSSARY.len());
    }

    #[test]
    fn cardiomegaly_example() {
        assert_eq!(
            mock_simplify("Cardiomegaly is present.").unwrap(),
            "Your chest X-ray shows: an enlarged heart is present."
        );
    }

    #[test]
    fn fallthrough_is_prefix_only() {
        let text = "Heart size is normal. Lungs are clear.";
        assert_eq!(mock_simplify(text).unwrap(), format!("{MOCK_PREFIX}{text}"));
    }

    #[test]
    fn deterministic() {
        let text = "Small left pleural effusion with bibasilar atelectasis and mild cardiomegaly.";
        assert_eq!(mock_simplify(text).unwrap(), mock_simplify(text).unwrap());
    }

    #[test]
    fn empty_input_errors() {
        assert!(mock_simplify("").is_err());
        assert!(mock_simplify("  \n").is_err());
    }

    #[test]
    fn longest_term_wins_and_boundaries_hold() {
        assert_eq!(substitute_glossary("Bilateral pleural effusions."), "on both sides fluid around the lungs.");
        // "pulmonary" inside a longer word is left alone
        assert_eq!(substitute_glossary("cardiopulmonaryx"), "cardiopulmonaryx");
        assert_eq!(substitute_glossary("No pneumothorax."), "No a collapsed lung.");
    }

    #[test]
    fn later_sentence_starts_are_capitalized() {
        assert_eq!(
            substitute_glossary("Lungs clear. Cardiomegaly noted."),
            "Lungs clear. An enlarged heart noted."
        );
    }

    #[test]
    fn long_sentence_split_at_conjunction() {
        let text = "There is a small left sided effusion at the base of the lung, and there is a mild \
                    haziness over the right upper zone.";
        assert_eq!(tokenize_words(text).len(), 24);
        let out = split_long_sentences(text);
        assert_eq!(
            out,
            "There is a small left sided effusion at the base of the lung. And there is a mild \
             haziness over the right upper zone."
        );
    }

    #[test]
    fn conjunction_too_early_is_skipped() {
        // "and" is word 3, the next conjunction "or" is word 12
        let text = "Heart and lungs look the same as the last film from today or perhaps yesterday afternoon too.";
        assert!(tokenize_words(text).len() > MAX_SENTENCE_WORDS);
        let out = split_long_sentences(text);
        assert_eq!(out, "Heart and lungs look the same as the last film from today. Or perhaps yesterday afternoon too.");
    }

    #[test]
    fn short_or_conjunctionless_sentences_unchanged() {
        let text = "One two three four five six seven eight nine ten eleven twelve thirteen fourteen fifteen sixteen.";
        assert_eq!(split_long_sentences(text), text);
        assert_eq!(split_long_sentences("Short and sweet."), "Short and sweet.");
    }
}
