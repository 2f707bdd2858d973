//! Sentence, word, syllable and character counting.
//!
//! Everything here is a pure function of its input. The counts produced by
//! [`text_stats`] are the raw quantities consumed by the readability formulas:
//! words, sentences, syllables, complex words and alphanumeric characters.

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::error::TextError;

/// Abbreviations that do not end a sentence when followed by a period.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &["Dr", "Mr", "Mrs", "Ms", "St", "vs", "e.g", "i.e", "No", "Fig"];

/// Syllable count at or above which a word is complex.
pub const COMPLEX_SYLLABLES: usize = 3;

/// A word matched in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// Byte offset of the first byte.
    pub start: usize,
    /// Byte offset one past the last byte.
    pub end: usize,
}

/// Byte range of one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub start: usize,
    pub end: usize,
}

impl SentenceSpan {
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

/// Raw counts feeding the readability formulas.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStats {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub complex_words: usize,
    /// Letters and digits only.
    pub characters: usize,
}

impl std::ops::Add for TokenStats {
    type Output = TokenStats;

    fn add(self, rhs: TokenStats) -> TokenStats {
        TokenStats {
            words: self.words + rhs.words,
            sentences: self.sentences + rhs.sentences,
            syllables: self.syllables + rhs.syllables,
            complex_words: self.complex_words + rhs.complex_words,
            characters: self.characters + rhs.characters,
        }
    }
}

/// Sentence splitter configuration.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: Vec<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Self::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl Segmenter {
    /// Builds a segmenter with a custom abbreviation list. Entries are matched
    /// case-insensitively and without their trailing period.
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            abbreviations: abbreviations
                .into_iter()
                .map(|a| a.as_ref().trim_end_matches('.').to_lowercase())
                .collect(),
        }
    }

    fn is_abbreviation(&self, chunk: &str) -> bool {
        let stem = chunk
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .trim_end_matches('.')
            .to_lowercase();
        !stem.is_empty() && self.abbreviations.contains(&stem)
    }

    /// Splits `text` into sentence spans.
    ///
    /// A whitespace-delimited chunk whose last non-closing character is `.`,
    /// `!` or `?` ends the current sentence, unless the terminator is a period
    /// attached to a known abbreviation.
    pub fn segment(&self, text: &str) -> Vec<SentenceSpan> {
        let mut spans = Vec::new();
        let mut open: Option<usize> = None;
        let mut last_end = 0;

        for (start, chunk) in whitespace_chunks(text) {
            let end = start + chunk.len();
            let span_start = *open.get_or_insert(start);
            last_end = end;
            if self.closes_sentence(chunk) {
                spans.push(SentenceSpan { start: span_start, end });
                open = None;
            }
        }
        if let Some(start) = open {
            spans.push(SentenceSpan { start, end: last_end });
        }
        spans
    }

    fn closes_sentence(&self, chunk: &str) -> bool {
        let body = chunk.trim_end_matches(['"', '\'', ')', ']', '\u{201D}', '\u{2019}']);
        match body.chars().last() {
            Some('!') | Some('?') => true,
            Some('.') => !self.is_abbreviation(body),
            _ => false,
        }
    }
}

/// Maximal runs of non-whitespace, with their byte offsets.
fn whitespace_chunks(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = text;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let skip = rest.len() - rest.trim_start().len();
        offset += skip;
        rest = &rest[skip..];
        if rest.is_empty() {
            return None;
        }
        let len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let item = (offset, &rest[..len]);
        offset += len;
        rest = &rest[len..];
        Some(item)
    })
}

/// Splits text into sentences with the default abbreviation list.
pub fn segment_sentences(text: &str) -> Vec<SentenceSpan> {
    Segmenter::default().segment(text)
}

/// True for characters in one of the Unicode letter categories.
pub fn is_letter(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::UppercaseLetter
            | GeneralCategory::LowercaseLetter
            | GeneralCategory::TitlecaseLetter
            | GeneralCategory::ModifierLetter
            | GeneralCategory::OtherLetter
    )
}

/// True for decimal digits.
pub fn is_digit(c: char) -> bool {
    get_general_category(c) == GeneralCategory::DecimalNumber
}

fn is_word_char(c: char) -> bool {
    is_letter(c) || is_digit(c)
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

/// Word tokens: maximal alphanumeric runs, where a single apostrophe or
/// hyphen between two alphanumeric runs keeps them in one token.
pub fn tokenize_words(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !is_word_char(chars[i].1) {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i;
        loop {
            while j < chars.len() && is_word_char(chars[j].1) {
                j += 1;
            }
            let joined = j + 1 < chars.len() && is_joiner(chars[j].1) && is_word_char(chars[j + 1].1);
            if joined {
                j += 1;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        tokens.push(Token { text: text[start..end].to_string(), start, end });
        i = j;
    }
    tokens
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic syllable count: vowel groups, less a silent final `e`.
///
/// A word ending in consonant + `e` loses one syllable unless it ends in
/// consonant + `le` ("table"). The result is never below 1.
pub fn count_syllables(word: &str) -> Result<usize, TextError> {
    if !word.chars().any(is_letter) {
        return Err(TextError::NoLetters(word.to_string()));
    }
    let lower: Vec<char> = word.to_lowercase().chars().filter(|c| is_letter(*c)).collect();

    let mut groups: usize = 0;
    let mut in_group = false;
    for &c in &lower {
        let vowel = is_vowel(c);
        if vowel && !in_group {
            groups += 1;
        }
        in_group = vowel;
    }

    let n = lower.len();
    if n >= 2 && lower[n - 1] == 'e' && !is_vowel(lower[n - 2]) {
        let consonant_le = n >= 3 && lower[n - 2] == 'l' && !is_vowel(lower[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    Ok(groups.max(1))
}

/// Whether a word has at least [`COMPLEX_SYLLABLES`] syllables.
pub fn is_complex(word: &str) -> Result<bool, TextError> {
    Ok(count_syllables(word)? >= COMPLEX_SYLLABLES)
}

/// Counts for a whole text with the default segmenter.
pub fn text_stats(text: &str) -> TokenStats {
    text_stats_with(&Segmenter::default(), text)
}

/// Counts for a whole text. Input is NFC-normalized first.
///
/// Tokens without any letter (plain numbers) count one syllable and are never
/// complex. Sentences holding no word are not counted.
pub fn text_stats_with(segmenter: &Segmenter, text: &str) -> TokenStats {
    let text: String = text.nfc().collect();
    let tokens = tokenize_words(&text);
    if tokens.is_empty() {
        return TokenStats::default();
    }

    let mut stats = TokenStats { words: tokens.len(), ..TokenStats::default() };
    for token in &tokens {
        let syllables = count_syllables(&token.text).unwrap_or(1);
        stats.syllables += syllables;
        if syllables >= COMPLEX_SYLLABLES {
            stats.complex_words += 1;
        }
        stats.characters += token.text.chars().filter(|c| is_word_char(*c)).count();
    }

    let spans = segmenter.segment(&text);
    let mut next = tokens.iter().peekable();
    for span in &spans {
        let mut has_word = false;
        while let Some(t) = next.peek() {
            if t.start >= span.end {
                break;
            }
            has_word = true;
            next.next();
        }
        if has_word {
            stats.sentences += 1;
        }
    }
    stats
}
