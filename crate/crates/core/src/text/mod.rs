//! Sentences, documents and parallel corpora, plus the rule-based tokenizer
//! every other stage relies on.

mod clean;
mod stats;
mod ted;

pub use clean::{clean_parallel, CleaningConfig, CleaningReport};
pub use stats::{corpus_stats, parallel_stats, CorpusStats, ParallelStats};
pub use ted::{ingest_ted_xml, Diagnostic, TedIngest};

/// Tokenizer settings. Lowercasing is on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizationProfile {
    pub lowercase: bool,
}

impl Default for TokenizationProfile {
    fn default() -> Self {
        TokenizationProfile { lowercase: true }
    }
}

/// A raw line of text together with its tokens.
///
/// The tokens are always the output of [`tokenize`] on `raw`; the fields are
/// private so that the two cannot drift apart.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    raw: String,
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new(raw: impl Into<String>, profile: TokenizationProfile) -> Self {
        let raw = raw.into();
        let tokens = tokenize(&raw, profile);
        Sentence { raw, tokens }
    }

    /// Shorthand for a sentence tokenized with the default profile.
    pub fn parse(raw: &str) -> Self {
        Sentence::new(raw, TokenizationProfile::default())
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Document {
            id: id.into(),
            sentences,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SentencePair {
    pub source: Sentence,
    pub target: Sentence,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub pairs: Vec<SentencePair>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<SentencePair>) -> Self {
        ParallelCorpus { pairs }
    }

    pub fn from_raw<S: AsRef<str>>(pairs: &[(S, S)], profile: TokenizationProfile) -> Self {
        ParallelCorpus {
            pairs: pairs
                .iter()
                .map(|(s, t)| SentencePair {
                    source: Sentence::new(s.as_ref(), profile),
                    target: Sentence::new(t.as_ref(), profile),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|p| &p.source)
    }

    pub fn targets(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|p| &p.target)
    }

    /// The same pairs with source and target exchanged.
    pub fn swapped(&self) -> ParallelCorpus {
        ParallelCorpus {
            pairs: self
                .pairs
                .iter()
                .map(|p| SentencePair {
                    source: p.target.clone(),
                    target: p.source.clone(),
                })
                .collect(),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

fn is_combining_mark(c: char) -> bool {
    matches!(c,
        '\u{0300}'..='\u{036F}'
        | '\u{1AB0}'..='\u{1AFF}'
        | '\u{1DC0}'..='\u{1DFF}'
        | '\u{20D0}'..='\u{20FF}'
        | '\u{FE20}'..='\u{FE2F}')
}

fn is_word_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{02BC}' | '-' | '\u{2010}' | '\u{2011}')
}

fn is_digit_separator(c: char) -> bool {
    matches!(c, '.' | ',')
}

/// Split `raw` into tokens.
///
/// Whitespace separates tokens. Inside a whitespace-delimited chunk every
/// character that is neither a letter, digit nor combining mark becomes a
/// token of its own, except apostrophes and hyphens between two word
/// characters, and `.`/`,` between two digits, which stay inside the word.
pub fn tokenize(raw: &str, profile: TokenizationProfile) -> Vec<String> {
    let lowered;
    let text = if profile.lowercase {
        lowered = raw.to_lowercase();
        lowered.as_str()
    } else {
        raw
    };

    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut word = String::new();
        let mut last: Option<char> = None;
        for (i, &c) in chars.iter().enumerate() {
            let next = chars.get(i + 1).copied();
            let keep = if is_word_char(c) {
                true
            } else if let (Some(prev), Some(next)) = (last, next) {
                (is_word_joiner(c) && is_word_char(prev) && is_word_char(next))
                    || (is_digit_separator(c) && prev.is_numeric() && next.is_numeric())
            } else {
                false
            };
            if keep {
                word.push(c);
                last = Some(c);
            } else {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(c.to_string());
                last = None;
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    tokens
}
