//! Seeded toy bilingual data: a word-for-word "language pair", in-domain
//! (talk) and general text, noisy parallel corpora and comparable document
//! pairs with known sentence links.
//!
//! Everything is a pure function of the seed, so fixtures and the demo are
//! reproducible byte for byte.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mine::{DocumentPair, GoldDocument};
use crate::text::{Document, Sentence};
use crate::word_align::TranslationLexicon;

const SOURCE_ONSETS: &str = "bdfgklmnprstvz";
const TARGET_ONSETS: &str = "chjqwxy";
const VOWELS: &str = "aeiou";

fn syllable(onsets: &str, k: usize) -> String {
    let c = onsets.as_bytes()[k / VOWELS.len() % onsets.len()] as char;
    let v = VOWELS.as_bytes()[k % VOWELS.len()] as char;
    format!("{c}{v}")
}

/// Two syllables; the first onset alphabet decides the language, so source
/// and target words never collide.
fn word(onsets: &str, k: usize) -> String {
    let first = onsets.len() * VOWELS.len();
    let all = SOURCE_ONSETS.len() * VOWELS.len();
    let mut w = syllable(onsets, k % first);
    let rest = k / first;
    w.push_str(&syllable(SOURCE_ONSETS, rest % all));
    if rest >= all {
        w.push_str(&syllable(SOURCE_ONSETS, rest / all - 1));
    }
    w
}

/// Which part of the vocabulary a sentence draws its content words from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Talk-like text over the topic vocabulary.
    InDomain,
    General,
    /// Encyclopedic text mixing both.
    Mixed,
}

/// A toy language pair with a one-to-one dictionary.
#[derive(Debug, Clone)]
pub struct World {
    source: Vec<String>,
    target: Vec<String>,
    function_words: usize,
    topic_words: usize,
}

/// Content sentence length range (inclusive).
const MIN_LEN: usize = 5;
const MAX_LEN: usize = 12;

impl World {
    pub fn new(function_words: usize, topic_words: usize, general_words: usize) -> Self {
        let n = function_words + topic_words + general_words;
        World {
            source: (0..n).map(|k| word(SOURCE_ONSETS, k)).collect(),
            target: (0..n).map(|k| word(TARGET_ONSETS, k)).collect(),
            function_words,
            topic_words,
        }
    }

    /// The default world used by the demo and the test fixtures.
    pub fn standard() -> Self {
        World::new(20, 120, 300)
    }

    pub fn source_words(&self) -> &[String] {
        &self.source
    }

    pub fn target_words(&self) -> &[String] {
        &self.target
    }

    pub fn translate_word(&self, source: &str) -> Option<&str> {
        self.source
            .iter()
            .position(|w| w == source)
            .map(|i| self.target[i].as_str())
    }

    /// The true dictionary as a lexicon with probability 1 per entry.
    pub fn dictionary(&self) -> TranslationLexicon {
        TranslationLexicon::from_entries(
            self.source
                .iter()
                .zip(&self.target)
                .map(|(s, t)| (s.clone(), t.clone(), 1.0)),
        )
    }

    fn range(&self, domain: Domain) -> (usize, usize) {
        let topic = (self.function_words, self.function_words + self.topic_words);
        let general = (topic.1, self.source.len());
        match domain {
            Domain::InDomain => topic,
            Domain::General => general,
            Domain::Mixed => (topic.0, general.1),
        }
    }

    /// Word indices of one sentence: Zipf-weighted content words with a
    /// function word roughly every third position.
    pub fn sentence_ids(&self, rng: &mut ChaCha8Rng, domain: Domain) -> Vec<usize> {
        let (lo, hi) = self.range(domain);
        let zipf = |n: usize| WeightedIndex::new((1..=n).map(|r| 1.0 / r as f64)).expect("non-empty vocabulary");
        let content = zipf(hi - lo);
        let function = zipf(self.function_words.max(1));
        let len = rng.gen_range(MIN_LEN..=MAX_LEN);
        (0..len)
            .map(|_| {
                if self.function_words > 0 && rng.gen_bool(0.3) {
                    function.sample(rng)
                } else {
                    lo + content.sample(rng)
                }
            })
            .collect()
    }

    pub fn source_text(&self, ids: &[usize]) -> String {
        ids.iter()
            .map(|&i| self.source[i].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Word-for-word translation with light noise: adjacent swaps and
    /// dropped words.
    pub fn target_text(&self, ids: &[usize], rng: &mut ChaCha8Rng, noise: f64) -> String {
        let mut out: Vec<usize> = ids.iter().copied().filter(|_| !rng.gen_bool(noise / 2.0)).collect();
        if out.is_empty() {
            out.push(ids[0]);
        }
        for k in 1..out.len() {
            if rng.gen_bool(noise) {
                out.swap(k - 1, k);
            }
        }
        out.iter()
            .map(|&i| self.target[i].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// `n` noisy sentence pairs of one domain.
    pub fn parallel(&self, rng: &mut ChaCha8Rng, domain: Domain, n: usize, noise: f64) -> Vec<(String, String)> {
        (0..n)
            .map(|_| {
                let ids = self.sentence_ids(rng, domain);
                (self.source_text(&ids), self.target_text(&ids, rng, noise))
            })
            .collect()
    }

    pub fn monolingual_target(&self, rng: &mut ChaCha8Rng, domain: Domain, n: usize) -> Vec<String> {
        (0..n)
            .map(|_| {
                let ids = self.sentence_ids(rng, domain);
                self.target_text(&ids, rng, 0.0)
            })
            .collect()
    }

    /// A comparable document pair: each source sentence has a translation in
    /// the target document with probability `parallel_rate` (kept in order),
    /// and both sides get unrelated filler sentences. Returns the pair and the
    /// true links.
    pub fn comparable_pair(
        &self,
        rng: &mut ChaCha8Rng,
        id: &str,
        sentences: usize,
        parallel_rate: f64,
    ) -> GoldDocument {
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        let mut links = BTreeSet::new();
        for _ in 0..sentences {
            let ids = self.sentence_ids(rng, Domain::Mixed);
            src.push(Sentence::parse(&self.source_text(&ids)));
            if rng.gen_bool(parallel_rate) {
                links.insert((src.len() - 1, tgt.len()));
                tgt.push(Sentence::parse(&self.target_text(&ids, rng, 0.05)));
            }
            if rng.gen_bool(0.3) {
                let other = self.sentence_ids(rng, Domain::Mixed);
                tgt.push(Sentence::parse(&self.target_text(&other, rng, 0.0)));
            }
        }
        GoldDocument {
            pair: DocumentPair {
                source: Document::new(id, src),
                target: Document::new(id, tgt),
            },
            links,
        }
    }

    pub fn comparable_collection(&self, seed: u64, n: usize, sentences: usize) -> Vec<GoldDocument> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|k| self.comparable_pair(&mut rng, &format!("doc{k:04}"), sentences, 0.5))
            .collect()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Render talks as IWSLT-style XML: one `<talk id>` per talk, one `<seg>`
/// per line.
pub fn ted_xml(talks: &[(String, Vec<String>)]) -> String {
    let mut out = String::from("<mteval>\n");
    for (id, segs) in talks {
        let _ = writeln!(out, "  <talk id=\"{id}\">");
        for (k, s) in segs.iter().enumerate() {
            let _ = writeln!(out, "    <seg id=\"{}\">{s}</seg>", k + 1);
        }
        out.push_str("  </talk>\n");
    }
    out.push_str("</mteval>\n");
    out
}
