use std::collections::HashMap;

use crate::text::Sentence;
use crate::word_align::TranslationLexicon;

/// Similarity of a candidate sentence pair, in `[0, 1]`.
pub trait PairScorer: Sync {
    fn score(&self, source: &Sentence, target: &Sentence) -> f64;
}

impl<F> PairScorer for F
where
    F: Fn(&Sentence, &Sentence) -> f64 + Sync,
{
    fn score(&self, source: &Sentence, target: &Sentence) -> f64 {
        self(source, target)
    }
}

/// Lexicon-coverage scorer: see [`score_pair`].
#[derive(Debug, Clone, Copy)]
pub struct LexiconScorer<'a> {
    pub lexicon: &'a TranslationLexicon,
    pub min_prob: f64,
}

impl PairScorer for LexiconScorer<'_> {
    fn score(&self, source: &Sentence, target: &Sentence) -> f64 {
        score_pair(self.lexicon, source, target, self.min_prob)
    }
}

/// Harmonic mean of source and target coverage, times the length ratio.
///
/// A source token is covered when some target token is one of its lexicon
/// translations with `t(target | source) >= min_prob`, or is literally the
/// same string (numbers, names, punctuation); a target token is covered when
/// some source token covers it.
pub fn score_pair(lexicon: &TranslationLexicon, source: &Sentence, target: &Sentence, min_prob: f64) -> f64 {
    if source.is_empty() || target.is_empty() {
        return 0.0;
    }
    let mut positions: HashMap<&str, Vec<usize>> = HashMap::with_capacity(target.len());
    for (j, f) in target.tokens().iter().enumerate() {
        positions.entry(f.as_str()).or_default().push(j);
    }
    let mut target_covered = vec![false; target.len()];
    let mut source_covered = 0usize;

    for e in source.tokens() {
        let mut covered = false;
        if let Some(js) = positions.get(e.as_str()) {
            covered = true;
            for &j in js {
                target_covered[j] = true;
            }
        }
        for (f, p) in lexicon.translations(e) {
            if p < min_prob {
                break;
            }
            if let Some(js) = positions.get(f) {
                covered = true;
                for &j in js {
                    target_covered[j] = true;
                }
            }
        }
        if covered {
            source_covered += 1;
        }
    }

    let cs = source_covered as f64 / source.len() as f64;
    let ct = target_covered.iter().filter(|&&c| c).count() as f64 / target.len() as f64;
    if cs + ct == 0.0 {
        return 0.0;
    }
    let harmonic = 2.0 * cs * ct / (cs + ct);
    let (a, b) = (source.len() as f64, target.len() as f64);
    harmonic * a.min(b) / a.max(b)
}
