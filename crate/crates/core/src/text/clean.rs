use std::collections::HashSet;

use super::{ParallelCorpus, Sentence, SentencePair};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleaningConfig {
    /// Largest allowed ratio between the longer and the shorter side, in tokens.
    pub max_ratio: f64,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig { max_ratio: 4.0 }
    }
}

/// Counts of what `clean_parallel` kept and why it dropped the rest.
///
/// Each dropped pair is attributed to exactly one reason: the first that
/// applies in the order duplicate, length ratio, empty side or control
/// character.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CleaningReport {
    pub input_pairs: usize,
    pub kept_pairs: usize,
    pub dropped_duplicates: usize,
    pub dropped_length_ratio: usize,
    pub dropped_empty_or_control: usize,
}

impl CleaningReport {
    pub fn dropped(&self) -> usize {
        self.dropped_duplicates + self.dropped_length_ratio + self.dropped_empty_or_control
    }

    pub fn to_key_values(&self) -> String {
        format!(
            "input_pairs={}\nkept_pairs={}\ndropped_duplicates={}\ndropped_length_ratio={}\ndropped_empty_or_control={}\n",
            self.input_pairs,
            self.kept_pairs,
            self.dropped_duplicates,
            self.dropped_length_ratio,
            self.dropped_empty_or_control
        )
    }
}

fn has_control(s: &Sentence) -> bool {
    s.raw().chars().any(char::is_control)
}

fn ratio_exceeded(pair: &SentencePair, max_ratio: f64) -> bool {
    let (a, b) = (pair.source.len(), pair.target.len());
    if a == 0 || b == 0 {
        return false;
    }
    let (lo, hi) = (a.min(b) as f64, a.max(b) as f64);
    hi / lo > max_ratio
}

/// Remove duplicate, badly length-matched, empty and control-character pairs.
/// Kept pairs retain their relative order.
pub fn clean_parallel(corpus: &ParallelCorpus, config: &CleaningConfig) -> (ParallelCorpus, CleaningReport) {
    let mut seen: HashSet<(&[String], &[String])> = HashSet::with_capacity(corpus.len());
    let mut report = CleaningReport {
        input_pairs: corpus.len(),
        ..Default::default()
    };
    let mut kept = Vec::new();

    for pair in &corpus.pairs {
        let key = (pair.source.tokens(), pair.target.tokens());
        if !seen.insert(key) {
            report.dropped_duplicates += 1;
        } else if ratio_exceeded(pair, config.max_ratio) {
            report.dropped_length_ratio += 1;
        } else if pair.source.is_empty()
            || pair.target.is_empty()
            || has_control(&pair.source)
            || has_control(&pair.target)
        {
            report.dropped_empty_or_control += 1;
        } else {
            kept.push(pair.clone());
        }
    }
    report.kept_pairs = kept.len();
    (ParallelCorpus::new(kept), report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::TokenizationProfile;
    use proptest::prelude::*;

    fn corpus(pairs: &[(&str, &str)]) -> ParallelCorpus {
        ParallelCorpus::from_raw(pairs, TokenizationProfile::default())
    }

    #[test]
    fn drops_exact_duplicates() {
        let (out, r) = clean_parallel(&corpus(&[("a b", "x y"), ("a b", "x y")]), &Default::default());
        assert_eq!(out.len(), 1);
        assert_eq!(r.kept_pairs, 1);
        assert_eq!(r.dropped_duplicates, 1);
    }

    #[test]
    fn drops_length_ratio() {
        let (out, r) = clean_parallel(&corpus(&[("a", "x x x x x x x x x")]), &Default::default());
        assert!(out.is_empty());
        assert_eq!(r.dropped_length_ratio, 1);
    }

    #[test]
    fn ratio_exactly_at_limit_is_kept() {
        let (out, _) = clean_parallel(&corpus(&[("a", "x x x x")]), &Default::default());
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn drops_empty_side() {
        let (out, r) = clean_parallel(&corpus(&[("a b", "")]), &Default::default());
        assert!(out.is_empty());
        assert_eq!(r.dropped_empty_or_control, 1);
    }

    #[test]
    fn drops_control_characters() {
        let (out, r) = clean_parallel(&corpus(&[("a\u{0007}b", "x y"), ("c", "z")]), &Default::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out.pairs[0].source.raw(), "c");
        assert_eq!(r.dropped_empty_or_control, 1);
    }

    fn arb_corpus() -> impl Strategy<Value = ParallelCorpus> {
        let side = prop_oneof![Just(String::new()), "[ab ]{0,6}", "[abc]( [abc]){0,9}", "[ab]\u{0001}",];
        prop::collection::vec((side.clone(), side), 0..30).prop_map(|v| {
            let refs: Vec<(&str, &str)> = v.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            corpus(&refs)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn report_counts_sum_to_input(c in arb_corpus()) {
            let (out, r) = clean_parallel(&c, &Default::default());
            prop_assert_eq!(r.kept_pairs + r.dropped(), r.input_pairs);
            prop_assert_eq!(out.len(), r.kept_pairs);
        }

        #[test]
        fn cleaning_is_idempotent(c in arb_corpus()) {
            let (once, _) = clean_parallel(&c, &Default::default());
            let (twice, r) = clean_parallel(&once, &Default::default());
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(r.dropped(), 0);
        }
    }
}
