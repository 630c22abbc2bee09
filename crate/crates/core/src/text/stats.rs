use std::collections::HashSet;
use std::fmt;

use super::{ParallelCorpus, Sentence};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub sentences: usize,
    pub tokens: usize,
    /// Number of distinct token forms.
    pub unique: usize,
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sentences={}\ntokens={}\nunique={}",
            self.sentences, self.tokens, self.unique
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParallelStats {
    pub source: CorpusStats,
    pub target: CorpusStats,
}

impl fmt::Display for ParallelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.source;
        let t = &self.target;
        write!(
            f,
            "source.sentences={}\nsource.tokens={}\nsource.unique={}\n\
             target.sentences={}\ntarget.tokens={}\ntarget.unique={}",
            s.sentences, s.tokens, s.unique, t.sentences, t.tokens, t.unique
        )
    }
}

pub fn corpus_stats<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> CorpusStats {
    let mut forms: HashSet<&str> = HashSet::new();
    let mut stats = CorpusStats::default();
    for s in sentences {
        stats.sentences += 1;
        stats.tokens += s.len();
        forms.extend(s.tokens().iter().map(String::as_str));
    }
    stats.unique = forms.len();
    stats
}

pub fn parallel_stats(corpus: &ParallelCorpus) -> ParallelStats {
    ParallelStats {
        source: corpus_stats(corpus.sources()),
        target: corpus_stats(corpus.targets()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_corpus() {
        assert_eq!(corpus_stats(&[]), CorpusStats::default());
        assert_eq!(parallel_stats(&ParallelCorpus::default()), ParallelStats::default());
    }

    #[test]
    fn counts_unique_forms() {
        let s = [Sentence::parse("a b a")];
        assert_eq!(
            corpus_stats(&s),
            CorpusStats {
                sentences: 1,
                tokens: 3,
                unique: 2
            }
        );
    }

    proptest! {
        #[test]
        fn unique_never_exceeds_tokens(lines in prop::collection::vec("[a-d ,.]{0,12}", 0..20)) {
            let sentences: Vec<Sentence> = lines.iter().map(|l| Sentence::parse(l)).collect();
            let st = corpus_stats(&sentences);
            prop_assert!(st.unique <= st.tokens);
        }
    }
}
