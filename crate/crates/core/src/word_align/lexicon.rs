use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Source-side placeholder that absorbs target words with no counterpart.
/// `<` is always split off by the tokenizer, so this can never collide with
/// a real token.
pub const NULL_WORD: &str = "<null>";

/// Word translation table `t(target | source)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationLexicon {
    sources: Vec<String>,
    source_index: HashMap<String, u32>,
    targets: Vec<String>,
    target_index: HashMap<String, u32>,
    /// Per source word, `(target id, prob)` sorted by descending probability
    /// and then by target word.
    rows: Vec<Vec<(u32, f64)>>,
    lookup: HashMap<(u32, u32), f64>,
}

impl TranslationLexicon {
    /// Build a lexicon from `(source, target, prob)` triples. Later
    /// duplicates overwrite earlier ones.
    pub fn from_entries<I, S, T>(entries: I) -> TranslationLexicon
    where
        I: IntoIterator<Item = (S, T, f64)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut triples: HashMap<(String, String), f64> = HashMap::new();
        for (s, t, p) in entries {
            triples.insert((s.into(), t.into()), p);
        }
        let sources: BTreeSet<&String> = triples.keys().map(|(s, _)| s).collect();
        let targets: BTreeSet<&String> = triples.keys().map(|(_, t)| t).collect();
        let sources: Vec<String> = sources.into_iter().cloned().collect();
        let targets: Vec<String> = targets.into_iter().cloned().collect();
        let source_index = index_of(&sources);
        let target_index = index_of(&targets);
        let mut lookup = HashMap::with_capacity(triples.len());
        for ((s, t), p) in &triples {
            lookup.insert((source_index[s], target_index[t]), *p);
        }
        TranslationLexicon::assemble(sources, source_index, targets, target_index, lookup)
    }

    pub(crate) fn assemble(
        sources: Vec<String>,
        source_index: HashMap<String, u32>,
        targets: Vec<String>,
        target_index: HashMap<String, u32>,
        lookup: HashMap<(u32, u32), f64>,
    ) -> TranslationLexicon {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); sources.len()];
        for (&(s, t), &p) in &lookup {
            rows[s as usize].push((t, p));
        }
        for row in &mut rows {
            row.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        }
        TranslationLexicon {
            sources,
            source_index,
            targets,
            target_index,
            rows,
            lookup,
        }
    }

    /// A lexicon mapping every word to itself with probability 1.
    pub fn identity<S: AsRef<str>>(words: &[S]) -> TranslationLexicon {
        TranslationLexicon::from_entries(words.iter().map(|w| (w.as_ref(), w.as_ref(), 1.0)))
    }

    pub fn prob(&self, source: &str, target: &str) -> f64 {
        match (self.source_index.get(source), self.target_index.get(target)) {
            (Some(&s), Some(&t)) => self.lookup.get(&(s, t)).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Translations of `source` in descending probability order.
    pub fn translations<'a>(&'a self, source: &str) -> impl Iterator<Item = (&'a str, f64)> + 'a {
        self.source_index
            .get(source)
            .map(|&s| self.rows[s as usize].as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&(t, p)| (self.targets[t as usize].as_str(), p))
    }

    pub fn source_words(&self) -> &[String] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.lookup.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lookup.is_empty()
    }

    pub fn row_sum(&self, source: &str) -> f64 {
        self.translations(source).map(|(_, p)| p).sum()
    }

    /// `source<TAB>target<TAB>prob`, sorted by source, then by descending
    /// probability.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for (s, row) in self.sources.iter().zip(&self.rows) {
            for &(t, p) in row {
                writeln!(out, "{}\t{}\t{}", s, self.targets[t as usize], p)?;
            }
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(input: R) -> Result<TranslationLexicon> {
        let mut entries = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::format("lexicon", i + 1, "expected source<TAB>target<TAB>prob"));
            }
            let p: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::format("lexicon", i + 1, format!("invalid probability {:?}", fields[2])))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::format(
                    "lexicon",
                    i + 1,
                    format!("probability {p} outside [0, 1]"),
                ));
            }
            entries.push((fields[0].to_string(), fields[1].to_string(), p));
        }
        Ok(TranslationLexicon::from_entries(entries))
    }
}

pub(crate) fn index_of(words: &[String]) -> HashMap<String, u32> {
    words.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect()
}
