//! Interpolated Kneser-Ney n-gram language models.
//!
//! Training follows the usual adjusted-count construction: the highest order
//! and every n-gram starting with `<s>` keep raw counts, every other lower
//! order n-gram is counted by the number of distinct words seen to its left.
//! Each order has a single absolute discount `D = n1 / (n1 + 2 n2)` computed
//! from the count-of-counts of its adjusted counts and clamped to
//! `[0.1, 0.9]`; unigrams interpolate with the uniform distribution over the
//! vocabulary (minus `<s>`), which is where `<unk>` gets its mass.
//!
//! The interpolated estimates are stored in back-off form, so a query is the
//! usual ARPA walk: longest matching suffix, plus the back-off weight of every
//! longer context that was skipped.

mod arpa;

use std::collections::{BTreeSet, HashMap};

pub use arpa::{read_arpa, write_arpa};

use crate::error::{Error, Result};
use crate::text::Sentence;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

/// log10 probability written for `<s>`, which is never predicted.
pub const LOG10_ZERO: f64 = -99.0;

pub const DEFAULT_ORDER: usize = 6;

const MIN_DISCOUNT: f64 = 0.1;
const MAX_DISCOUNT: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NGramEntry {
    pub log10_prob: f64,
    pub log10_backoff: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    /// `ngrams[n - 1]` holds the n-grams, keyed by their token ids.
    ngrams: Vec<HashMap<Vec<u32>, NGramEntry>>,
    /// Per-order discounts; empty for models read from ARPA.
    discounts: Vec<f64>,
    bos: u32,
    eos: u32,
    unk: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerplexityResult {
    pub log10_prob_sum: f64,
    /// Scored tokens: the sentence plus `</s>`.
    pub token_count: usize,
    pub perplexity: f64,
    pub oov_count: usize,
}

impl PerplexityResult {
    /// Per-token cross-entropy in log10 units.
    pub fn cross_entropy(&self) -> f64 {
        -self.log10_prob_sum / self.token_count as f64
    }

    /// Pool several results into one corpus-level figure.
    pub fn combine(results: impl IntoIterator<Item = PerplexityResult>) -> PerplexityResult {
        let (mut sum, mut tokens, mut oov) = (0.0, 0, 0);
        for r in results {
            sum += r.log10_prob_sum;
            tokens += r.token_count;
            oov += r.oov_count;
        }
        PerplexityResult {
            log10_prob_sum: sum,
            token_count: tokens,
            perplexity: if tokens == 0 {
                1.0
            } else {
                10f64.powf(-sum / tokens as f64)
            },
            oov_count: oov,
        }
    }
}

fn clamp_discount(n1: u64, n2: u64) -> f64 {
    let raw = if n1 + 2 * n2 == 0 {
        0.5
    } else {
        n1 as f64 / (n1 + 2 * n2) as f64
    };
    raw.clamp(MIN_DISCOUNT, MAX_DISCOUNT)
}

impl NGramModel {
    pub(crate) fn from_parts(
        order: usize,
        vocab: BTreeSet<String>,
        entries: Vec<HashMap<Vec<String>, NGramEntry>>,
        discounts: Vec<f64>,
    ) -> Result<NGramModel> {
        let vocab: Vec<String> = vocab.into_iter().collect();
        let index: HashMap<String, u32> = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        let id = |w: &str| -> Result<u32> {
            index
                .get(w)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("token {w:?} missing from vocabulary")))
        };
        let (bos, eos, unk) = (id(BOS)?, id(EOS)?, id(UNK)?);
        let mut ngrams = Vec::with_capacity(order);
        for level in entries {
            let mut map = HashMap::with_capacity(level.len());
            for (words, entry) in level {
                let ids = words.iter().map(|w| id(w)).collect::<Result<Vec<u32>>>()?;
                map.insert(ids, entry);
            }
            ngrams.push(map);
        }
        Ok(NGramModel {
            order,
            vocab,
            index,
            ngrams,
            discounts,
            bos,
            eos,
            unk,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Vocabulary in sorted order, including `<s>`, `</s>` and `<unk>`.
    pub fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn discounts(&self) -> &[f64] {
        &self.discounts
    }

    /// Number of stored n-grams of order `n` (1-based).
    pub fn ngram_count(&self, n: usize) -> usize {
        self.ngrams.get(n.wrapping_sub(1)).map_or(0, HashMap::len)
    }

    /// Stored entry for an n-gram given as words, if any.
    pub fn entry(&self, words: &[&str]) -> Option<NGramEntry> {
        let ids: Option<Vec<u32>> = words.iter().map(|w| self.index.get(*w).copied()).collect();
        let ids = ids?;
        self.ngrams.get(ids.len().checked_sub(1)?)?.get(&ids).copied()
    }

    /// Iterate over `(words, entry)` for order `n`, in no particular order.
    pub fn entries(&self, n: usize) -> impl Iterator<Item = (Vec<&str>, NGramEntry)> + '_ {
        self.ngrams.get(n.wrapping_sub(1)).into_iter().flat_map(move |m| {
            m.iter()
                .map(move |(ids, e)| (ids.iter().map(|&i| self.vocab[i as usize].as_str()).collect(), *e))
        })
    }

    fn id_of(&self, word: &str) -> u32 {
        self.index.get(word).copied().unwrap_or(self.unk)
    }

    fn score_ids(&self, context: &[u32], word: u32) -> f64 {
        let keep = context.len().min(self.order - 1);
        let context = &context[context.len() - keep..];
        let mut key: Vec<u32> = Vec::with_capacity(keep + 1);
        let mut backoff = 0.0;
        for n in (0..=keep).rev() {
            let h = &context[keep - n..];
            key.clear();
            key.extend_from_slice(h);
            key.push(word);
            if let Some(e) = self.ngrams[n].get(key.as_slice()) {
                return e.log10_prob + backoff;
            }
            if n > 0 {
                if let Some(bo) = self.ngrams[n - 1].get(h).and_then(|e| e.log10_backoff) {
                    backoff += bo;
                }
            }
        }
        // Every vocabulary word has a unigram in trained models; ARPA files
        // may omit some, in which case fall back to <unk>.
        if word != self.unk {
            self.score_ids(&[], self.unk) + backoff
        } else {
            LOG10_ZERO
        }
    }

    /// log10 P(word | context). Unknown words (in either argument) are
    /// treated as `<unk>`; only the last `order - 1` context words matter.
    pub fn log_prob<S: AsRef<str>>(&self, context: &[S], word: &str) -> f64 {
        let ctx: Vec<u32> = context.iter().map(|w| self.id_of(w.as_ref())).collect();
        self.score_ids(&ctx, self.id_of(word))
    }

    /// Score `<s> tokens </s>`; `<s>` itself is not scored.
    pub fn perplexity(&self, sentence: &Sentence) -> PerplexityResult {
        self.perplexity_tokens(sentence.tokens())
    }

    pub fn perplexity_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> PerplexityResult {
        let mut ids = Vec::with_capacity(tokens.len() + 2);
        ids.push(self.bos);
        let mut oov_count = 0;
        for t in tokens {
            match self.index.get(t.as_ref()) {
                Some(&i) => ids.push(i),
                None => {
                    oov_count += 1;
                    ids.push(self.unk);
                }
            }
        }
        ids.push(self.eos);
        let log10_prob_sum: f64 = (1..ids.len()).map(|i| self.score_ids(&ids[..i], ids[i])).sum();
        let token_count = ids.len() - 1;
        PerplexityResult {
            log10_prob_sum,
            token_count,
            perplexity: 10f64.powf(-log10_prob_sum / token_count as f64),
            oov_count,
        }
    }

    /// Compare order, vocabulary, probabilities and back-offs up to `tol`.
    pub fn same_parameters(&self, other: &NGramModel, tol: f64) -> bool {
        if self.order != other.order || self.vocab != other.vocab {
            return false;
        }
        let close = |a: f64, b: f64| (a - b).abs() <= tol;
        self.ngrams.iter().zip(&other.ngrams).all(|(a, b)| {
            a.len() == b.len()
                && a.iter().all(|(k, ea)| match b.get(k) {
                    Some(eb) => {
                        close(ea.log10_prob, eb.log10_prob)
                            && match (ea.log10_backoff, eb.log10_backoff) {
                                (None, None) => true,
                                (Some(x), Some(y)) => close(x, y),
                                _ => false,
                            }
                    }
                    None => false,
                })
        })
    }
}

/// Train an interpolated Kneser-Ney model.
///
/// Words seen fewer than `min_count` times are replaced by `<unk>` before
/// counting; with `min_count` 1 nothing is replaced and `<unk>` only receives
/// the uniform share of the interpolation mass.
pub fn train_lm<'a, I>(corpus: I, order: usize, min_count: usize) -> Result<NGramModel>
where
    I: IntoIterator<Item = &'a Sentence>,
{
    if order < 1 {
        return Err(Error::InvalidArgument("language model order must be >= 1".into()));
    }
    let sentences: Vec<&Sentence> = corpus.into_iter().collect();
    if sentences.is_empty() {
        return Err(Error::EmptyInput(
            "cannot train a language model on an empty corpus".into(),
        ));
    }

    let mut freq: HashMap<&str, usize> = HashMap::new();
    for s in &sentences {
        for t in s.tokens() {
            *freq.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let keep = |w: &str| freq.get(w).copied().unwrap_or(0) >= min_count;

    let mut vocab: BTreeSet<String> = [BOS, EOS, UNK].iter().map(|s| s.to_string()).collect();
    vocab.extend(freq.keys().filter(|w| keep(w)).map(|w| w.to_string()));
    let vocab_vec: Vec<String> = vocab.iter().cloned().collect();
    let index: HashMap<&str, u32> = vocab_vec
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i as u32))
        .collect();
    let (bos, eos, unk) = (index[BOS], index[EOS], index[UNK]);

    // Raw counts per order.
    let mut raw: Vec<HashMap<Vec<u32>, u64>> = vec![HashMap::new(); order];
    let mut seq = Vec::new();
    for s in &sentences {
        seq.clear();
        seq.push(bos);
        seq.extend(s.tokens().iter().map(|t| if keep(t) { index[t.as_str()] } else { unk }));
        seq.push(eos);
        for n in 1..=order {
            for w in seq.windows(n) {
                *raw[n - 1].entry(w.to_vec()).or_insert(0) += 1;
            }
        }
    }

    // Adjusted counts.
    let mut adjusted: Vec<HashMap<Vec<u32>, u64>> = Vec::with_capacity(order);
    for n in 1..=order {
        let mut adj: HashMap<Vec<u32>, u64> = HashMap::new();
        if n == order {
            adj = raw[n - 1].clone();
        } else {
            for (g, &c) in &raw[n - 1] {
                if g[0] == bos {
                    adj.insert(g.clone(), c);
                }
            }
            for longer in raw[n].keys() {
                *adj.entry(longer[1..].to_vec()).or_insert(0) += 1;
            }
        }
        if n == 1 {
            adj.remove(&vec![bos]);
        }
        adjusted.push(adj);
    }

    let discounts: Vec<f64> = adjusted
        .iter()
        .map(|adj| {
            let (mut n1, mut n2) = (0u64, 0u64);
            for &c in adj.values() {
                match c {
                    1 => n1 += 1,
                    2 => n2 += 1,
                    _ => {}
                }
            }
            clamp_discount(n1, n2)
        })
        .collect();

    // Probabilities in linear space, filled order by order.
    let mut prob: Vec<HashMap<Vec<u32>, f64>> = Vec::with_capacity(order);
    let mut backoff: Vec<HashMap<Vec<u32>, f64>> = vec![HashMap::new(); order];

    {
        let d = discounts[0];
        let adj = &adjusted[0];
        let total: u64 = adj.values().sum();
        let types = adj.values().filter(|&&c| c > 0).count();
        let predictable = vocab_vec.len() - 1;
        let gamma = d * types as f64 / total as f64;
        let uniform = gamma / predictable as f64;
        let mut p = HashMap::with_capacity(vocab_vec.len());
        for id in 0..vocab_vec.len() as u32 {
            if id == bos {
                continue;
            }
            let c = adj.get(&vec![id]).copied().unwrap_or(0) as f64;
            p.insert(vec![id], (c - d).max(0.0) / total as f64 + uniform);
        }
        prob.push(p);
    }

    for n in 2..=order {
        let d = discounts[n - 1];
        let adj = &adjusted[n - 1];
        let mut ctx_total: HashMap<&[u32], (u64, u64)> = HashMap::new();
        for (g, &c) in adj {
            let e = ctx_total.entry(&g[..n - 1]).or_insert((0, 0));
            e.0 += c;
            e.1 += 1;
        }
        let mut p = HashMap::with_capacity(adj.len());
        for (g, &c) in adj {
            let (total, types) = ctx_total[&g[..n - 1]];
            let gamma = d * types as f64 / total as f64;
            let lower = prob[n - 2][&g[1..]];
            p.insert(g.clone(), (c as f64 - d) / total as f64 + gamma * lower);
        }
        for (h, (total, types)) in ctx_total {
            backoff[n - 2].insert(h.to_vec(), d * types as f64 / total as f64);
        }
        prob.push(p);
    }

    let mut ngrams: Vec<HashMap<Vec<u32>, NGramEntry>> = Vec::with_capacity(order);
    for (n, p) in prob.into_iter().enumerate() {
        let mut level: HashMap<Vec<u32>, NGramEntry> = p
            .into_iter()
            .map(|(g, v)| {
                let bo = backoff[n].get(&g).map(|b| b.log10());
                (
                    g,
                    NGramEntry {
                        log10_prob: v.log10(),
                        log10_backoff: bo,
                    },
                )
            })
            .collect();
        if n == 0 {
            level.insert(
                vec![bos],
                NGramEntry {
                    log10_prob: LOG10_ZERO,
                    log10_backoff: backoff[0].get(&vec![bos]).map(|b| b.log10()),
                },
            );
        }
        ngrams.push(level);
    }

    let index: HashMap<String, u32> = index.into_iter().map(|(w, i)| (w.to_string(), i)).collect();
    Ok(NGramModel {
        order,
        vocab: vocab_vec,
        index,
        ngrams,
        discounts,
        bos,
        eos,
        unk,
    })
}

#[cfg(test)]
mod tests;
