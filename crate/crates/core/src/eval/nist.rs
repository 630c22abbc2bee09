use std::collections::HashMap;

use super::ngram_counts;
use crate::text::Sentence;

/// Brevity constant: the penalty is 0.5 when the hypothesis is 2/3 of the
/// reference length.
pub fn nist_beta() -> f64 {
    0.5f64.ln() / 1.5f64.ln().powi(2)
}

pub fn nist_brevity(hypothesis_len: usize, reference_len: usize) -> f64 {
    if reference_len == 0 {
        return 1.0;
    }
    let ratio = (hypothesis_len as f64 / reference_len as f64).min(1.0);
    (nist_beta() * ratio.ln().powi(2)).exp()
}

/// Corpus NIST score over `(hypothesis, reference)` segments.
pub fn nist_score(segments: &[(&Sentence, &Sentence)], max_n: usize) -> f64 {
    // reference n-gram counts for n = 0..=max_n (n = 0 is the word total)
    let mut ref_counts: Vec<HashMap<&[String], usize>> = vec![HashMap::new(); max_n + 1];
    let mut ref_words = 0usize;
    let mut hyp_words = 0usize;
    for (h, r) in segments {
        ref_words += r.len();
        hyp_words += h.len();
        for (n, counts) in ref_counts.iter_mut().enumerate().skip(1) {
            for (g, c) in ngram_counts(r.tokens(), n) {
                *counts.entry(g).or_insert(0) += c;
            }
        }
    }
    if hyp_words == 0 {
        return 0.0;
    }
    let info = |g: &[String]| -> f64 {
        let n = g.len();
        let whole = ref_counts[n][g] as f64;
        let prefix = if n == 1 {
            ref_words as f64
        } else {
            ref_counts[n - 1][&g[..n - 1]] as f64
        };
        (prefix / whole).log2()
    };

    let mut score = 0.0;
    for n in 1..=max_n {
        let mut gained = 0.0;
        let mut total = 0usize;
        for (h, r) in segments {
            let hc = ngram_counts(h.tokens(), n);
            let rc = ngram_counts(r.tokens(), n);
            total += hc.values().sum::<usize>();
            let mut matched: Vec<(&[String], usize)> = hc
                .iter()
                .filter_map(|(g, &c)| rc.get(g).map(|&rc| (*g, c.min(rc))))
                .collect();
            // fixed summation order
            matched.sort_unstable();
            gained += matched.iter().map(|&(g, c)| c as f64 * info(g)).sum::<f64>();
        }
        if total > 0 {
            score += gained / total as f64;
        }
    }
    score * nist_brevity(hyp_words, ref_words)
}
