use std::collections::HashMap;

use super::ngram_counts;
use crate::text::Sentence;

/// Pooled n-gram statistics; adding the stats of two corpora gives the stats
/// of their concatenation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub hypothesis_len: u64,
    pub reference_len: u64,
}

impl BleuStats {
    pub fn new(max_n: usize) -> Self {
        BleuStats {
            matches: vec![0; max_n],
            totals: vec![0; max_n],
            hypothesis_len: 0,
            reference_len: 0,
        }
    }

    pub fn add_segment(&mut self, hypothesis: &Sentence, reference: &Sentence) {
        let (h, r) = (hypothesis.tokens(), reference.tokens());
        self.hypothesis_len += h.len() as u64;
        self.reference_len += r.len() as u64;
        for n in 1..=self.matches.len() {
            let hc = ngram_counts(h, n);
            let rc: HashMap<&[String], usize> = ngram_counts(r, n);
            self.totals[n - 1] += hc.values().sum::<usize>() as u64;
            self.matches[n - 1] += hc
                .iter()
                .map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0)) as u64)
                .sum::<u64>();
        }
    }

    pub fn score(&self, smooth: bool) -> BleuScore {
        let precisions: Vec<f64> = self
            .matches
            .iter()
            .zip(&self.totals)
            .enumerate()
            .map(|(k, (&m, &t))| {
                if smooth && k > 0 {
                    (m + 1) as f64 / (t + 1) as f64
                } else if t == 0 {
                    0.0
                } else {
                    m as f64 / t as f64
                }
            })
            .collect();
        let (c, r) = (self.hypothesis_len as f64, self.reference_len as f64);
        let brevity_penalty = if c == 0.0 {
            0.0
        } else if c < r {
            (1.0 - r / c).exp()
        } else {
            1.0
        };
        let score = if precisions.contains(&0.0) {
            0.0
        } else {
            let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / precisions.len() as f64;
            brevity_penalty * mean_log.exp()
        };
        BleuScore {
            score,
            precisions,
            brevity_penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuScore {
    /// In [0, 1].
    pub score: f64,
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
}
