//! Parallel sentence mining from comparable document pairs.
//!
//! Every document pair is scored sentence-by-sentence with a [`PairScorer`],
//! the two sentence sequences are aligned globally with [`nw_align`], and the
//! matched pairs whose similarity reaches the threshold are emitted. Document
//! pairs are independent work units spread over a fixed-size worker pool;
//! results are merged in input order, so the output never depends on the
//! number of workers.

mod nw;
mod scorer;
mod tune;

use std::fmt::Write as _;
use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use nw::{nw_align, AlignmentPath, ScoreMatrix, Step};
pub use scorer::{score_pair, LexiconScorer, PairScorer};
pub use tune::{
    default_penalty_grid, default_threshold_grid, read_gold_tsv, tune, GoldDocument, GridPoint, TuningResult,
};

use crate::error::{Error, Result};
use crate::text::{Document, ParallelCorpus, Sentence, SentencePair};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiningConfig {
    /// Minimum similarity of an emitted pair.
    pub threshold: f64,
    /// Score added per unmatched sentence; must be <= 0.
    pub gap_penalty: f64,
    /// Lexicon entries below this probability are ignored by the scorer.
    pub min_prob: f64,
    pub workers: usize,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            threshold: 0.5,
            gap_penalty: -0.1,
            min_prob: 0.1,
            workers: 1,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidArgument(format!(
                "threshold {} must lie in [0, 1]",
                self.threshold
            )));
        }
        if self.gap_penalty.is_nan() || self.gap_penalty > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "gap penalty {} must be <= 0",
                self.gap_penalty
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentPair {
    pub source: Document,
    pub target: Document,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedPair {
    pub source: Sentence,
    pub target: Sentence,
    pub similarity: f64,
    pub source_doc: String,
    pub target_doc: String,
    pub source_index: usize,
    pub target_index: usize,
}

/// Similarities of every source sentence against every target sentence.
pub fn score_matrix(pair: &DocumentPair, scorer: &dyn PairScorer) -> ScoreMatrix {
    let (src, tgt) = (&pair.source.sentences, &pair.target.sentences);
    ScoreMatrix::from_fn(src.len(), tgt.len(), |i, j| scorer.score(&src[i], &tgt[j]))
}

fn emit(pair: &DocumentPair, scores: &ScoreMatrix, path: &AlignmentPath, threshold: f64) -> Vec<MinedPair> {
    path.matches()
        .filter(|&(i, j)| scores.get(i, j) >= threshold)
        .map(|(i, j)| MinedPair {
            source: pair.source.sentences[i].clone(),
            target: pair.target.sentences[j].clone(),
            similarity: scores.get(i, j),
            source_doc: pair.source.id.clone(),
            target_doc: pair.target.id.clone(),
            source_index: i,
            target_index: j,
        })
        .collect()
}

/// Align one document pair and keep the matches at or above the threshold,
/// in document order.
pub fn mine_document_pair(pair: &DocumentPair, scorer: &dyn PairScorer, config: &MiningConfig) -> Vec<MinedPair> {
    let scores = score_matrix(pair, scorer);
    let path = nw_align(&scores, config.gap_penalty);
    emit(pair, &scores, &path, config.threshold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairYield {
    pub source_doc: String,
    pub target_doc: String,
    pub candidates: usize,
    pub emitted: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningReport {
    pub pairs_scanned: usize,
    pub pairs_emitted: usize,
    pub workers: usize,
    pub wall_time: Duration,
    pub yields: Vec<PairYield>,
}

impl MiningReport {
    /// Line-oriented `key=value` rendering. Wall time and worker count are
    /// left out, so the rendering is the same for every run.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let candidates: usize = self.yields.iter().map(|y| y.candidates).sum();
        let _ = writeln!(out, "document_pairs={}", self.yields.len());
        let _ = writeln!(out, "pairs_scanned={}", self.pairs_scanned);
        let _ = writeln!(out, "candidate_sentence_pairs={}", candidates);
        let _ = writeln!(out, "pairs_emitted={}", self.pairs_emitted);
        for (k, y) in self.yields.iter().enumerate() {
            let _ = writeln!(
                out,
                "yield.{}={}\t{}\t{}\t{}",
                k, y.source_doc, y.target_doc, y.candidates, y.emitted
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningOutput {
    pub pairs: Vec<MinedPair>,
    pub report: MiningReport,
}

impl MiningOutput {
    pub fn corpus(&self) -> ParallelCorpus {
        ParallelCorpus::new(
            self.pairs
                .iter()
                .map(|p| SentencePair {
                    source: p.source.clone(),
                    target: p.target.clone(),
                })
                .collect(),
        )
    }

    /// `similarity<TAB>source<TAB>target`, similarity with 6 decimals.
    pub fn write_tsv<W: Write>(&self, out: W) -> Result<()> {
        write_mined_tsv(&self.pairs, out)
    }
}

pub fn write_mined_tsv<W: Write>(pairs: &[MinedPair], mut out: W) -> Result<()> {
    for p in pairs {
        writeln!(out, "{:.6}\t{}\t{}", p.similarity, p.source.joined(), p.target.joined())?;
    }
    Ok(())
}

/// Mine every document pair on `config.workers` threads. The output is
/// identical for any worker count.
pub fn mine_collection(pairs: &[DocumentPair], scorer: &dyn PairScorer, config: &MiningConfig) -> Result<MiningOutput> {
    config.validate()?;
    if let Some(p) = pairs.iter().find(|p| p.source.id.is_empty() || p.target.id.is_empty()) {
        return Err(Error::InvalidArgument(format!(
            "document pair ({:?}, {:?}) has an empty id",
            p.source.id, p.target.id
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;

    let start = Instant::now();
    let per_pair: Vec<Vec<MinedPair>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|p| mine_document_pair(p, scorer, config))
            .collect()
    });
    let wall_time = start.elapsed();

    let yields = pairs
        .iter()
        .zip(&per_pair)
        .map(|(p, mined)| PairYield {
            source_doc: p.source.id.clone(),
            target_doc: p.target.id.clone(),
            candidates: p.source.sentences.len() * p.target.sentences.len(),
            emitted: mined.len(),
        })
        .collect();
    let mined: Vec<MinedPair> = per_pair.into_iter().flatten().collect();
    Ok(MiningOutput {
        report: MiningReport {
            pairs_scanned: pairs.len(),
            pairs_emitted: mined.len(),
            workers: config.workers,
            wall_time,
            yields,
        },
        pairs: mined,
    })
}

#[cfg(test)]
mod tests;
