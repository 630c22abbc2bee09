//! Corpus-level BLEU, NIST and TER with per-document breakdowns.
//!
//! All metrics take a single reference per segment and work on the tokens
//! produced by the pipeline tokenizer.

mod bleu;
mod nist;
mod ter;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

pub use bleu::{BleuScore, BleuStats};
pub use nist::{nist_beta, nist_brevity, nist_score};
pub use ter::{apply_shift, ter_edits, TerEdits, MAX_SHIFT_SPAN};

use crate::error::{Error, Result};
use crate::text::Sentence;

pub const DEFAULT_BLEU_ORDER: usize = 4;
pub const DEFAULT_NIST_ORDER: usize = 5;

pub(crate) fn ngram_counts<T: std::hash::Hash + Eq>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

/// Hypotheses and references, aligned by segment, with an optional document
/// id per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalInput {
    hypotheses: Vec<Sentence>,
    references: Vec<Sentence>,
    documents: Option<Vec<String>>,
}

impl EvalInput {
    pub fn new(hypotheses: Vec<Sentence>, references: Vec<Sentence>) -> Result<Self> {
        if hypotheses.len() != references.len() {
            return Err(Error::LengthMismatch {
                hypotheses: hypotheses.len(),
                references: references.len(),
            });
        }
        if hypotheses.is_empty() {
            return Err(Error::EmptyInput("no segments to score".into()));
        }
        Ok(EvalInput {
            hypotheses,
            references,
            documents: None,
        })
    }

    /// Attach one document id per segment.
    pub fn with_documents(mut self, documents: Vec<String>) -> Result<Self> {
        if documents.len() != self.hypotheses.len() {
            return Err(Error::InvalidArgument(format!(
                "document map covers {} segments, input has {}",
                documents.len(),
                self.hypotheses.len()
            )));
        }
        self.documents = Some(documents);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn hypotheses(&self) -> &[Sentence] {
        &self.hypotheses
    }

    pub fn references(&self) -> &[Sentence] {
        &self.references
    }

    pub fn documents(&self) -> Option<&[String]> {
        self.documents.as_deref()
    }

    fn segments(&self) -> Vec<(&Sentence, &Sentence)> {
        self.hypotheses.iter().zip(&self.references).collect()
    }

    fn subset(&self, indices: &[usize]) -> EvalInput {
        EvalInput {
            hypotheses: indices.iter().map(|&i| self.hypotheses[i].clone()).collect(),
            references: indices.iter().map(|&i| self.references[i].clone()).collect(),
            documents: None,
        }
    }
}

/// Read a `segment_index<TAB>doc_id` map (0-based indices) covering every one
/// of `segments` segments exactly once.
pub fn read_doc_map<R: BufRead>(input: R, segments: usize) -> Result<Vec<String>> {
    let mut docs: Vec<Option<String>> = vec![None; segments];
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::format("document map", k + 1, msg);
        let (idx, doc) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected segment_index<TAB>doc_id".into()))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad segment index {idx:?}")))?;
        if idx >= segments {
            return Err(bad(format!("segment {idx} out of range (input has {segments})")));
        }
        if doc.is_empty() {
            return Err(bad("empty document id".into()));
        }
        match &docs[idx] {
            Some(prev) if prev != doc => {
                return Err(bad(format!("segment {idx} mapped to both {prev:?} and {doc:?}")));
            }
            _ => docs[idx] = Some(doc.to_string()),
        }
    }
    docs.into_iter()
        .enumerate()
        .map(|(i, d)| d.ok_or_else(|| Error::InvalidArgument(format!("segment {i} is not mapped to a document"))))
        .collect()
}

pub fn bleu(input: &EvalInput, max_n: usize, smooth: bool) -> BleuScore {
    let mut stats = BleuStats::new(max_n);
    for (h, r) in input.segments() {
        stats.add_segment(h, r);
    }
    stats.score(smooth)
}

pub fn nist(input: &EvalInput, max_n: usize) -> f64 {
    nist_score(&input.segments(), max_n)
}

/// Single-segment TER.
pub fn ter(hypothesis: &Sentence, reference: &Sentence, shifts: bool) -> TerEdits {
    ter_edits(hypothesis.tokens(), reference.tokens(), shifts)
}

/// Corpus TER: total edits over total reference length.
pub fn corpus_ter(input: &EvalInput, shifts: bool) -> f64 {
    let (mut edits, mut len) = (0usize, 0usize);
    for (h, r) in input.segments() {
        let e = ter(h, r, shifts);
        edits += e.edits;
        len += e.reference_len;
    }
    edits as f64 / len.max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub bleu_order: usize,
    pub nist_order: usize,
    pub smooth: bool,
    pub shifts: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            bleu_order: DEFAULT_BLEU_ORDER,
            nist_order: DEFAULT_NIST_ORDER,
            smooth: false,
            shifts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricScores {
    pub bleu: BleuScore,
    pub nist: f64,
    pub ter: f64,
}

fn score(input: &EvalInput, opts: &EvalOptions) -> MetricScores {
    MetricScores {
        bleu: bleu(input, opts.bleu_order, opts.smooth),
        nist: nist(input, opts.nist_order),
        ter: corpus_ter(input, opts.shifts),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub corpus: MetricScores,
    /// Keyed by document id; empty without a document map.
    pub per_document: BTreeMap<String, MetricScores>,
}

/// Corpus metrics plus, when the input carries document ids, the same
/// metrics restricted to each document's segments.
pub fn report(input: &EvalInput, opts: &EvalOptions) -> EvalReport {
    let mut per_document = BTreeMap::new();
    if let Some(docs) = input.documents() {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, d) in docs.iter().enumerate() {
            groups.entry(d.as_str()).or_default().push(i);
        }
        for (d, idx) in groups {
            per_document.insert(d.to_string(), score(&input.subset(&idx), opts));
        }
    }
    EvalReport {
        corpus: score(input, opts),
        per_document,
    }
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// Text table with one row per document and system, in the layout
/// `TALK ID | SYSTEM | BLEU`. The talk id is printed on the first row of each
/// group; the corpus-level rows come last under `ALL`.
pub fn render_table(systems: &[(&str, &EvalReport)]) -> String {
    let mut rows: Vec<[String; 3]> = vec![["TALK ID".into(), "SYSTEM".into(), "BLEU".into()]];
    let docs: Vec<&String> = systems
        .first()
        .map(|(_, r)| r.per_document.keys().collect())
        .unwrap_or_default();
    let mut group = |id: &str, get: &dyn Fn(&EvalReport) -> Option<f64>| {
        for (k, (name, r)) in systems.iter().enumerate() {
            let label = if k == 0 { id.to_string() } else { String::new() };
            let value = get(r).map_or_else(|| "-".to_string(), pct);
            rows.push([label, name.to_string(), value]);
        }
    };
    for d in docs {
        group(d, &|r: &EvalReport| r.per_document.get(d).map(|m| m.bleu.score));
    }
    group("ALL", &|r: &EvalReport| Some(r.corpus.bleu.score));

    let width = |c: usize| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0);
    let (w0, w1, w2) = (width(0), width(1), width(2));
    let mut out = String::new();
    for (k, r) in rows.iter().enumerate() {
        let _ = writeln!(out, "{:<w0$} | {:<w1$} | {:>w2$}", r[0], r[1], r[2]);
        if k == 0 {
            let _ = writeln!(out, "{}-+-{}-+-{}", "-".repeat(w0), "-".repeat(w1), "-".repeat(w2));
        }
    }
    out
}

/// `doc_id<TAB>system<TAB>bleu<TAB>nist<TAB>ter` with BLEU and TER x100, corpus
/// rows under the id `ALL`.
pub fn write_report_tsv<W: Write>(systems: &[(&str, &EvalReport)], mut out: W) -> Result<()> {
    writeln!(out, "doc_id\tsystem\tbleu\tnist\tter")?;
    let mut line = |id: &str, name: &str, m: &MetricScores| {
        writeln!(
            out,
            "{id}\t{name}\t{}\t{:.4}\t{}",
            pct(m.bleu.score),
            m.nist,
            pct(m.ter)
        )
    };
    if let Some((_, first)) = systems.first() {
        for d in first.per_document.keys() {
            for (name, r) in systems {
                if let Some(m) = r.per_document.get(d) {
                    line(d, name, m)?;
                }
            }
        }
    }
    for (name, r) in systems {
        line("ALL", name, &r.corpus)?;
    }
    Ok(())
}
