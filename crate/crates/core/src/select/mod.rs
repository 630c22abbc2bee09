//! Pseudo in-domain data selection.
//!
//! General-domain sentences are scored against an in-domain profile with
//! three criteria (tf-idf cosine, cross-entropy difference and edit-distance
//! similarity), ranked per criterion, and the best fraction by weighted mean
//! rank is kept.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distance::levenshtein;
use crate::error::{Error, Result};
use crate::lm::{train_lm, NGramModel};
use crate::text::{ParallelCorpus, Sentence};

/// Which side of a sentence pair is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairMode {
    Source,
    #[default]
    Target,
    /// Criterion scores of both sides, averaged.
    Both,
}

impl FromStr for PairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" => Ok(PairMode::Source),
            "target" => Ok(PairMode::Target),
            "both" => Ok(PairMode::Both),
            other => Err(Error::InvalidArgument(format!(
                "unknown pair mode {other:?} (source, target, both)"
            ))),
        }
    }
}

impl fmt::Display for PairMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairMode::Source => "source",
            PairMode::Target => "target",
            PairMode::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    /// Fraction of candidates kept, in (0, 1].
    pub acceptance_rate: f64,
    /// Upper bound on the number of in-domain sentences used as edit references.
    pub edit_sample_size: usize,
    pub pair_mode: PairMode,
    /// Weights of the tf-idf, ced and edit ranks in the combined mean.
    pub weights: [f64; 3],
    pub lm_order: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            acceptance_rate: 0.2,
            edit_sample_size: 2000,
            pair_mode: PairMode::Target,
            weights: [1.0, 1.0, 1.0],
            lm_order: 3,
            seed: 0,
            workers: 1,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.acceptance_rate > 0.0 && self.acceptance_rate <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "acceptance rate {} must lie in (0, 1]",
                self.acceptance_rate
            )));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || self.weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "weights {:?} must be non-negative with a positive sum",
                self.weights
            )));
        }
        if self.lm_order == 0 || self.workers == 0 {
            return Err(Error::InvalidArgument("lm order and workers must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of candidates kept out of `n`: `ceil(rate * n)`, at least 1.
    pub fn selected_count(&self, n: usize) -> usize {
        if n == 0 {
            return 0;
        }
        let x = self.acceptance_rate * n as f64;
        let r = x.round();
        // 0.07 * 100 is 7.000000000000001 in binary floating point
        let k = if (x - r).abs() <= 1e-9 * x.max(1.0) {
            r
        } else {
            x.ceil()
        };
        (k as usize).clamp(1, n)
    }
}

/// Everything the three criteria need to know about the target domain.
#[derive(Debug, Clone)]
pub struct DomainProfile {
    /// Inverse document frequency of every in-domain term.
    pub idf: BTreeMap<String, f64>,
    /// Unit-length sum of the in-domain sentence tf-idf vectors.
    pub centroid: BTreeMap<String, f64>,
    pub in_lm: NGramModel,
    pub gen_lm: NGramModel,
    pub edit_reference: Vec<Sentence>,
}

/// Smoothed inverse document frequency `1 + ln(N / df)`.
pub fn idf(documents: usize, df: usize) -> f64 {
    1.0 + (documents as f64 / df as f64).ln()
}

fn normalize(v: &mut BTreeMap<String, f64>) {
    let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.values_mut() {
            *x /= norm;
        }
    }
}

fn term_counts(s: &Sentence) -> BTreeMap<&str, usize> {
    let mut tf = BTreeMap::new();
    for t in s.tokens() {
        *tf.entry(t.as_str()).or_insert(0) += 1;
    }
    tf
}

fn sample_general(general: &[Sentence], tokens: usize, seed: u64) -> Vec<&Sentence> {
    let mut order: Vec<usize> = (0..general.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut taken = Vec::new();
    let mut count = 0;
    for i in order {
        if count >= tokens {
            break;
        }
        count += general[i].len();
        taken.push(i);
    }
    taken.sort_unstable();
    taken.into_iter().map(|i| &general[i]).collect()
}

/// Build the in-domain profile.
///
/// The general LM is trained on a seeded random sample of the general corpus
/// holding about as many tokens as the in-domain corpus.
pub fn build_profile(in_domain: &[Sentence], general: &[Sentence], config: &SelectionConfig) -> Result<DomainProfile> {
    if in_domain.iter().all(Sentence::is_empty) {
        return Err(Error::EmptyInput("in-domain corpus has no tokens".into()));
    }
    if general.iter().all(Sentence::is_empty) {
        return Err(Error::EmptyInput("general corpus has no tokens".into()));
    }

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for s in in_domain {
        for t in term_counts(s).into_keys() {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let n = in_domain.len();
    let idf: BTreeMap<String, f64> = df.iter().map(|(t, &d)| (t.to_string(), idf(n, d))).collect();

    let mut centroid: BTreeMap<String, f64> = BTreeMap::new();
    for s in in_domain {
        for (t, c) in term_counts(s) {
            *centroid.entry(t.to_string()).or_insert(0.0) += c as f64 * idf[t];
        }
    }
    normalize(&mut centroid);

    let in_tokens: usize = in_domain.iter().map(Sentence::len).sum();
    let in_lm = train_lm(in_domain, config.lm_order, 1)?;
    let gen_lm = train_lm(sample_general(general, in_tokens, config.seed), config.lm_order, 1)?;

    let edit_reference = if in_domain.len() > config.edit_sample_size {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
        let mut idx: Vec<usize> =
            rand::seq::index::sample(&mut rng, in_domain.len(), config.edit_sample_size).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| in_domain[i].clone()).collect()
    } else {
        in_domain.to_vec()
    };

    Ok(DomainProfile {
        idf,
        centroid,
        in_lm,
        gen_lm,
        edit_reference,
    })
}

/// Cosine between the candidate's tf-idf vector and the in-domain centroid.
/// Terms never seen in-domain are dropped.
pub fn tfidf_score(profile: &DomainProfile, candidate: &Sentence) -> f64 {
    let mut dot = 0.0;
    let mut norm = 0.0;
    for (t, c) in term_counts(candidate) {
        if let Some(w) = profile.idf.get(t) {
            let x = c as f64 * w;
            norm += x * x;
            dot += x * profile.centroid.get(t).copied().unwrap_or(0.0);
        }
    }
    if norm == 0.0 {
        return 0.0;
    }
    let centroid_norm = profile.centroid.values().map(|x| x * x).sum::<f64>().sqrt();
    if centroid_norm == 0.0 {
        return 0.0;
    }
    (dot / (norm.sqrt() * centroid_norm)).clamp(0.0, 1.0)
}

/// Cross-entropy difference `H_in - H_gen` in log10 units per token.
/// Lower means more in-domain.
pub fn ced_score(profile: &DomainProfile, candidate: &Sentence) -> f64 {
    profile.in_lm.perplexity(candidate).cross_entropy() - profile.gen_lm.perplexity(candidate).cross_entropy()
}

/// Best `1 - levenshtein / max length` over the reference sentences.
pub fn edit_score(profile: &DomainProfile, candidate: &Sentence) -> f64 {
    edit_similarity(&profile.edit_reference, candidate)
}

pub fn edit_similarity(references: &[Sentence], candidate: &Sentence) -> f64 {
    let c = candidate.tokens();
    let mut best = 0.0f64;
    for r in references {
        let r = r.tokens();
        let longest = c.len().max(r.len());
        if longest == 0 {
            return 1.0;
        }
        // the length difference bounds the distance from below
        let bound = 1.0 - c.len().abs_diff(r.len()) as f64 / longest as f64;
        if bound <= best {
            continue;
        }
        let sim = 1.0 - levenshtein(c, r) as f64 / longest as f64;
        if sim > best {
            best = sim;
            if best == 1.0 {
                break;
            }
        }
    }
    best
}

/// The three criterion values of one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionScores {
    pub tfidf: f64,
    pub ced: f64,
    pub edit: f64,
}

impl CriterionScores {
    fn mean(a: CriterionScores, b: CriterionScores) -> CriterionScores {
        CriterionScores {
            tfidf: (a.tfidf + b.tfidf) / 2.0,
            ced: (a.ced + b.ced) / 2.0,
            edit: (a.edit + b.edit) / 2.0,
        }
    }
}

pub fn score_candidate(profile: &DomainProfile, candidate: &Sentence) -> CriterionScores {
    CriterionScores {
        tfidf: tfidf_score(profile, candidate),
        ced: ced_score(profile, candidate),
        edit: edit_score(profile, candidate),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Score every candidate on `workers` threads, results in input order.
pub fn score_all(profile: &DomainProfile, candidates: &[Sentence], workers: usize) -> Result<Vec<CriterionScores>> {
    Ok(pool(workers)?.install(|| candidates.par_iter().map(|c| score_candidate(profile, c)).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    pub index: usize,
    pub scores: CriterionScores,
    pub mean_rank: f64,
    /// 1-based position in the combined order.
    pub combined_rank: usize,
    pub selected: bool,
}

/// Outcome of a selection: one row per candidate, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub table: Vec<ScoredCandidate>,
}

impl Selection {
    /// Indices of the selected candidates, ascending.
    pub fn selected(&self) -> Vec<usize> {
        self.table.iter().filter(|c| c.selected).map(|c| c.index).collect()
    }

    /// `index<TAB>tfidf<TAB>ced<TAB>edit<TAB>combined_rank<TAB>selected`.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for c in &self.table {
            writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}",
                c.index,
                c.scores.tfidf,
                c.scores.ced,
                c.scores.edit,
                c.combined_rank,
                u8::from(c.selected)
            )?;
        }
        Ok(())
    }
}

/// 1-based ranks, best first; tied values share the mean of their positions.
pub fn fractional_ranks(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        if higher_is_better {
            ord.reverse()
        } else {
            ord
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Rank each criterion (tf-idf and edit descending, ced ascending), order by
/// the weighted mean rank with ties broken by input index, and keep the first
/// `ceil(rate * N)`.
pub fn combine_and_resample(scores: &[CriterionScores], config: &SelectionConfig) -> Result<Selection> {
    config.validate()?;
    if scores.is_empty() {
        return Err(Error::EmptyInput("no candidates to select from".into()));
    }
    let column = |f: fn(&CriterionScores) -> f64| scores.iter().map(f).collect::<Vec<_>>();
    let ranks = [
        fractional_ranks(&column(|s| s.tfidf), true),
        fractional_ranks(&column(|s| s.ced), false),
        fractional_ranks(&column(|s| s.edit), true),
    ];
    let w = config.weights;
    let total: f64 = w.iter().sum();
    let mean: Vec<f64> = (0..scores.len())
        .map(|i| (w[0] * ranks[0][i] + w[1] * ranks[1][i] + w[2] * ranks[2][i]) / total)
        .collect();

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| mean[a].total_cmp(&mean[b]).then(a.cmp(&b)));
    let keep = config.selected_count(scores.len());

    let mut table: Vec<ScoredCandidate> = scores
        .iter()
        .enumerate()
        .map(|(i, &s)| ScoredCandidate {
            index: i,
            scores: s,
            mean_rank: mean[i],
            combined_rank: 0,
            selected: false,
        })
        .collect();
    for (pos, &i) in order.iter().enumerate() {
        table[i].combined_rank = pos + 1;
        table[i].selected = pos < keep;
    }
    Ok(Selection { table })
}

/// Select monolingual sentences for language-model training. The kept
/// sentences are returned in input order.
pub fn select_for_lm(
    monolingual: &[Sentence],
    profile: &DomainProfile,
    config: &SelectionConfig,
) -> Result<(Vec<Sentence>, Selection)> {
    config.validate()?;
    let scores = score_all(profile, monolingual, config.workers)?;
    let selection = combine_and_resample(&scores, config)?;
    let kept = selection
        .selected()
        .into_iter()
        .map(|i| monolingual[i].clone())
        .collect();
    Ok((kept, selection))
}

/// Profiles for the two sides of a parallel corpus; only the sides the pair
/// mode needs have to be present.
#[derive(Debug, Clone, Copy)]
pub struct PairProfiles<'a> {
    pub source: Option<&'a DomainProfile>,
    pub target: Option<&'a DomainProfile>,
}

/// Select sentence pairs for translation-model training, scoring the side(s)
/// chosen by `config.pair_mode`. Kept pairs are returned in input order.
pub fn select_pairs(
    corpus: &ParallelCorpus,
    profiles: PairProfiles<'_>,
    config: &SelectionConfig,
) -> Result<(ParallelCorpus, Selection)> {
    config.validate()?;
    let missing = |side: &str| Error::InvalidArgument(format!("pair mode {} needs a {side} profile", config.pair_mode));
    let sources: Vec<Sentence> = corpus.sources().cloned().collect();
    let targets: Vec<Sentence> = corpus.targets().cloned().collect();
    let scores = match config.pair_mode {
        PairMode::Source => score_all(
            profiles.source.ok_or_else(|| missing("source"))?,
            &sources,
            config.workers,
        )?,
        PairMode::Target => score_all(
            profiles.target.ok_or_else(|| missing("target"))?,
            &targets,
            config.workers,
        )?,
        PairMode::Both => {
            let s = score_all(
                profiles.source.ok_or_else(|| missing("source"))?,
                &sources,
                config.workers,
            )?;
            let t = score_all(
                profiles.target.ok_or_else(|| missing("target"))?,
                &targets,
                config.workers,
            )?;
            s.into_iter().zip(t).map(|(a, b)| CriterionScores::mean(a, b)).collect()
        }
    };
    let selection = combine_and_resample(&scores, config)?;
    let kept = ParallelCorpus::new(
        selection
            .selected()
            .into_iter()
            .map(|i| corpus.pairs[i].clone())
            .collect(),
    );
    Ok((kept, selection))
}
