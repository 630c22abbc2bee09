//! One function per subcommand. Each returns the text it prints on stdout,
//! so the demo can run the same stages in process.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;

use super::files::{
    check_outputs, open, read_manifest, read_parallel_files, read_parallel_tsv, read_sentences, write_atomic,
    write_sentences, write_string,
};
use crate::error::{Error, Result};
use crate::eval::{self, EvalInput, EvalOptions};
use crate::lm::{self, NGramModel, PerplexityResult};
use crate::mine::{self, GoldDocument, LexiconScorer, MiningConfig};
use crate::select::{self, PairMode, PairProfiles, SelectionConfig};
use crate::text::{self, CleaningConfig, ParallelCorpus, Sentence, TokenizationProfile};
use crate::word_align::{self, Heuristic, TranslationLexicon};

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Globals {
    pub seed: u64,
    pub workers: usize,
    pub force: bool,
    pub profile: TokenizationProfile,
}

impl Default for Globals {
    fn default() -> Self {
        Globals {
            seed: 0,
            workers: 1,
            force: false,
            profile: TokenizationProfile::default(),
        }
    }
}

/// Either two line-aligned files or one TSV.
#[derive(Debug, Clone, Default, Args)]
pub struct ParallelInput {
    /// Source side, one sentence per line.
    #[arg(long, requires = "tgt", required_unless_present = "parallel")]
    pub src: Option<PathBuf>,
    /// Target side, line-aligned with --src.
    #[arg(long, requires = "src")]
    pub tgt: Option<PathBuf>,
    /// `source<TAB>target` lines instead of --src/--tgt.
    #[arg(long, conflicts_with_all = ["src", "tgt"])]
    pub parallel: Option<PathBuf>,
}

impl ParallelInput {
    pub fn files(src: impl Into<PathBuf>, tgt: impl Into<PathBuf>) -> Self {
        ParallelInput {
            src: Some(src.into()),
            tgt: Some(tgt.into()),
            parallel: None,
        }
    }

    pub fn tsv(path: impl Into<PathBuf>) -> Self {
        ParallelInput {
            parallel: Some(path.into()),
            ..Default::default()
        }
    }

    fn read(&self, profile: TokenizationProfile) -> Result<ParallelCorpus> {
        match (&self.src, &self.tgt, &self.parallel) {
            (_, _, Some(p)) => read_parallel_tsv(p, profile),
            (Some(s), Some(t), None) => read_parallel_files(s, t, profile),
            _ => Err(Error::InvalidArgument("give --src and --tgt, or --parallel".into())),
        }
    }
}

fn read_lexicon(path: &Path) -> Result<TranslationLexicon> {
    TranslationLexicon::read_tsv(open(path)?)
}

fn parse_list(what: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("{what}: cannot parse {v:?} as a number")))
        })
        .collect()
}

#[derive(Debug, Clone, Args)]
pub struct IngestTedArgs {
    /// TED-style XML with `<talk id>` (or `<doc docid>`) and `<seg>` elements.
    pub xml: PathBuf,
    /// Tokenized segments, one per line.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write `segment_index<TAB>talk_id` (0-based) for `score --docs`.
    #[arg(long)]
    pub doc_map: Option<PathBuf>,
}

pub fn ingest_ted(g: &Globals, a: &IngestTedArgs) -> Result<String> {
    let mut outputs = vec![a.out.as_path()];
    outputs.extend(a.doc_map.as_deref());
    check_outputs(&outputs, g.force)?;
    let ingest = text::ingest_ted_xml(open(&a.xml)?, g.profile)?;
    for d in &ingest.rejected {
        eprintln!(
            "warning: {}: skipped talk at byte {}: {}",
            a.xml.display(),
            d.offset,
            d.message
        );
    }
    let sentences: Vec<&Sentence> = ingest.documents.iter().flat_map(|d| &d.sentences).collect();
    write_sentences(&a.out, g.force, sentences.iter().copied())?;
    if let Some(map) = &a.doc_map {
        write_atomic(map, g.force, |w| {
            let mut k = 0;
            for d in &ingest.documents {
                for _ in &d.sentences {
                    writeln!(w, "{k}\t{}", d.id)?;
                    k += 1;
                }
            }
            Ok(())
        })?;
    }
    Ok(format!(
        "documents={}\nsegments={}\nrejected={}\n",
        ingest.documents.len(),
        sentences.len(),
        ingest.rejected.len()
    ))
}

#[derive(Debug, Clone, Args)]
pub struct CleanArgs {
    #[command(flatten)]
    pub input: ParallelInput,
    #[arg(long)]
    pub out_src: PathBuf,
    #[arg(long)]
    pub out_tgt: PathBuf,
    /// Largest allowed token-length ratio between the two sides.
    #[arg(long, default_value_t = CleaningConfig::default().max_ratio)]
    pub max_ratio: f64,
    /// Write the drop counts here as well as to stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn clean(g: &Globals, a: &CleanArgs) -> Result<String> {
    if a.max_ratio.is_nan() || a.max_ratio < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "--max-ratio must be at least 1, got {}",
            a.max_ratio
        )));
    }
    let mut outputs = vec![a.out_src.as_path(), a.out_tgt.as_path()];
    outputs.extend(a.report.as_deref());
    check_outputs(&outputs, g.force)?;
    let corpus = a.input.read(g.profile)?;
    let (kept, report) = text::clean_parallel(&corpus, &CleaningConfig { max_ratio: a.max_ratio });
    write_sentences(&a.out_src, g.force, kept.sources())?;
    write_sentences(&a.out_tgt, g.force, kept.targets())?;
    let summary = report.to_key_values();
    if let Some(p) = &a.report {
        write_string(p, g.force, &summary)?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Text file, one sentence per line.
    pub file: PathBuf,
    /// Line-aligned target side; prints per-side counts.
    #[arg(long)]
    pub tgt: Option<PathBuf>,
}

pub fn stats(g: &Globals, a: &StatsArgs) -> Result<String> {
    Ok(match &a.tgt {
        Some(t) => format!(
            "{}\n",
            text::parallel_stats(&read_parallel_files(&a.file, t, g.profile)?)
        ),
        None => format!("{}\n", text::corpus_stats(&read_sentences(&a.file, g.profile)?)),
    })
}

#[derive(Debug, Clone, Args)]
pub struct TrainLexArgs {
    #[command(flatten)]
    pub input: ParallelInput,
    /// Lexicon TSV `source<TAB>target<TAB>prob`.
    #[arg(long)]
    pub out: PathBuf,
    /// Also train the target-to-source lexicon and write it here.
    #[arg(long)]
    pub reverse_out: Option<PathBuf>,
    /// EM iterations.
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
}

pub fn train_lex(g: &Globals, a: &TrainLexArgs) -> Result<String> {
    let mut outputs = vec![a.out.as_path()];
    outputs.extend(a.reverse_out.as_deref());
    check_outputs(&outputs, g.force)?;
    let corpus = a.input.read(g.profile)?;
    let (lex, ll) = word_align::train_model1(&corpus, a.iters)?;
    write_atomic(&a.out, g.force, |w| lex.write_tsv(w))?;
    let mut out = format!("pairs={}\nentries={}\n", corpus.len(), lex.len());
    for (k, v) in ll.iter().enumerate() {
        let _ = writeln!(out, "log_likelihood.{k}={v:.6}");
    }
    if let Some(rev) = &a.reverse_out {
        let (back, _) = word_align::train_model1(&corpus.swapped(), a.iters)?;
        write_atomic(rev, g.force, |w| back.write_tsv(w))?;
        let _ = writeln!(out, "reverse_entries={}", back.len());
    }
    Ok(out)
}

#[derive(Debug, Clone, Args)]
pub struct AlignArgs {
    #[command(flatten)]
    pub input: ParallelInput,
    /// Source-to-target lexicon.
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Target-to-source lexicon; when given the two directions are symmetrized.
    #[arg(long)]
    pub reverse_lexicon: Option<PathBuf>,
    /// intersection, union or grow-diag.
    #[arg(long, default_value = "grow-diag")]
    pub heuristic: Heuristic,
    /// Links in `i-j` form, one line per sentence pair.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn align(g: &Globals, a: &AlignArgs) -> Result<String> {
    check_outputs(&[&a.out], g.force)?;
    let corpus = a.input.read(g.profile)?;
    let fwd_lex = read_lexicon(&a.lexicon)?;
    let bwd_lex = a.reverse_lexicon.as_deref().map(read_lexicon).transpose()?;
    let mut lines = Vec::with_capacity(corpus.len());
    let mut links = 0;
    for p in &corpus.pairs {
        let fwd = word_align::viterbi_align(&fwd_lex, &p.source, &p.target);
        let l = match &bwd_lex {
            Some(b) => {
                let bwd = word_align::viterbi_align(b, &p.target, &p.source).transposed();
                word_align::symmetrize(&fwd, &bwd, a.heuristic)?
            }
            None => fwd,
        };
        links += l.links.len();
        lines.push(l.to_pharaoh());
    }
    write_atomic(&a.out, g.force, |w| {
        for l in &lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })?;
    Ok(format!("pairs={}\nlinks={links}\n", corpus.len()))
}

#[derive(Debug, Clone, Args)]
pub struct MineArgs {
    /// `source_path<TAB>target_path` per document pair.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Source-to-target lexicon used to score sentence pairs.
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Mined pairs as `similarity<TAB>source<TAB>target`.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-document yield report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = MiningConfig::default().threshold)]
    pub threshold: f64,
    /// Score of an unmatched sentence; zero or negative.
    #[arg(long, allow_negative_numbers = true, default_value_t = MiningConfig::default().gap_penalty)]
    pub gap_penalty: f64,
    /// Smallest lexicon probability that counts as a translation.
    #[arg(long, default_value_t = MiningConfig::default().min_prob)]
    pub min_prob: f64,
}

pub fn mine(g: &Globals, a: &MineArgs) -> Result<String> {
    let mut outputs = vec![a.out.as_path()];
    outputs.extend(a.report.as_deref());
    check_outputs(&outputs, g.force)?;
    let config = MiningConfig {
        threshold: a.threshold,
        gap_penalty: a.gap_penalty,
        min_prob: a.min_prob,
        workers: g.workers,
    };
    config.validate()?;
    let pairs = read_manifest(&a.manifest, g.profile)?;
    let lexicon = read_lexicon(&a.lexicon)?;
    let scorer = LexiconScorer {
        lexicon: &lexicon,
        min_prob: a.min_prob,
    };
    let mined = mine::mine_collection(&pairs, &scorer, &config)?;
    eprintln!(
        "mine: {} document pairs on {} workers in {} ms",
        pairs.len(),
        mined.report.workers,
        mined.report.wall_time.as_millis()
    );
    write_atomic(&a.out, g.force, |w| mined.write_tsv(w))?;
    let summary = mined.report.to_key_values();
    if let Some(p) = &a.report {
        write_string(p, g.force, &summary)?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, Args)]
pub struct TuneMineArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Gold links `doc_id<TAB>i<TAB>j`; documents without lines have none.
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Best point and the full grid as `key=value` lines.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated thresholds [default: 0.1,0.2,...,0.9].
    #[arg(long)]
    pub thresholds: Option<String>,
    /// Comma-separated gap penalties [default: -0.05,-0.1,-0.2,-0.4,-0.8].
    #[arg(long, allow_hyphen_values = true)]
    pub penalties: Option<String>,
    #[arg(long, default_value_t = MiningConfig::default().min_prob)]
    pub min_prob: f64,
}

pub fn tune_mine(g: &Globals, a: &TuneMineArgs) -> Result<String> {
    check_outputs(&[&a.out], g.force)?;
    let thresholds = match &a.thresholds {
        Some(t) => parse_list("--thresholds", t)?,
        None => mine::default_threshold_grid(),
    };
    let penalties = match &a.penalties {
        Some(p) => parse_list("--penalties", p)?,
        None => mine::default_penalty_grid(),
    };
    let pairs = read_manifest(&a.manifest, g.profile)?;
    let mut gold = mine::read_gold_tsv(open(&a.gold)?)?;
    let docs: Vec<GoldDocument> = pairs
        .into_iter()
        .map(|pair| {
            let links = gold.remove(&pair.source.id).unwrap_or_default();
            GoldDocument { pair, links }
        })
        .collect();
    if let Some(id) = gold.keys().next() {
        return Err(Error::InvalidArgument(format!(
            "gold links name document {id:?}, which is not in the manifest"
        )));
    }
    let lexicon = read_lexicon(&a.lexicon)?;
    let scorer = LexiconScorer {
        lexicon: &lexicon,
        min_prob: a.min_prob,
    };
    let result = mine::tune(&docs, &scorer, &thresholds, &penalties)?;
    let text = result.to_key_values();
    write_string(&a.out, g.force, &text)?;
    Ok(text
        .lines()
        .take_while(|l| !l.starts_with("grid."))
        .map(|l| format!("{l}\n"))
        .collect())
}

#[derive(Debug, Clone, Args)]
pub struct TrainLmArgs {
    /// Training text, one sentence per line.
    pub text: PathBuf,
    /// ARPA output.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = lm::DEFAULT_ORDER)]
    pub order: usize,
    /// Words seen fewer times become `<unk>`.
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
}

pub fn train_lm(g: &Globals, a: &TrainLmArgs) -> Result<String> {
    check_outputs(&[&a.out], g.force)?;
    let text = read_sentences(&a.text, g.profile)?;
    let model = lm::train_lm(&text, a.order, a.min_count)?;
    write_atomic(&a.out, g.force, |w| lm::write_arpa(&model, w))?;
    Ok(lm_summary(&model))
}

fn lm_summary(model: &NGramModel) -> String {
    let mut out = format!("order={}\nvocabulary={}\n", model.order(), model.vocabulary().len());
    for n in 1..=model.order() {
        let _ = writeln!(out, "ngram.{n}={}", model.ngram_count(n));
    }
    out
}

#[derive(Debug, Clone, Args)]
pub struct PplArgs {
    /// Text to score, one sentence per line.
    pub text: PathBuf,
    /// ARPA model.
    #[arg(long)]
    pub model: PathBuf,
}

pub fn ppl(g: &Globals, a: &PplArgs) -> Result<String> {
    let model = lm::read_arpa(open(&a.model)?)?;
    let text = read_sentences(&a.text, g.profile)?;
    if text.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no sentences", a.text.display())));
    }
    let r = PerplexityResult::combine(text.iter().map(|s| model.perplexity(s)));
    Ok(format!(
        "sentences={}\ntokens={}\noov={}\nlog10_prob={:.6}\nperplexity={:.6}\n",
        text.len(),
        r.token_count,
        r.oov_count,
        r.log10_prob_sum,
        r.perplexity
    ))
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    /// In-domain text (target language), one sentence per line.
    #[arg(long)]
    pub in_domain: PathBuf,
    /// General-domain text (target language). Without --parallel these
    /// sentences are the candidates.
    #[arg(long)]
    pub general: PathBuf,
    /// Candidate sentence pairs (`source<TAB>target`, mined output accepted).
    #[arg(long)]
    pub parallel: Option<PathBuf>,
    /// In-domain source-language text; needed for --pair-mode source/both.
    #[arg(long)]
    pub in_domain_source: Option<PathBuf>,
    /// Share of candidates to keep, in (0, 1].
    #[arg(long, default_value_t = SelectionConfig::default().acceptance_rate)]
    pub rate: f64,
    /// Weights of the tf-idf, cross-entropy and edit-distance ranks.
    #[arg(long, default_value = "1,1,1")]
    pub weights: String,
    /// Selected sentences, or pairs as `source<TAB>target` with --parallel.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-candidate score table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, default_value_t = SelectionConfig::default().lm_order)]
    pub lm_order: usize,
    /// In-domain sentences compared against by the edit-distance criterion.
    #[arg(long, default_value_t = SelectionConfig::default().edit_sample_size)]
    pub edit_sample_size: usize,
    /// Which side of a pair is scored: source, target or both.
    #[arg(long, default_value = "target")]
    pub pair_mode: PairMode,
}

impl SelectArgs {
    fn config(&self, g: &Globals) -> Result<SelectionConfig> {
        let w = parse_list("--weights", &self.weights)?;
        let weights: [f64; 3] = w
            .try_into()
            .map_err(|w: Vec<f64>| Error::InvalidArgument(format!("--weights needs 3 values, got {}", w.len())))?;
        let config = SelectionConfig {
            acceptance_rate: self.rate,
            edit_sample_size: self.edit_sample_size,
            pair_mode: self.pair_mode,
            weights,
            lm_order: self.lm_order,
            seed: g.seed,
            workers: g.workers,
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn select(g: &Globals, a: &SelectArgs) -> Result<String> {
    let config = a.config(g)?;
    let mut outputs = vec![a.out.as_path()];
    outputs.extend(a.table.as_deref());
    check_outputs(&outputs, g.force)?;
    let in_domain = read_sentences(&a.in_domain, g.profile)?;
    let general = read_sentences(&a.general, g.profile)?;
    let target_profile = select::build_profile(&in_domain, &general, &config)?;

    let (selection, kept) = match &a.parallel {
        None => {
            let (kept, sel) = select::select_for_lm(&general, &target_profile, &config)?;
            write_sentences(&a.out, g.force, &kept)?;
            (sel, kept.len())
        }
        Some(path) => {
            let corpus = read_parallel_tsv(path, g.profile)?;
            let source_profile = match (&a.in_domain_source, config.pair_mode) {
                (Some(p), _) => {
                    let ind = read_sentences(p, g.profile)?;
                    let gen: Vec<Sentence> = corpus.sources().cloned().collect();
                    Some(select::build_profile(&ind, &gen, &config)?)
                }
                (None, PairMode::Target) => None,
                (None, mode) => {
                    return Err(Error::InvalidArgument(format!(
                        "--pair-mode {mode} needs --in-domain-source"
                    )));
                }
            };
            let profiles = PairProfiles {
                source: source_profile.as_ref(),
                target: Some(&target_profile),
            };
            let (kept, sel) = select::select_pairs(&corpus, profiles, &config)?;
            write_atomic(&a.out, g.force, |w| {
                for p in &kept.pairs {
                    writeln!(w, "{}\t{}", p.source.joined(), p.target.joined())?;
                }
                Ok(())
            })?;
            (sel, kept.len())
        }
    };
    if let Some(t) = &a.table {
        write_atomic(t, g.force, |w| selection.write_tsv(w))?;
    }
    Ok(format!(
        "candidates={}\nselected={kept}\nrate={}\n",
        selection.table.len(),
        config.acceptance_rate
    ))
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    /// System output, one segment per line.
    #[arg(long)]
    pub hyp: PathBuf,
    /// Reference translation, line-aligned with --hyp.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// `segment_index<TAB>doc_id` map (0-based) for per-document scores.
    #[arg(long)]
    pub docs: Option<PathBuf>,
    /// Add-one smoothing of BLEU precisions for n >= 2.
    #[arg(long)]
    pub smooth: bool,
    /// TER without block shifts (plain word edit rate).
    #[arg(long)]
    pub no_shifts: bool,
    /// Name printed in the table.
    #[arg(long, default_value = "system")]
    pub system: String,
    /// Machine-readable report.
    #[arg(long)]
    pub out_tsv: Option<PathBuf>,
}

impl ScoreArgs {
    fn options(&self) -> EvalOptions {
        EvalOptions {
            smooth: self.smooth,
            shifts: !self.no_shifts,
            ..EvalOptions::default()
        }
    }
}

/// Read and score one system. Used by `score` and the demo.
pub fn evaluate(g: &Globals, a: &ScoreArgs) -> Result<eval::EvalReport> {
    let hyp = read_sentences(&a.hyp, g.profile)?;
    let reference = read_sentences(&a.reference, g.profile)?;
    let mut input = EvalInput::new(hyp, reference)?;
    if let Some(d) = &a.docs {
        let docs = eval::read_doc_map(open(d)?, input.len())?;
        input = input.with_documents(docs)?;
    }
    Ok(eval::report(&input, &a.options()))
}

pub fn metric_lines(r: &eval::EvalReport) -> String {
    let c = &r.corpus;
    let precisions: Vec<String> = c.bleu.precisions.iter().map(|p| format!("{p:.6}")).collect();
    format!(
        "bleu={:.2}\nbleu.precisions={}\nbleu.brevity_penalty={:.6}\nnist={:.4}\nter={:.2}\n",
        100.0 * c.bleu.score,
        precisions.join(","),
        c.bleu.brevity_penalty,
        c.nist,
        100.0 * c.ter
    )
}

pub fn score(g: &Globals, a: &ScoreArgs) -> Result<String> {
    if let Some(p) = &a.out_tsv {
        check_outputs(&[p], g.force)?;
    }
    let report = evaluate(g, a)?;
    let systems = [(a.system.as_str(), &report)];
    if let Some(p) = &a.out_tsv {
        write_atomic(p, g.force, |w| eval::write_report_tsv(&systems, w))?;
    }
    let mut out = metric_lines(&report);
    out.push('\n');
    out.push_str(&eval::render_table(&systems));
    Ok(out)
}
