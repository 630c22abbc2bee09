//! C ABI over `corpusforge`.
//!
//! Conventions:
//! - every function returns a [`CfStatus`]; results go through out-pointers,
//!   which are left untouched on failure;
//! - text arguments are NUL-terminated UTF-8, and multi-sentence text is one
//!   sentence per line (`\n`, a trailing newline is ignored), tokenized with
//!   the default profile (lowercased, punctuation split off);
//! - objects are opaque handles released with their `*_free` function, and
//!   strings returned by the library are released with [`cf_string_free`];
//! - after a failure, [`cf_last_error`] describes it on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use corpusforge::eval::{self, EvalInput};
use corpusforge::lm::{self, NGramModel, PerplexityResult};
use corpusforge::mine::{self, DocumentPair, LexiconScorer, MinedPair, MiningConfig, ScoreMatrix, Step};
use corpusforge::text::{Document, ParallelCorpus, Sentence, SentencePair};
use corpusforge::word_align::{train_model1, TranslationLexicon};
use corpusforge::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    EmptyInput = 6,
    /// The caller's buffer is too small; the required length was written.
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStepKind {
    Match = 0,
    /// A source sentence left unaligned.
    GapSource = 1,
    /// A target sentence left unaligned.
    GapTarget = 2,
}

/// One step of a sentence alignment path. The index of the side a gap skips
/// over is -1.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CfStep {
    pub kind: CfStepKind,
    pub source: i64,
    pub target: i64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CfPerplexity {
    pub log10_prob: f64,
    /// Scored tokens, `</s>` included.
    pub tokens: u64,
    pub oov: u64,
    pub perplexity: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CfBleu {
    /// In [0, 100].
    pub score: f64,
    pub precisions: [f64; 4],
    pub brevity_penalty: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CfMinedPair {
    pub source_index: u64,
    pub target_index: u64,
    pub similarity: f64,
}

pub struct CfLanguageModel(NGramModel);
pub struct CfLexicon(TranslationLexicon);
pub struct CfMinedPairs(Vec<MinedPair>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CfStatus, String);

fn status_of(e: &Error) -> CfStatus {
    match e {
        Error::Io { .. } | Error::Stream(_) | Error::WouldOverwrite(_) => CfStatus::Io,
        Error::Xml { .. } | Error::Arpa { .. } | Error::Format { .. } => CfStatus::Parse,
        Error::EmptyInput(_) => CfStatus::EmptyInput,
        Error::Stage { source, .. } => status_of(source),
        _ => CfStatus::InvalidArgument,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn fail<T>(status: CfStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

/// Run `f`, turning errors and panics into a status and a thread-local message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CfStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {message}"));
            CfStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(CfStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(CfStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn lines(p: *const c_char, what: &str) -> Result<Vec<Sentence>, Failure> {
    let t = text(p, what)?;
    let t = t.strip_suffix('\n').unwrap_or(t);
    if t.is_empty() {
        return Ok(Vec::new());
    }
    Ok(t.split('\n')
        .map(|l| Sentence::parse(l.strip_suffix('\r').unwrap_or(l)))
        .collect())
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .map_or_else(|| fail(CfStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .map_or_else(|| fail(CfStatus::NullPointer, format!("{what} is null")), Ok)
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .or_else(|_| fail(CfStatus::InvalidArgument, "result contains a NUL byte"))
}

fn io_failure(path: &str, e: std::io::Error) -> Failure {
    Failure(CfStatus::Io, format!("i/o error on {path}: {e}"))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// -- language models --------------------------------------------------------

/// Train an interpolated Kneser-Ney model on `text`.
///
/// # Safety
/// `text` must be a valid C string and `model` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_lm_train(
    text: *const c_char,
    order: u32,
    min_count: u32,
    model: *mut *mut CfLanguageModel,
) -> CfStatus {
    guard(|| {
        let corpus = lines(text, "text")?;
        let slot = out(model, "model")?;
        let m = lm::train_lm(&corpus, order as usize, min_count as usize)?;
        *slot = Box::into_raw(Box::new(CfLanguageModel(m)));
        Ok(())
    })
}

/// # Safety
/// `path` must be a valid C string and `model` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_lm_read_arpa(path: *const c_char, model: *mut *mut CfLanguageModel) -> CfStatus {
    guard(|| {
        let path = self::text(path, "path")?;
        let slot = out(model, "model")?;
        let file = File::open(path).map_err(|e| io_failure(path, e))?;
        let m = lm::read_arpa(BufReader::new(file))?;
        *slot = Box::into_raw(Box::new(CfLanguageModel(m)));
        Ok(())
    })
}

/// Write the model as ARPA, replacing `path` if it exists.
///
/// # Safety
/// `model` must be a live handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn cf_lm_write_arpa(model: *const CfLanguageModel, path: *const c_char) -> CfStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let path = self::text(path, "path")?;
        let file = File::create(path).map_err(|e| io_failure(path, e))?;
        lm::write_arpa(&m.0, BufWriter::new(file))?;
        Ok(())
    })
}

/// log10 P(word | context), where `context` is space-separated tokens,
/// oldest first. Context and word are used verbatim, without tokenization.
///
/// # Safety
/// `model` must be a live handle, `context` and `word` valid C strings, and
/// `log10_prob` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_lm_log_prob(
    model: *const CfLanguageModel,
    context: *const c_char,
    word: *const c_char,
    log10_prob: *mut f64,
) -> CfStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let ctx: Vec<&str> = text(context, "context")?.split_whitespace().collect();
        let word = text(word, "word")?;
        *out(log10_prob, "log10_prob")? = m.0.log_prob(&ctx, word);
        Ok(())
    })
}

/// Corpus perplexity of `text` (one sentence per line).
///
/// # Safety
/// `model` must be a live handle, `text` a valid C string and `result` a
/// valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_lm_perplexity(
    model: *const CfLanguageModel,
    text: *const c_char,
    result: *mut CfPerplexity,
) -> CfStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let corpus = lines(text, "text")?;
        let slot = out(result, "result")?;
        let r = PerplexityResult::combine(corpus.iter().map(|s| m.0.perplexity(s)));
        *slot = CfPerplexity {
            log10_prob: r.log10_prob_sum,
            tokens: r.token_count as u64,
            oov: r.oov_count as u64,
            perplexity: r.perplexity,
        };
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cf_lm_free(model: *mut CfLanguageModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

// -- lexicons ---------------------------------------------------------------

unsafe fn parallel(source: *const c_char, target: *const c_char) -> Result<ParallelCorpus, Failure> {
    let (src, tgt) = (lines(source, "source")?, lines(target, "target")?);
    if src.len() != tgt.len() {
        return fail(
            CfStatus::InvalidArgument,
            format!("{} source lines vs {} target lines", src.len(), tgt.len()),
        );
    }
    Ok(ParallelCorpus::new(
        src.into_iter()
            .zip(tgt)
            .map(|(source, target)| SentencePair { source, target })
            .collect(),
    ))
}

/// Train a source-to-target IBM Model 1 lexicon t(target | source) on
/// line-parallel text. `log_likelihood`, when not null, must have room for
/// `iterations` values and receives the log-likelihood after each iteration.
///
/// # Safety
/// `source` and `target` must be valid C strings, `lexicon` a valid
/// out-pointer, and `log_likelihood` null or writable for `iterations` values.
#[no_mangle]
pub unsafe extern "C" fn cf_lexicon_train(
    source: *const c_char,
    target: *const c_char,
    iterations: u32,
    lexicon: *mut *mut CfLexicon,
    log_likelihood: *mut f64,
) -> CfStatus {
    guard(|| {
        let corpus = parallel(source, target)?;
        let slot = out(lexicon, "lexicon")?;
        let (lex, ll) = train_model1(&corpus, iterations as usize)?;
        if !log_likelihood.is_null() {
            ptr::copy_nonoverlapping(ll.as_ptr(), log_likelihood, ll.len().min(iterations as usize));
        }
        *slot = Box::into_raw(Box::new(CfLexicon(lex)));
        Ok(())
    })
}

/// Read a `source\ttarget\tprob` lexicon file.
///
/// # Safety
/// `path` must be a valid C string and `lexicon` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_lexicon_read(path: *const c_char, lexicon: *mut *mut CfLexicon) -> CfStatus {
    guard(|| {
        let path = self::text(path, "path")?;
        let slot = out(lexicon, "lexicon")?;
        let file = File::open(path).map_err(|e| io_failure(path, e))?;
        let lex = TranslationLexicon::read_tsv(BufReader::new(file))?;
        *slot = Box::into_raw(Box::new(CfLexicon(lex)));
        Ok(())
    })
}

/// The lexicon as `source\ttarget\tprob` lines; free with [`cf_string_free`].
///
/// # Safety
/// `lexicon` must be a live handle and `tsv` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_lexicon_to_tsv(lexicon: *const CfLexicon, tsv: *mut *mut c_char) -> CfStatus {
    guard(|| {
        let lex = handle(lexicon, "lexicon")?;
        let slot = out(tsv, "tsv")?;
        let mut buf = Vec::new();
        lex.0.write_tsv(&mut buf)?;
        *slot = owned_string(String::from_utf8(buf).expect("lexicon words are UTF-8"))?;
        Ok(())
    })
}

/// t(target | source); 0 for unknown pairs. Words are used verbatim.
///
/// # Safety
/// `lexicon` must be a live handle, the words valid C strings and `prob` a
/// valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_lexicon_prob(
    lexicon: *const CfLexicon,
    source: *const c_char,
    target: *const c_char,
    prob: *mut f64,
) -> CfStatus {
    guard(|| {
        let lex = handle(lexicon, "lexicon")?;
        let (s, t) = (text(source, "source")?, text(target, "target")?);
        *out(prob, "prob")? = lex.0.prob(s, t);
        Ok(())
    })
}

/// # Safety
/// `lexicon` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cf_lexicon_free(lexicon: *mut CfLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

// -- mining -----------------------------------------------------------------

/// Lexicon-coverage similarity of one sentence pair, in [0, 1]. Lexicon
/// entries below `min_prob` are ignored.
///
/// # Safety
/// `lexicon` must be a live handle, the sentences valid C strings and
/// `similarity` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_score_pair(
    lexicon: *const CfLexicon,
    source: *const c_char,
    target: *const c_char,
    min_prob: f64,
    similarity: *mut f64,
) -> CfStatus {
    guard(|| {
        let lex = handle(lexicon, "lexicon")?;
        let s = Sentence::parse(text(source, "source")?);
        let t = Sentence::parse(text(target, "target")?);
        *out(similarity, "similarity")? = mine::score_pair(&lex.0, &s, &t, min_prob);
        Ok(())
    })
}

/// Global alignment of a row-major `rows x cols` similarity matrix with a
/// per-gap penalty. Writes the path into `steps` (capacity `capacity`), its
/// length into `steps_len` and its score into `score`. When the buffer is
/// too small, only `steps_len` is written and `BufferTooSmall` is returned;
/// `rows + cols` steps always suffice.
///
/// # Safety
/// `scores` must be readable for `rows * cols` values (it may be null when
/// that is 0), `steps` writable for `capacity` steps, and `steps_len` and
/// `score` valid out-pointers.
#[no_mangle]
pub unsafe extern "C" fn cf_nw_align(
    scores: *const f64,
    rows: usize,
    cols: usize,
    gap_penalty: f64,
    steps: *mut CfStep,
    capacity: usize,
    steps_len: *mut usize,
    score: *mut f64,
) -> CfStatus {
    guard(|| {
        let cells = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(CfStatus::InvalidArgument, "matrix size overflows".into()))?;
        let values: &[f64] = if cells == 0 {
            &[]
        } else if scores.is_null() {
            return fail(CfStatus::NullPointer, "scores is null");
        } else {
            std::slice::from_raw_parts(scores, cells)
        };
        if !gap_penalty.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return fail(CfStatus::InvalidArgument, "scores and gap penalty must be finite");
        }
        let len_slot = out(steps_len, "steps_len")?;
        let score_slot = out(score, "score")?;
        let path = mine::nw_align(
            &ScoreMatrix::from_fn(rows, cols, |i, j| values[i * cols + j]),
            gap_penalty,
        );
        *len_slot = path.steps.len();
        if path.steps.len() > capacity {
            return fail(
                CfStatus::BufferTooSmall,
                format!("path has {} steps, buffer holds {capacity}", path.steps.len()),
            );
        }
        if !path.steps.is_empty() && steps.is_null() {
            return fail(CfStatus::NullPointer, "steps is null");
        }
        for (k, s) in path.steps.iter().enumerate() {
            let step = match *s {
                Step::Match(i, j) => CfStep {
                    kind: CfStepKind::Match,
                    source: i as i64,
                    target: j as i64,
                },
                Step::GapSource(i) => CfStep {
                    kind: CfStepKind::GapSource,
                    source: i as i64,
                    target: -1,
                },
                Step::GapTarget(j) => CfStep {
                    kind: CfStepKind::GapTarget,
                    source: -1,
                    target: j as i64,
                },
            };
            steps.add(k).write(step);
        }
        *score_slot = path.score;
        Ok(())
    })
}

/// Mine parallel sentences from one comparable document pair (one sentence
/// per line on each side).
///
/// # Safety
/// `lexicon` must be a live handle, the documents valid C strings and `pairs`
/// a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_mine_documents(
    lexicon: *const CfLexicon,
    source: *const c_char,
    target: *const c_char,
    threshold: f64,
    gap_penalty: f64,
    min_prob: f64,
    pairs: *mut *mut CfMinedPairs,
) -> CfStatus {
    guard(|| {
        let lex = handle(lexicon, "lexicon")?;
        let pair = DocumentPair {
            source: Document::new("source", lines(source, "source")?),
            target: Document::new("target", lines(target, "target")?),
        };
        let slot = out(pairs, "pairs")?;
        let config = MiningConfig {
            threshold,
            gap_penalty,
            min_prob,
            workers: 1,
        };
        config.validate()?;
        let scorer = LexiconScorer {
            lexicon: &lex.0,
            min_prob,
        };
        let mined = mine::mine_document_pair(&pair, &scorer, &config);
        *slot = Box::into_raw(Box::new(CfMinedPairs(mined)));
        Ok(())
    })
}

/// # Safety
/// `pairs` must be a live handle and `len` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_mined_pairs_len(pairs: *const CfMinedPairs, len: *mut usize) -> CfStatus {
    guard(|| {
        let p = handle(pairs, "pairs")?;
        *out(len, "len")? = p.0.len();
        Ok(())
    })
}

/// Sentence indices and similarity of the `index`-th mined pair.
///
/// # Safety
/// `pairs` must be a live handle and `pair` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_mined_pairs_get(
    pairs: *const CfMinedPairs,
    index: usize,
    pair: *mut CfMinedPair,
) -> CfStatus {
    guard(|| {
        let p = handle(pairs, "pairs")?;
        let slot = out(pair, "pair")?;
        let Some(m) = p.0.get(index) else {
            return fail(
                CfStatus::InvalidArgument,
                format!("index {index} out of range ({} pairs)", p.0.len()),
            );
        };
        *slot = CfMinedPair {
            source_index: m.source_index as u64,
            target_index: m.target_index as u64,
            similarity: m.similarity,
        };
        Ok(())
    })
}

/// # Safety
/// `pairs` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cf_mined_pairs_free(pairs: *mut CfMinedPairs) {
    if !pairs.is_null() {
        drop(Box::from_raw(pairs));
    }
}

// -- evaluation -------------------------------------------------------------

unsafe fn eval_input(hypotheses: *const c_char, references: *const c_char) -> Result<EvalInput, Failure> {
    Ok(EvalInput::new(
        lines(hypotheses, "hypotheses")?,
        lines(references, "references")?,
    )?)
}

/// Corpus BLEU-4 of line-aligned hypotheses against single references.
///
/// # Safety
/// The texts must be valid C strings and `result` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_bleu(
    hypotheses: *const c_char,
    references: *const c_char,
    smooth: bool,
    result: *mut CfBleu,
) -> CfStatus {
    guard(|| {
        let input = eval_input(hypotheses, references)?;
        let slot = out(result, "result")?;
        let b = eval::bleu(&input, 4, smooth);
        let mut precisions = [0.0; 4];
        for (p, v) in precisions.iter_mut().zip(&b.precisions) {
            *p = *v;
        }
        *slot = CfBleu {
            score: 100.0 * b.score,
            precisions,
            brevity_penalty: b.brevity_penalty,
        };
        Ok(())
    })
}

/// Corpus TER in percent: total edits over total reference length. With
/// `shifts` false, block moves are not considered.
///
/// # Safety
/// The texts must be valid C strings and `ter` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_ter(
    hypotheses: *const c_char,
    references: *const c_char,
    shifts: bool,
    ter: *mut f64,
) -> CfStatus {
    guard(|| {
        let input = eval_input(hypotheses, references)?;
        *out(ter, "ter")? = 100.0 * eval::corpus_ter(&input, shifts);
        Ok(())
    })
}
