//! File readers shared by the subcommands, and atomic output.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::mine::DocumentPair;
use crate::text::{Document, ParallelCorpus, Sentence, SentencePair, TokenizationProfile};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    open(path)?
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))
}

/// One sentence per line; blank lines are kept as empty sentences so line
/// numbers stay aligned across files.
pub fn read_sentences(path: &Path, profile: TokenizationProfile) -> Result<Vec<Sentence>> {
    Ok(read_lines(path)?
        .into_iter()
        .map(|l| Sentence::new(l, profile))
        .collect())
}

pub fn read_parallel_files(src: &Path, tgt: &Path, profile: TokenizationProfile) -> Result<ParallelCorpus> {
    let s = read_sentences(src, profile)?;
    let t = read_sentences(tgt, profile)?;
    if s.len() != t.len() {
        return Err(Error::format(
            tgt.display().to_string(),
            t.len().min(s.len()) + 1,
            format!(
                "{} has {} lines but {} has {}",
                src.display(),
                s.len(),
                tgt.display(),
                t.len()
            ),
        ));
    }
    Ok(ParallelCorpus::new(
        s.into_iter()
            .zip(t)
            .map(|(source, target)| SentencePair { source, target })
            .collect(),
    ))
}

/// Parallel TSV: the last two tab-separated fields of each line are the
/// source and the target, so both `source<TAB>target` files and mined output
/// (`similarity<TAB>source<TAB>target`) are accepted.
pub fn read_parallel_tsv(path: &Path, profile: TokenizationProfile) -> Result<ParallelCorpus> {
    let mut pairs = Vec::new();
    for (k, line) in read_lines(path)?.into_iter().enumerate() {
        let mut fields = line.rsplitn(3, '\t');
        let (Some(target), Some(source)) = (fields.next(), fields.next()) else {
            return Err(Error::format(
                path.display().to_string(),
                k + 1,
                "expected source<TAB>target",
            ));
        };
        pairs.push(SentencePair {
            source: Sentence::new(source, profile),
            target: Sentence::new(target, profile),
        });
    }
    Ok(ParallelCorpus::new(pairs))
}

/// A manifest lists one document pair per line as
/// `source_path<TAB>target_path`, relative paths being taken from the
/// manifest's directory. Documents hold one sentence per line and are named
/// by the source file stem.
pub fn read_manifest(path: &Path, profile: TokenizationProfile) -> Result<Vec<DocumentPair>> {
    let base = path.parent().unwrap_or(Path::new(""));
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    for (k, line) in read_lines(path)?.into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::format(path.display().to_string(), k + 1, msg);
        let (s, t) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected source_path<TAB>target_path".into()))?;
        let (s, t) = (base.join(s), base.join(t));
        let id = s
            .file_stem()
            .map(|x| x.to_string_lossy().into_owned())
            .filter(|x| !x.is_empty())
            .ok_or_else(|| bad(format!("cannot name document {}", s.display())))?;
        if !seen.insert(id.clone()) {
            return Err(bad(format!("duplicate document id {id:?}")));
        }
        pairs.push(DocumentPair {
            source: Document::new(id.clone(), read_sentences(&s, profile)?),
            target: Document::new(id, read_sentences(&t, profile)?),
        });
    }
    Ok(pairs)
}

/// Refuse to start when an output exists and `force` is off, or when two
/// outputs name the same file.
pub fn check_outputs(paths: &[&Path], force: bool) -> Result<()> {
    let mut seen = BTreeSet::new();
    for p in paths {
        if !seen.insert(p.to_path_buf()) {
            return Err(Error::InvalidArgument(format!(
                "{} is given as two outputs",
                p.display()
            )));
        }
        if !force && p.exists() {
            return Err(Error::WouldOverwrite(p.to_path_buf()));
        }
    }
    Ok(())
}

/// Write through a temporary file in the target directory and rename it into
/// place, so readers never see a partial file.
pub fn write_atomic<F>(path: &Path, force: bool, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let tmp = NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut w = BufWriter::new(tmp);
    fill(&mut w)?;
    let tmp = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    let persisted = if force {
        tmp.persist(path)
    } else {
        tmp.persist_noclobber(path)
    };
    persisted.map_err(|e| {
        if e.error.kind() == std::io::ErrorKind::AlreadyExists {
            Error::WouldOverwrite(path.to_path_buf())
        } else {
            Error::io(path, e.error)
        }
    })?;
    Ok(())
}

pub fn write_string(path: &Path, force: bool, text: &str) -> Result<()> {
    write_atomic(path, force, |w| Ok(w.write_all(text.as_bytes())?))
}

pub fn write_sentences<'a>(path: &Path, force: bool, sentences: impl IntoIterator<Item = &'a Sentence>) -> Result<()> {
    write_atomic(path, force, |w| {
        for s in sentences {
            writeln!(w, "{}", s.joined())?;
        }
        Ok(())
    })
}
