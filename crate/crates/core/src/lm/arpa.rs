use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use super::{NGramEntry, NGramModel, LOG10_ZERO, UNK};
use crate::error::{Error, Result};

/// Write `model` in ARPA format. Entries are sorted by their words so the
/// output is byte-for-byte reproducible; numbers use the shortest decimal
/// representation that reads back to the same `f64`.
pub fn write_arpa<W: Write>(model: &NGramModel, mut out: W) -> Result<()> {
    writeln!(out, "\\data\\")?;
    for n in 1..=model.order() {
        writeln!(out, "ngram {}={}", n, model.ngram_count(n))?;
    }
    for n in 1..=model.order() {
        writeln!(out)?;
        writeln!(out, "\\{}-grams:", n)?;
        let mut entries: Vec<(Vec<&str>, NGramEntry)> = model.entries(n).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for (words, e) in entries {
            write!(out, "{}\t{}", e.log10_prob, words.join(" "))?;
            if let Some(bo) = e.log10_backoff {
                write!(out, "\t{}", bo)?;
            }
            writeln!(out)?;
        }
    }
    writeln!(out)?;
    writeln!(out, "\\end\\")?;
    Ok(())
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Arpa {
        line,
        message: message.into(),
    }
}

fn parse_float(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| err(line, format!("invalid number {s:?}")))
}

/// Read an ARPA back-off model. Missing `<s>`, `</s>` or `<unk>` unigrams are
/// added with probability zero so that every query stays defined.
pub fn read_arpa<R: BufRead>(input: R) -> Result<NGramModel> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));

    let mut next = |expect: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l.trim().to_string())),
            Some((n, Err(e))) => Err(err(n, e.to_string())),
            None => Err(err(0, format!("unexpected end of file, expected {expect}"))),
        }
    };

    let (n, header) = next("\\data\\")?;
    if header != "\\data\\" {
        return Err(err(n, format!("expected \\data\\, found {header:?}")));
    }

    let mut counts: Vec<usize> = Vec::new();
    let (mut n, mut line) = next("ngram counts")?;
    while let Some(rest) = line.strip_prefix("ngram ") {
        let (order, count) = rest
            .split_once('=')
            .ok_or_else(|| err(n, format!("malformed count line {line:?}")))?;
        let order: usize = order
            .trim()
            .parse()
            .map_err(|_| err(n, format!("malformed order in {line:?}")))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| err(n, format!("malformed count in {line:?}")))?;
        if order != counts.len() + 1 {
            return Err(err(n, format!("ngram orders out of sequence at {line:?}")));
        }
        counts.push(count);
        (n, line) = next("section header")?;
    }
    if counts.is_empty() {
        return Err(err(n, "no ngram counts in \\data\\ section"));
    }

    let order = counts.len();
    let mut vocab: BTreeSet<String> = BTreeSet::new();
    let mut levels: Vec<HashMap<Vec<String>, NGramEntry>> = Vec::with_capacity(order);

    for (k, &expected) in counts.iter().enumerate() {
        let want = k + 1;
        let header = format!("\\{}-grams:", want);
        if line != header {
            return Err(err(n, format!("expected {header}, found {line:?}")));
        }
        let mut level = HashMap::with_capacity(expected);
        loop {
            (n, line) = next("n-gram entry or section end")?;
            if line.starts_with('\\') {
                break;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != want + 1 && fields.len() != want + 2 {
                return Err(err(
                    n,
                    format!("expected {} words in {}-gram entry, found {:?}", want, want, line),
                ));
            }
            let log10_prob = parse_float(fields[0], n)?;
            let words: Vec<String> = fields[1..=want].iter().map(|s| s.to_string()).collect();
            let log10_backoff = match fields.get(want + 1) {
                Some(b) => Some(parse_float(b, n)?),
                None => None,
            };
            if want == 1 {
                vocab.insert(words[0].clone());
            } else if let Some(w) = words.iter().find(|w| !vocab.contains(*w)) {
                return Err(err(n, format!("word {w:?} has no unigram entry")));
            }
            level.insert(
                words,
                NGramEntry {
                    log10_prob,
                    log10_backoff,
                },
            );
        }
        if level.len() != expected {
            return Err(err(
                n,
                format!(
                    "\\data\\ declares {} {}-grams but {} were listed",
                    expected,
                    want,
                    level.len()
                ),
            ));
        }
        levels.push(level);
    }
    if line != "\\end\\" {
        return Err(err(n, format!("expected \\end\\, found {line:?}")));
    }

    for special in [super::BOS, super::EOS, UNK] {
        if vocab.insert(special.to_string()) {
            levels[0].insert(
                vec![special.to_string()],
                NGramEntry {
                    log10_prob: LOG10_ZERO,
                    log10_backoff: None,
                },
            );
        }
    }
    NGramModel::from_parts(order, vocab, levels, Vec::new())
}
