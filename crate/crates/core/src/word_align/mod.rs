//! IBM Model 1 lexicons, Viterbi word alignment and symmetrization.

mod lexicon;
mod model1;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use lexicon::{TranslationLexicon, NULL_WORD};
pub use model1::train_model1;

use crate::error::{Error, Result};
use crate::text::Sentence;

/// Word links `(source index, target index)` for one sentence pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentLinks {
    pub source_len: usize,
    pub target_len: usize,
    pub links: BTreeSet<(usize, usize)>,
}

impl AlignmentLinks {
    pub fn new(source_len: usize, target_len: usize, links: impl IntoIterator<Item = (usize, usize)>) -> Self {
        AlignmentLinks {
            source_len,
            target_len,
            links: links.into_iter().collect(),
        }
    }

    fn check_bounds(&self) -> Result<()> {
        match self
            .links
            .iter()
            .find(|&&(i, j)| i >= self.source_len || j >= self.target_len)
        {
            Some(&(i, j)) => Err(Error::LinkOutOfBounds {
                source_index: i,
                target_index: j,
                source_len: self.source_len,
                target_len: self.target_len,
            }),
            None => Ok(()),
        }
    }

    /// Links with source and target exchanged.
    pub fn transposed(&self) -> AlignmentLinks {
        AlignmentLinks::new(
            self.target_len,
            self.source_len,
            self.links.iter().map(|&(i, j)| (j, i)),
        )
    }

    /// `i-j` pairs separated by spaces (the usual "Pharaoh" format).
    pub fn to_pharaoh(&self) -> String {
        self.links
            .iter()
            .map(|(i, j)| format!("{i}-{j}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Link each target word to its most probable source word, NULL included.
/// Ties go to the lower source position; NULL wins only when it is strictly
/// more probable than every word, and words it wins get no link.
pub fn viterbi_align(lexicon: &TranslationLexicon, source: &Sentence, target: &Sentence) -> AlignmentLinks {
    let mut links = BTreeSet::new();
    for (j, f) in target.tokens().iter().enumerate() {
        let mut best = 0.0;
        let mut best_i: Option<usize> = None;
        for (i, e) in source.tokens().iter().enumerate() {
            let p = lexicon.prob(e, f);
            if p > best {
                best = p;
                best_i = Some(i);
            }
        }
        if let Some(i) = best_i {
            if best >= lexicon.prob(NULL_WORD, f) {
                links.insert((i, j));
            }
        }
    }
    AlignmentLinks {
        source_len: source.len(),
        target_len: target.len(),
        links,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    Intersection,
    Union,
    GrowDiag,
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(Heuristic::Intersection),
            "union" => Ok(Heuristic::Union),
            "grow-diag" => Ok(Heuristic::GrowDiag),
            other => Err(Error::InvalidArgument(format!(
                "unknown heuristic {other:?} (intersection, union, grow-diag)"
            ))),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Intersection => "intersection",
            Heuristic::Union => "union",
            Heuristic::GrowDiag => "grow-diag",
        })
    }
}

const NEIGHBOURS: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// Merge a source-to-target and a target-to-source alignment. `backward`
/// must already be expressed in forward orientation.
///
/// `GrowDiag` starts from the intersection and repeatedly adds union links
/// that touch an existing link (8-neighbourhood) and cover a so far
/// unaligned source or target word, scanning links in row-major order,
/// until nothing changes.
pub fn symmetrize(forward: &AlignmentLinks, backward: &AlignmentLinks, heuristic: Heuristic) -> Result<AlignmentLinks> {
    if (forward.source_len, forward.target_len) != (backward.source_len, backward.target_len) {
        return Err(Error::InvalidArgument(format!(
            "alignment dimensions differ: {}x{} vs {}x{}",
            forward.source_len, forward.target_len, backward.source_len, backward.target_len
        )));
    }
    forward.check_bounds()?;
    backward.check_bounds()?;

    let (rows, cols) = (forward.source_len, forward.target_len);
    let union: BTreeSet<(usize, usize)> = forward.links.union(&backward.links).copied().collect();
    let mut result: BTreeSet<(usize, usize)> = forward.links.intersection(&backward.links).copied().collect();

    match heuristic {
        Heuristic::Intersection => {}
        Heuristic::Union => result = union,
        Heuristic::GrowDiag => {
            let mut src_aligned = vec![false; rows];
            let mut tgt_aligned = vec![false; cols];
            for &(i, j) in &result {
                src_aligned[i] = true;
                tgt_aligned[j] = true;
            }
            loop {
                let mut added = false;
                let snapshot: Vec<(usize, usize)> = result.iter().copied().collect();
                for (i, j) in snapshot {
                    for (di, dj) in NEIGHBOURS {
                        let (Some(ni), Some(nj)) = (i.checked_add_signed(di), j.checked_add_signed(dj)) else {
                            continue;
                        };
                        if ni >= rows || nj >= cols {
                            continue;
                        }
                        let cand = (ni, nj);
                        if union.contains(&cand) && !result.contains(&cand) && (!src_aligned[ni] || !tgt_aligned[nj]) {
                            result.insert(cand);
                            src_aligned[ni] = true;
                            tgt_aligned[nj] = true;
                            added = true;
                        }
                    }
                }
                if !added {
                    break;
                }
            }
        }
    }
    Ok(AlignmentLinks {
        source_len: rows,
        target_len: cols,
        links: result,
    })
}

#[cfg(test)]
mod tests;
