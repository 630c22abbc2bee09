use std::collections::HashSet;

use crate::distance::levenshtein;

/// Longest block considered for a shift.
pub const MAX_SHIFT_SPAN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerEdits {
    /// Insertions, deletions, substitutions and shifts.
    pub edits: usize,
    pub shifts: usize,
    pub reference_len: usize,
}

impl TerEdits {
    /// `edits / max(|reference|, 1)`.
    pub fn rate(&self) -> f64 {
        self.edits as f64 / self.reference_len.max(1) as f64
    }
}

/// Move `block_len` tokens starting at `start` so that they begin at `dest`
/// in the sequence left after removing them.
pub fn apply_shift<T: Clone>(tokens: &[T], start: usize, block_len: usize, dest: usize) -> Vec<T> {
    let block = &tokens[start..start + block_len];
    let mut rest: Vec<T> = tokens[..start].to_vec();
    rest.extend_from_slice(&tokens[start + block_len..]);
    let mut out = Vec::with_capacity(tokens.len());
    out.extend_from_slice(&rest[..dest]);
    out.extend_from_slice(block);
    out.extend_from_slice(&rest[dest..]);
    out
}

/// Edit count of `hypothesis` against `reference`.
///
/// With `shifts` on, the hypothesis is greedily rearranged first: every round
/// tries each block of up to [`MAX_SHIFT_SPAN`] tokens that also occurs in the
/// reference at every destination, and applies the one that lowers the word
/// edit distance the most, as long as the saving exceeds the shift's own cost
/// of one edit. Earlier blocks and destinations win ties.
pub fn ter_edits<T: PartialEq + Clone + std::hash::Hash + Eq>(
    hypothesis: &[T],
    reference: &[T],
    shifts: bool,
) -> TerEdits {
    let mut current = hypothesis.to_vec();
    let mut distance = levenshtein(&current, reference);
    let mut shift_count = 0;

    if shifts {
        let spans: HashSet<&[T]> = (0..reference.len())
            .flat_map(|i| (i + 1..=reference.len().min(i + MAX_SHIFT_SPAN)).map(move |j| &reference[i..j]))
            .collect();
        loop {
            let mut best: Option<(usize, Vec<T>)> = None;
            let n = current.len();
            for start in 0..n {
                for len in 1..=MAX_SHIFT_SPAN.min(n - start) {
                    if !spans.contains(&current[start..start + len]) {
                        continue;
                    }
                    for dest in 0..=n - len {
                        if dest == start {
                            continue;
                        }
                        let moved = apply_shift(&current, start, len, dest);
                        let d = levenshtein(&moved, reference);
                        if d + 1 < distance && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                            best = Some((d, moved));
                        }
                    }
                }
            }
            match best {
                Some((d, moved)) => {
                    current = moved;
                    distance = d;
                    shift_count += 1;
                }
                None => break,
            }
        }
    }

    TerEdits {
        edits: distance + shift_count,
        shifts: shift_count,
        reference_len: reference.len(),
    }
}
