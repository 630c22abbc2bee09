use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use super::lexicon::{index_of, TranslationLexicon, NULL_WORD};
use crate::error::{Error, Result};
use crate::text::ParallelCorpus;

/// Pairs per E-step shard. Fixed so that the reduction order, and hence every
/// floating point sum, does not depend on the thread count.
const SHARD_SIZE: usize = 256;

struct Encoded {
    /// `slots[j * (l + 1) + i]`: parameter slot of (source i, target j),
    /// source position 0 being NULL.
    slots: Vec<u32>,
    source_len: usize,
    target_len: usize,
}

/// Train IBM Model 1 `t(target | source)` with EM, starting from a uniform
/// table. Returns the lexicon and the corpus log-likelihood (natural log,
/// without the constant length term) under the parameters each iteration
/// started from.
pub fn train_model1(corpus: &ParallelCorpus, iterations: usize) -> Result<(TranslationLexicon, Vec<f64>)> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("Model 1 needs a non-empty parallel corpus".into()));
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument("Model 1 needs at least one iteration".into()));
    }

    let mut source_set: BTreeSet<String> = corpus.sources().flat_map(|s| s.tokens().iter().cloned()).collect();
    source_set.insert(NULL_WORD.to_string());
    let target_set: BTreeSet<String> = corpus.targets().flat_map(|s| s.tokens().iter().cloned()).collect();
    let sources: Vec<String> = source_set.into_iter().collect();
    let targets: Vec<String> = target_set.into_iter().collect();
    let source_index = index_of(&sources);
    let target_index = index_of(&targets);
    let null = source_index[NULL_WORD];

    let mut pair_ids: BTreeSet<(u32, u32)> = BTreeSet::new();
    let raw: Vec<(Vec<u32>, Vec<u32>)> = corpus
        .pairs
        .iter()
        .map(|p| {
            let mut src = vec![null];
            src.extend(p.source.tokens().iter().map(|t| source_index[t]));
            let tgt: Vec<u32> = p.target.tokens().iter().map(|t| target_index[t]).collect();
            for &f in &tgt {
                for &e in &src {
                    pair_ids.insert((e, f));
                }
            }
            (src, tgt)
        })
        .collect();
    let slot_keys: Vec<(u32, u32)> = pair_ids.into_iter().collect();
    let slot_of: HashMap<(u32, u32), u32> = slot_keys.iter().enumerate().map(|(i, &k)| (k, i as u32)).collect();
    let encoded: Vec<Encoded> = raw
        .iter()
        .map(|(src, tgt)| {
            let mut slots = Vec::with_capacity(src.len() * tgt.len());
            for &f in tgt {
                for &e in src {
                    slots.push(slot_of[&(e, f)]);
                }
            }
            Encoded {
                slots,
                source_len: src.len(),
                target_len: tgt.len(),
            }
        })
        .collect();

    let uniform = if targets.is_empty() {
        0.0
    } else {
        1.0 / targets.len() as f64
    };
    let mut t = vec![uniform; slot_keys.len()];
    let mut likelihoods = Vec::with_capacity(iterations);

    for _ in 0..iterations {
        let shards: Vec<(HashMap<u32, f64>, f64)> = encoded
            .par_chunks(SHARD_SIZE)
            .map(|chunk| expectation(chunk, &t))
            .collect();
        let mut counts = vec![0.0; slot_keys.len()];
        let mut ll = 0.0;
        for (shard, shard_ll) in &shards {
            for (&slot, &c) in shard {
                counts[slot as usize] += c;
            }
            ll += shard_ll;
        }
        likelihoods.push(ll);

        // slot_keys is sorted by source id, so each row is contiguous.
        let mut start = 0;
        while start < slot_keys.len() {
            let e = slot_keys[start].0;
            let mut end = start;
            let mut total = 0.0;
            while end < slot_keys.len() && slot_keys[end].0 == e {
                total += counts[end];
                end += 1;
            }
            for k in start..end {
                t[k] = if total > 0.0 { counts[k] / total } else { 0.0 };
            }
            start = end;
        }
    }

    let lookup: HashMap<(u32, u32), f64> = slot_keys
        .iter()
        .zip(&t)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&k, &p)| (k, p))
        .collect();
    Ok((
        TranslationLexicon::assemble(sources, source_index, targets, target_index, lookup),
        likelihoods,
    ))
}

fn expectation(chunk: &[Encoded], t: &[f64]) -> (HashMap<u32, f64>, f64) {
    let mut counts: HashMap<u32, f64> = HashMap::new();
    let mut ll = 0.0;
    for pair in chunk {
        let l1 = pair.source_len;
        for j in 0..pair.target_len {
            let row = &pair.slots[j * l1..(j + 1) * l1];
            let denom: f64 = row.iter().map(|&s| t[s as usize]).sum();
            if denom <= 0.0 {
                continue;
            }
            ll += (denom / l1 as f64).ln();
            for &s in row {
                *counts.entry(s).or_insert(0.0) += t[s as usize] / denom;
            }
        }
    }
    (counts, ll)
}
