use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::word_align::TranslationLexicon;

fn doc(id: &str, lines: &[&str]) -> Document {
    Document::new(id, lines.iter().map(|l| Sentence::parse(l)).collect())
}

fn config(threshold: f64, gap_penalty: f64) -> MiningConfig {
    MiningConfig {
        threshold,
        gap_penalty,
        ..MiningConfig::default()
    }
}

/// Random documents over a 40-word vocabulary; each target copies a source
/// sentence with probability 1/2, with a word or two swapped out.
fn random_collection(seed: u64, n: usize) -> Vec<DocumentPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentence = |rng: &mut ChaCha8Rng| -> Vec<String> {
        (0..rng.gen_range(2..8))
            .map(|_| format!("w{}", rng.gen_range(0..40)))
            .collect()
    };
    (0..n)
        .map(|k| {
            let src: Vec<Vec<String>> = (0..rng.gen_range(0..8)).map(|_| sentence(&mut rng)).collect();
            let mut tgt = Vec::new();
            for s in &src {
                if rng.gen_bool(0.5) {
                    let mut t = s.clone();
                    let pos = rng.gen_range(0..t.len());
                    t[pos] = format!("w{}", rng.gen_range(0..40));
                    tgt.push(t);
                }
                if rng.gen_bool(0.3) {
                    tgt.push(sentence(&mut rng));
                }
            }
            let to_doc = |id: String, v: &[Vec<String>]| {
                Document::new(id, v.iter().map(|s| Sentence::parse(&s.join(" "))).collect())
            };
            DocumentPair {
                source: to_doc(format!("s{k}"), &src),
                target: to_doc(format!("t{k}"), &tgt),
            }
        })
        .collect()
}

fn vocab_lexicon() -> TranslationLexicon {
    let words: Vec<String> = (0..40).map(|k| format!("w{k}")).collect();
    TranslationLexicon::identity(&words)
}

#[test]
fn identical_documents_mine_everything() {
    let lex = TranslationLexicon::identity(&["a", "b", "c", "d"]);
    let d = doc("x", &["a b", "c d"]);
    let pair = DocumentPair {
        source: d.clone(),
        target: d,
    };
    let scorer = LexiconScorer {
        lexicon: &lex,
        min_prob: 0.1,
    };
    let mined = mine_document_pair(&pair, &scorer, &config(0.5, -0.1));
    assert_eq!(mined.len(), 2);
    assert!(mined.iter().all(|m| m.similarity == 1.0));
    assert!(mine_document_pair(&pair, &scorer, &config(1.01, -0.1)).is_empty());
}

#[test]
fn planted_pair_among_unrelated_sentences() {
    let lex = TranslationLexicon::from_entries([("house", "haus", 1.0), ("red", "rot", 1.0)]);
    let pair = DocumentPair {
        source: doc("en", &["the sky", "red house", "cats sleep"]),
        target: doc("de", &["hunde bellen", "rot haus", "der baum"]),
    };
    let scorer = LexiconScorer {
        lexicon: &lex,
        min_prob: 0.1,
    };
    let mined = mine_document_pair(&pair, &scorer, &config(0.5, -0.1));
    assert_eq!(mined.len(), 1);
    assert_eq!((mined[0].source_index, mined[0].target_index), (1, 1));
    assert_eq!(mined[0].source.joined(), "red house");
    assert_eq!(
        (mined[0].source_doc.as_str(), mined[0].target_doc.as_str()),
        ("en", "de")
    );
}

#[test]
fn empty_collection() {
    let lex = vocab_lexicon();
    let scorer = LexiconScorer {
        lexicon: &lex,
        min_prob: 0.1,
    };
    let out = mine_collection(&[], &scorer, &MiningConfig::default()).unwrap();
    assert!(out.corpus().is_empty());
    assert_eq!(out.report.pairs_scanned, 0);
}

#[test]
fn invalid_configs_are_rejected() {
    let lex = vocab_lexicon();
    let scorer = LexiconScorer {
        lexicon: &lex,
        min_prob: 0.1,
    };
    for bad in [config(1.5, -0.1), config(0.5, 0.1), config(f64::NAN, -0.1)] {
        assert!(mine_collection(&[], &scorer, &bad).is_err());
    }
    let zero = MiningConfig {
        workers: 0,
        ..MiningConfig::default()
    };
    assert!(mine_collection(&[], &scorer, &zero).is_err());
    let anon = DocumentPair {
        source: doc("", &["a"]),
        target: doc("t", &["a"]),
    };
    assert!(mine_collection(&[anon], &scorer, &MiningConfig::default()).is_err());
}

fn render(out: &MiningOutput) -> Vec<u8> {
    let mut buf = Vec::new();
    out.write_tsv(&mut buf).unwrap();
    buf
}

#[test]
fn worker_count_does_not_change_output() {
    let lex = vocab_lexicon();
    let scorer = LexiconScorer {
        lexicon: &lex,
        min_prob: 0.1,
    };
    let pairs = random_collection(7, 50);
    let base = mine_collection(&pairs, &scorer, &config(0.5, -0.1)).unwrap();
    assert!(!base.pairs.is_empty());
    for workers in [2, 4, 8] {
        let cfg = MiningConfig {
            workers,
            ..config(0.5, -0.1)
        };
        let other = mine_collection(&pairs, &scorer, &cfg).unwrap();
        assert_eq!(render(&other), render(&base));
        assert_eq!(other.report.yields, base.report.yields);
    }
}

#[test]
fn report_counts_and_rendering() {
    let lex = vocab_lexicon();
    let scorer = LexiconScorer {
        lexicon: &lex,
        min_prob: 0.1,
    };
    let pairs = random_collection(3, 10);
    let out = mine_collection(&pairs, &scorer, &config(0.5, -0.1)).unwrap();
    assert_eq!(out.report.pairs_scanned, 10);
    assert_eq!(
        out.report.yields.iter().map(|y| y.emitted).sum::<usize>(),
        out.pairs.len()
    );
    let kv = out.report.to_key_values();
    assert!(kv.contains("pairs_scanned=10\n"));
    assert!(kv.contains(&format!("pairs_emitted={}\n", out.pairs.len())));
    let tsv = String::from_utf8(render(&out)).unwrap();
    for line in tsv.lines() {
        let sim = line.split('\t').next().unwrap();
        assert_eq!(sim.split('.').nth(1).unwrap().len(), 6);
    }
}

fn gold_from_run(pairs: &[DocumentPair], scorer: &dyn PairScorer, cfg: &MiningConfig) -> Vec<GoldDocument> {
    pairs
        .iter()
        .map(|p| GoldDocument {
            links: mine_document_pair(p, scorer, cfg)
                .iter()
                .map(|m| (m.source_index, m.target_index))
                .collect(),
            pair: p.clone(),
        })
        .collect()
}

#[test]
fn tuning_recovers_planted_parameters() {
    let lex = vocab_lexicon();
    let scorer = LexiconScorer {
        lexicon: &lex,
        min_prob: 0.1,
    };
    let pairs = random_collection(11, 30);
    let gold = gold_from_run(&pairs, &scorer, &config(0.6, -0.2));
    let r = tune(&gold, &scorer, &default_threshold_grid(), &default_penalty_grid()).unwrap();
    assert_eq!(r.f1, 1.0);
    assert_eq!(r.grid.len(), 45);
    assert!(r
        .grid
        .iter()
        .any(|g| g.threshold == 0.6 && g.gap_penalty == -0.2 && g.f1 == 1.0));
}

#[test]
fn tuning_tie_break_is_order_independent() {
    let lex = vocab_lexicon();
    let scorer = LexiconScorer {
        lexicon: &lex,
        min_prob: 0.1,
    };
    let gold = gold_from_run(&random_collection(5, 20), &scorer, &config(0.5, -0.1));
    let (ts, ps) = (default_threshold_grid(), default_penalty_grid());
    let a = tune(&gold, &scorer, &ts, &ps).unwrap();
    let dup = |v: &[f64]| v.iter().rev().chain(v.iter()).copied().collect::<Vec<_>>();
    let b = tune(&gold, &scorer, &dup(&ts), &dup(&ps)).unwrap();
    assert_eq!(
        (a.best_threshold, a.best_gap_penalty),
        (b.best_threshold, b.best_gap_penalty)
    );
    let best_f1 = a.grid.iter().map(|g| g.f1).fold(0.0, f64::max);
    let tied: Vec<_> = a.grid.iter().filter(|g| g.f1 == best_f1).collect();
    let min_t = tied.iter().map(|g| g.threshold).fold(f64::INFINITY, f64::min);
    let max_g = tied
        .iter()
        .filter(|g| g.threshold == min_t)
        .map(|g| g.gap_penalty)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!((a.best_threshold, a.best_gap_penalty), (min_t, max_g));
}

#[test]
fn tuning_degenerate_cases() {
    let lex = vocab_lexicon();
    let scorer = LexiconScorer {
        lexicon: &lex,
        min_prob: 0.1,
    };
    let gold = gold_from_run(&random_collection(2, 5), &scorer, &config(0.5, -0.1));

    let one = tune(&gold, &scorer, &[0.3], &[-0.4]).unwrap();
    assert_eq!((one.best_threshold, one.best_gap_penalty), (0.3, -0.4));

    let zero = |_: &Sentence, _: &Sentence| 0.0;
    let r = tune(&gold, &zero, &[0.5], &[-0.1]).unwrap();
    assert_eq!((r.precision, r.f1), (0.0, 0.0));

    assert!(matches!(tune(&[], &scorer, &[0.5], &[-0.1]), Err(Error::EmptyInput(_))));
    assert!(tune(&gold, &scorer, &[], &[-0.1]).is_err());
    let mut bad = gold[0].clone();
    bad.links.insert((99, 0));
    assert!(matches!(
        tune(&[bad], &scorer, &[0.5], &[-0.1]),
        Err(Error::LinkOutOfBounds { .. })
    ));
}

#[test]
fn gold_tsv() {
    let g = read_gold_tsv("d1\t0\t1\nd1\t2\t2\n\nd2\t0\t0\n".as_bytes()).unwrap();
    assert_eq!(g["d1"], BTreeSet::from([(0, 1), (2, 2)]));
    assert_eq!(g["d2"], BTreeSet::from([(0, 0)]));
    assert!(read_gold_tsv("d1\t0\n".as_bytes()).is_err());
    assert!(read_gold_tsv("d1\tx\t0\n".as_bytes()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raising_threshold_never_mines_more(seed in any::<u64>(), lo in 0.0f64..1.0, step in 0.0f64..0.5, gap in -1.0f64..0.0) {
        let lex = vocab_lexicon();
        let scorer = LexiconScorer { lexicon: &lex, min_prob: 0.1 };
        let pairs = random_collection(seed, 5);
        let hi = (lo + step).min(1.0);
        let a = mine_collection(&pairs, &scorer, &config(lo, gap)).unwrap();
        let b = mine_collection(&pairs, &scorer, &config(hi, gap)).unwrap();
        prop_assert!(b.pairs.len() <= a.pairs.len());
        prop_assert!(a.pairs.iter().all(|m| m.similarity >= lo));
    }
}
