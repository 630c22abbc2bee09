use std::collections::HashMap;

use super::*;
use crate::text::{ParallelCorpus, TokenizationProfile};
use proptest::prelude::*;

fn corpus(pairs: &[(&str, &str)]) -> ParallelCorpus {
    ParallelCorpus::from_raw(pairs, TokenizationProfile::default())
}

/// Straightforward dense Model 1 over strings, used as the oracle.
fn oracle_model1(pairs: &[(&str, &str)], iterations: usize) -> HashMap<(String, String), f64> {
    let data: Vec<(Vec<String>, Vec<String>)> = pairs
        .iter()
        .map(|(s, t)| {
            let mut src = vec![NULL_WORD.to_string()];
            src.extend(s.split_whitespace().map(String::from));
            (src, t.split_whitespace().map(String::from).collect())
        })
        .collect();
    let mut fs: Vec<String> = data.iter().flat_map(|(_, t)| t.clone()).collect();
    fs.sort();
    fs.dedup();
    let mut t: HashMap<(String, String), f64> = HashMap::new();
    for (src, _) in &data {
        for e in src {
            for f in &fs {
                t.insert((e.clone(), f.clone()), 1.0 / fs.len() as f64);
            }
        }
    }
    for _ in 0..iterations {
        let mut count: HashMap<(String, String), f64> = HashMap::new();
        let mut total: HashMap<String, f64> = HashMap::new();
        for (src, tgt) in &data {
            for f in tgt {
                let z: f64 = src.iter().map(|e| t[&(e.clone(), f.clone())]).sum();
                for e in src {
                    let c = t[&(e.clone(), f.clone())] / z;
                    *count.entry((e.clone(), f.clone())).or_insert(0.0) += c;
                    *total.entry(e.clone()).or_insert(0.0) += c;
                }
            }
        }
        for (k, v) in t.iter_mut() {
            *v = count.get(k).copied().unwrap_or(0.0) / total[&k.0];
        }
    }
    t
}

#[test]
fn single_target_word_gets_all_mass() {
    for iters in [1, 3, 10] {
        let (lex, _) = train_model1(&corpus(&[("a", "x")]), iters).unwrap();
        assert_eq!(lex.prob("a", "x"), 1.0);
    }
}

#[test]
fn classic_two_pair_instance_matches_oracle() {
    let pairs = [("a b", "x y"), ("a", "x")];
    let (lex, ll) = train_model1(&corpus(&pairs), 10).unwrap();
    assert_eq!(ll.len(), 10);
    let oracle = oracle_model1(&pairs, 10);
    for ((e, f), p) in &oracle {
        assert!((lex.prob(e, f) - p).abs() < 1e-12, "t({f}|{e})");
    }
    let best = |e: &str| lex.translations(e).next().unwrap().0.to_string();
    assert_eq!(best("a"), "x");
    assert_eq!(best("b"), "y");
    assert!(lex.prob("a", "x") > 0.9);
}

#[test]
fn training_errors() {
    assert!(matches!(
        train_model1(&ParallelCorpus::default(), 3),
        Err(Error::EmptyInput(_))
    ));
    assert!(train_model1(&corpus(&[("a", "x")]), 0).is_err());
}

#[test]
fn viterbi_with_identity_lexicon() {
    let lex = TranslationLexicon::identity(&["a", "b"]);
    let links = viterbi_align(&lex, &Sentence::parse("a b"), &Sentence::parse("a b"));
    assert_eq!(links.links, [(0, 0), (1, 1)].into_iter().collect());
}

#[test]
fn viterbi_with_trained_lexicon() {
    let (lex, _) = train_model1(&corpus(&[("a b", "x y"), ("a", "x")]), 10).unwrap();
    let links = viterbi_align(&lex, &Sentence::parse("a b"), &Sentence::parse("x y"));
    assert_eq!(links.to_pharaoh(), "0-0 1-1");
}

#[test]
fn viterbi_null_absorbs_everything() {
    let lex = TranslationLexicon::from_entries([(NULL_WORD, "x", 1.0), ("a", "x", 0.5)]);
    let links = viterbi_align(&lex, &Sentence::parse("a"), &Sentence::parse("x x"));
    assert!(links.links.is_empty());
}

#[test]
fn viterbi_ties_go_to_lowest_source() {
    let lex = TranslationLexicon::from_entries([("a", "x", 0.5), ("b", "x", 0.5)]);
    let links = viterbi_align(&lex, &Sentence::parse("b a"), &Sentence::parse("x"));
    assert_eq!(links.to_pharaoh(), "0-0");
}

#[test]
fn lexicon_tsv_round_trip_and_order() {
    let (lex, _) = train_model1(&corpus(&[("a b", "x y"), ("a", "x"), ("b c", "y z")]), 5).unwrap();
    let mut buf = Vec::new();
    lex.write_tsv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    let rows: Vec<(&str, f64)> = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0], f[2].parse().unwrap())
        })
        .collect();
    for w in rows.windows(2) {
        assert!(w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 >= w[1].1));
    }
    let back = TranslationLexicon::read_tsv(buf.as_slice()).unwrap();
    assert_eq!(back, lex);
}

#[test]
fn lexicon_tsv_rejects_garbage() {
    assert!(TranslationLexicon::read_tsv("a\tb\n".as_bytes()).is_err());
    assert!(TranslationLexicon::read_tsv("a\tb\tx\n".as_bytes()).is_err());
    assert!(TranslationLexicon::read_tsv("a\tb\t1.5\n".as_bytes()).is_err());
}

fn links(rows: usize, cols: usize, l: &[(usize, usize)]) -> AlignmentLinks {
    AlignmentLinks::new(rows, cols, l.iter().copied())
}

#[test]
fn disjoint_link_sets() {
    let f = links(2, 2, &[(0, 0)]);
    let b = links(2, 2, &[(1, 1)]);
    assert!(symmetrize(&f, &b, Heuristic::Intersection).unwrap().links.is_empty());
    assert_eq!(
        symmetrize(&f, &b, Heuristic::Union).unwrap().links,
        [(0, 0), (1, 1)].into_iter().collect()
    );
    // nothing to grow from
    assert!(symmetrize(&f, &b, Heuristic::GrowDiag).unwrap().links.is_empty());
}

#[test]
fn grow_diag_hand_trace() {
    // intersection {(0,0)}; scanning its neighbours in row-major order adds
    // (0,1) (target 1 unaligned) and then (1,1) (source 1 unaligned).
    let f = links(2, 2, &[(0, 0), (0, 1)]);
    let b = links(2, 2, &[(0, 0), (1, 1)]);
    let g = symmetrize(&f, &b, Heuristic::GrowDiag).unwrap();
    assert_eq!(g.links, [(0, 0), (0, 1), (1, 1)].into_iter().collect());
}

#[test]
fn grow_diag_needs_an_unaligned_word() {
    // (0,1) touches (0,0) but both its words are already aligned;
    // (3,3) is not adjacent to anything.
    let f = links(4, 4, &[(0, 0), (1, 1), (0, 1)]);
    let b = links(4, 4, &[(0, 0), (1, 1), (3, 3)]);
    let g = symmetrize(&f, &b, Heuristic::GrowDiag).unwrap();
    assert_eq!(g.links, [(0, 0), (1, 1)].into_iter().collect());
}

#[test]
fn out_of_bounds_is_an_error() {
    let f = links(2, 2, &[(2, 0)]);
    let b = links(2, 2, &[]);
    assert!(matches!(
        symmetrize(&f, &b, Heuristic::Union),
        Err(Error::LinkOutOfBounds { .. })
    ));
    assert!(symmetrize(&links(2, 2, &[]), &links(2, 3, &[]), Heuristic::Union).is_err());
}

fn arb_links() -> impl Strategy<Value = (AlignmentLinks, AlignmentLinks)> {
    (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
        let cell = (0..r, 0..c);
        (
            prop::collection::btree_set(cell.clone(), 0..(r * c)),
            prop::collection::btree_set(cell, 0..(r * c)),
        )
            .prop_map(move |(a, b)| (AlignmentLinks::new(r, c, a), AlignmentLinks::new(r, c, b)))
    })
}

fn arb_corpus() -> impl Strategy<Value = Vec<(String, String)>> {
    let side = prop::collection::vec(0u8..6, 1..6);
    prop::collection::vec((side.clone(), side), 1..21).prop_map(|v| {
        v.into_iter()
            .map(|(s, t)| {
                let s: Vec<String> = s.iter().map(|w| format!("s{w}")).collect();
                let t: Vec<String> = t.iter().map(|w| format!("t{w}")).collect();
                (s.join(" "), t.join(" "))
            })
            .collect()
    })
}

fn to_corpus(v: &[(String, String)]) -> ParallelCorpus {
    let refs: Vec<(&str, &str)> = v.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    corpus(&refs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn grow_diag_lies_between_intersection_and_union((f, b) in arb_links()) {
        let i = symmetrize(&f, &b, Heuristic::Intersection).unwrap();
        let u = symmetrize(&f, &b, Heuristic::Union).unwrap();
        let g = symmetrize(&f, &b, Heuristic::GrowDiag).unwrap();
        prop_assert!(i.links.is_subset(&g.links));
        prop_assert!(g.links.is_subset(&u.links));
    }

    #[test]
    fn symmetrizing_with_itself_is_identity((f, _) in arb_links()) {
        for h in [Heuristic::Intersection, Heuristic::Union, Heuristic::GrowDiag] {
            prop_assert_eq!(&symmetrize(&f, &f, h).unwrap(), &f);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rows_sum_to_one_after_every_iteration(c in arb_corpus(), iters in 1usize..6) {
        let (lex, _) = train_model1(&to_corpus(&c), iters).unwrap();
        for e in lex.source_words() {
            prop_assert!((lex.row_sum(e) - 1.0).abs() < 1e-9, "row {} sums to {}", e, lex.row_sum(e));
            prop_assert!(lex.translations(e).all(|(_, p)| p >= 0.0));
        }
    }

    #[test]
    fn likelihood_never_decreases(c in arb_corpus()) {
        let (_, ll) = train_model1(&to_corpus(&c), 15).unwrap();
        prop_assert_eq!(ll.len(), 15);
        for w in ll.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn likelihood_ignores_pair_order(c in arb_corpus(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = c.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let (_, a) = train_model1(&to_corpus(&c), 8).unwrap();
        let (_, b) = train_model1(&to_corpus(&shuffled), 8).unwrap();
        let (x, y) = (a[7], b[7]);
        prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
    }
}
