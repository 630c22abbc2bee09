use super::*;
use proptest::prelude::*;

fn corpus(lines: &[&str]) -> Vec<Sentence> {
    lines.iter().map(|l| Sentence::parse(l)).collect()
}

fn prob(m: &NGramModel, ctx: &[&str], w: &str) -> f64 {
    10f64.powf(m.log_prob(ctx, w))
}

fn mass(m: &NGramModel, ctx: &[&str]) -> f64 {
    m.vocabulary().iter().map(|v| prob(m, ctx, v)).sum()
}

// Hand trace of ["a b", "a b", "a c"], order 2.
//
// bigram counts: <s> a:3, a b:2, b </s>:2, a c:1, c </s>:1
//   n1 = 2, n2 = 2 -> D2 = 2 / (2 + 4) = 1/3
// unigram continuation counts: a:1 b:1 c:1 </s>:2 (<unk>:0)
//   n1 = 3, n2 = 1 -> D1 = 3 / 5 = 0.6; total 5, 4 types
//   gamma = 0.6 * 4 / 5 = 0.48, spread over {a, b, c, </s>, <unk>}
const D1: f64 = 0.6;
const D2: f64 = 1.0 / 3.0;
const UNI_FLOOR: f64 = 0.48 / 5.0;
const P1_A: f64 = (1.0 - D1) / 5.0 + UNI_FLOOR;
const P1_B: f64 = P1_A;
const P1_C: f64 = P1_A;
const P1_EOS: f64 = (2.0 - D1) / 5.0 + UNI_FLOOR;
const P1_UNK: f64 = UNI_FLOOR;
// context a: total 3, 2 types -> gamma = D2 * 2 / 3
const P_B_GIVEN_A: f64 = (2.0 - D2) / 3.0 + D2 * 2.0 / 3.0 * P1_B;
const P_C_GIVEN_A: f64 = (1.0 - D2) / 3.0 + D2 * 2.0 / 3.0 * P1_C;
// context <s>: total 3, 1 type
const P_A_GIVEN_BOS: f64 = (3.0 - D2) / 3.0 + D2 / 3.0 * P1_A;
// context b: total 2, 1 type
const P_EOS_GIVEN_B: f64 = (2.0 - D2) / 2.0 + D2 / 2.0 * P1_EOS;
// context c: total 1, 1 type
const GAMMA_C: f64 = D2;

fn fixture() -> NGramModel {
    train_lm(&corpus(&["a b", "a b", "a c"]), 2, 1).unwrap()
}

#[test]
fn unigram_model_normalizes() {
    let m = train_lm(&corpus(&["a"]), 1, 1).unwrap();
    assert_eq!(m.vocabulary(), ["</s>", "<s>", "<unk>", "a"]);
    assert!((mass(&m, &[]) - 1.0).abs() < 1e-6);
}

#[test]
fn frequent_continuation_wins() {
    let m = fixture();
    assert!(prob(&m, &["a"], "b") > prob(&m, &["a"], "c"));
}

#[test]
fn bigram_fixture_matches_hand_computation() {
    let m = fixture();
    assert!((m.discounts()[0] - D1).abs() < 1e-12);
    assert!((m.discounts()[1] - D2).abs() < 1e-12);
    let cases: [(&[&str], &str, f64); 9] = [
        (&[], "a", P1_A),
        (&[], "</s>", P1_EOS),
        (&[], "<unk>", P1_UNK),
        (&["a"], "b", P_B_GIVEN_A),
        (&["a"], "c", P_C_GIVEN_A),
        (&["<s>"], "a", P_A_GIVEN_BOS),
        (&["b"], "</s>", P_EOS_GIVEN_B),
        (&["a"], "a", D2 * 2.0 / 3.0 * P1_A),
        (&["a"], "</s>", D2 * 2.0 / 3.0 * P1_EOS),
    ];
    for (ctx, w, expected) in cases {
        let got = prob(&m, ctx, w);
        assert!((got - expected).abs() < 1e-9, "P({w}|{ctx:?}) = {got}, want {expected}");
    }
}

#[test]
fn backoff_identity_on_fixture() {
    let m = fixture();
    // "c b" is unseen but "c" is a stored context: one back-off weight applies.
    assert!((prob(&m, &["c"], "b") - GAMMA_C * P1_B).abs() < 1e-12);
    // an unknown context has no stored back-off: plain unigram.
    assert!((prob(&m, &["zzz"], "b") - P1_B).abs() < 1e-12);
    // "</s>" never has followers, so it carries no back-off weight.
    assert!((prob(&m, &["</s>"], "a") - P1_A).abs() < 1e-12);
}

#[test]
fn unk_has_positive_floor() {
    let m = train_lm(&corpus(&["a b"]), 3, 1).unwrap();
    let lp = m.log_prob(&["x", "y"], "q");
    assert!(lp.is_finite() && lp < 0.0);
    assert!(m.log_prob(&["a"], "b") > m.log_prob(&["a"], "<unk>"));
}

#[test]
fn perplexity_fixture() {
    let m = fixture();
    let r = m.perplexity(&Sentence::parse("a b"));
    assert_eq!(r.token_count, 3);
    assert_eq!(r.oov_count, 0);
    let expected = (P_A_GIVEN_BOS * P_B_GIVEN_A * P_EOS_GIVEN_B).powf(-1.0 / 3.0);
    assert!((r.perplexity - expected).abs() < 1e-9);
}

#[test]
fn perplexity_of_empty_sentence_scores_only_eos() {
    let m = fixture();
    let r = m.perplexity(&Sentence::parse(""));
    assert_eq!(r.token_count, 1);
    assert!((r.log10_prob_sum - m.log_prob(&["<s>"], "</s>")).abs() < 1e-15);
}

#[test]
fn in_vocabulary_text_is_less_perplexing() {
    let m = train_lm(&corpus(&["a a a a"]), 3, 1).unwrap();
    let known = m.perplexity(&Sentence::parse("a a"));
    let unknown = m.perplexity(&Sentence::parse("b b"));
    assert!(known.perplexity < unknown.perplexity);
    assert_eq!(unknown.oov_count, 2);
    assert!(known.perplexity >= 1.0);
}

#[test]
fn min_count_maps_rare_words_to_unk() {
    let m = train_lm(&corpus(&["a a b", "a c"]), 2, 2).unwrap();
    assert!(m.contains("a"));
    assert!(!m.contains("b"));
    assert!(m.entry(&["a", "<unk>"]).is_some());
    assert!((mass(&m, &["a"]) - 1.0).abs() < 1e-9);
}

#[test]
fn training_errors() {
    assert!(matches!(train_lm(&[], 3, 1), Err(Error::EmptyInput(_))));
    assert!(matches!(
        train_lm(&corpus(&["a"]), 0, 1),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn arpa_round_trip_is_exact() {
    let m = fixture();
    let mut buf = Vec::new();
    write_arpa(&m, &mut buf).unwrap();
    let back = read_arpa(buf.as_slice()).unwrap();
    assert!(m.same_parameters(&back, 0.0));
    let mut again = Vec::new();
    write_arpa(&back, &mut again).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn arpa_count_mismatch_is_an_error() {
    let text = "\\data\\\nngram 1=3\n\n\\1-grams:\n-0.5\ta\n-0.5\t</s>\n\n\\end\\\n";
    match read_arpa(text.as_bytes()) {
        Err(Error::Arpa { line, message }) => {
            assert_eq!(line, 8, "{message}");
            assert!(message.contains("declares 3"));
        }
        other => panic!("expected arpa error, got {other:?}"),
    }
}

#[test]
fn arpa_bad_header_is_an_error() {
    let text = "\\data\\\nngram 1=1\n\n\\2-grams:\n-0.5\ta\n\\end\\\n";
    assert!(matches!(read_arpa(text.as_bytes()), Err(Error::Arpa { line: 4, .. })));
    assert!(matches!(
        read_arpa("hello".as_bytes()),
        Err(Error::Arpa { line: 1, .. })
    ));
}

#[test]
fn hand_written_unigram_file() {
    let text = "\\data\\\nngram 1=2\n\n\\1-grams:\n-0.25\ta\n-0.75\t</s>\n\n\\end\\\n";
    let m = read_arpa(text.as_bytes()).unwrap();
    assert_eq!(m.order(), 1);
    assert_eq!(m.log_prob::<&str>(&[], "a"), -0.25);
    assert_eq!(m.log_prob(&["a"], "</s>"), -0.75);
    assert_eq!(m.log_prob::<&str>(&[], "nope"), LOG10_ZERO);
}

fn random_corpus(max_sentences: usize) -> impl Strategy<Value = Vec<Sentence>> {
    prop::collection::vec(prop::collection::vec(0u8..6, 0..8), 1..max_sentences).prop_map(|v| {
        v.into_iter()
            .map(|ws| {
                let raw: Vec<String> = ws.iter().map(|w| format!("w{w}")).collect();
                Sentence::parse(&raw.join(" "))
            })
            .collect()
    })
}

fn assert_normalized(m: &NGramModel) {
    let mut contexts: Vec<Vec<&str>> = vec![vec![]];
    for n in 1..m.order() {
        for (words, e) in m.entries(n) {
            if e.log10_backoff.is_some() {
                contexts.push(words);
            }
        }
    }
    contexts.push(vec!["never-seen"]);
    for ctx in contexts {
        let total = mass(m, &ctx);
        assert!((total - 1.0).abs() < 1e-6, "context {ctx:?} sums to {total}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn every_context_normalizes(c in random_corpus(12), order in 1usize..5) {
        let m = train_lm(&c, order, 1).unwrap();
        assert_normalized(&m);
        for &d in m.discounts() {
            prop_assert!(d > 0.0 && d < 1.0);
        }
    }

    #[test]
    fn arpa_round_trip_to_six_decimals(c in random_corpus(10), order in 1usize..4) {
        let m = train_lm(&c, order, 1).unwrap();
        let mut buf = Vec::new();
        write_arpa(&m, &mut buf).unwrap();
        let back = read_arpa(buf.as_slice()).unwrap();
        prop_assert!(m.same_parameters(&back, 1e-6));
    }

    #[test]
    fn order_consistency_without_higher_order_evidence(
        sents in prop::collection::vec(prop::collection::vec(0u8..5, 0..3), 1..10),
        k in 4usize..6,
    ) {
        // every padded sentence is at most k tokens, so no (k+1)-gram exists
        let c: Vec<Sentence> = sents
            .iter()
            .map(|ws| Sentence::parse(&ws.iter().map(|w| format!("w{w}")).collect::<Vec<_>>().join(" ")))
            .filter(|s| s.len() + 2 <= k)
            .collect();
        prop_assume!(!c.is_empty());
        let small = train_lm(&c, k, 1).unwrap();
        let big = train_lm(&c, k + 1, 1).unwrap();
        let vocab: Vec<&str> = small.vocabulary().iter().map(String::as_str).collect();
        for a in &vocab {
            for b in &vocab {
                let ctx = ["<s>", a, b];
                for w in &vocab {
                    let (x, y) = (small.log_prob(&ctx, w), big.log_prob(&ctx, w));
                    prop_assert!((x - y).abs() < 1e-12, "{ctx:?} {w}: {x} vs {y}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn own_training_text_is_least_perplexing(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut make = |n: usize| -> Vec<Sentence> {
            (0..n)
                .map(|_| {
                    let len = rng.gen_range(3..9);
                    let ws: Vec<String> = (0..len).map(|_| format!("w{}", rng.gen_range(0..15))).collect();
                    Sentence::parse(&ws.join(" "))
                })
                .collect()
        };
        let train = make(40);
        let other = make(40);
        let own = train_lm(&train, 3, 1).unwrap();
        let foreign = train_lm(&other, 3, 1).unwrap();
        let ppl = |m: &NGramModel| PerplexityResult::combine(train.iter().map(|s| m.perplexity(s))).perplexity;
        prop_assert!(ppl(&own) <= ppl(&foreign));
    }
}
