use std::ffi::{CStr, CString};
use std::ptr;

use corpusforge_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = cf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn language_model_round_trips_through_arpa() {
    let dir = tempfile::TempDir::new().unwrap();
    let path = c(dir.path().join("m.arpa").to_str().unwrap());
    unsafe {
        let mut lm = ptr::null_mut();
        assert_eq!(cf_lm_train(c("a b\na b\na c\n").as_ptr(), 2, 1, &mut lm), CfStatus::Ok);
        let mut p = 0.0;
        assert_eq!(
            cf_lm_log_prob(lm, c("a").as_ptr(), c("b").as_ptr(), &mut p),
            CfStatus::Ok
        );
        // P(b|a) = (2 - 1/3)/3 + (1/3)(2/3) P1(b), P1(b) = 0.4/5 + 0.096
        let expected = (2.0 - 1.0 / 3.0) / 3.0 + 2.0 / 9.0 * (0.4 / 5.0 + 0.096);
        assert!((10f64.powf(p) - expected).abs() < 1e-9);
        assert_eq!(cf_lm_write_arpa(lm, path.as_ptr()), CfStatus::Ok);

        let mut back = ptr::null_mut();
        assert_eq!(cf_lm_read_arpa(path.as_ptr(), &mut back), CfStatus::Ok);
        let (mut a, mut b) = (CfPerplexity::default(), CfPerplexity::default());
        let text = c("a b\na c\nz\n");
        assert_eq!(cf_lm_perplexity(lm, text.as_ptr(), &mut a), CfStatus::Ok);
        assert_eq!(cf_lm_perplexity(back, text.as_ptr(), &mut b), CfStatus::Ok);
        assert_eq!((a.tokens, a.oov), (8, 1));
        assert!((a.log10_prob - b.log10_prob).abs() < 1e-5);
        cf_lm_free(lm);
        cf_lm_free(back);
    }
}

#[test]
fn lexicon_training_and_mining() {
    unsafe {
        let mut lex = ptr::null_mut();
        let mut ll = [0.0f64; 5];
        let status = cf_lexicon_train(
            c("the house\nthe book\na book\n").as_ptr(),
            c("das haus\ndas buch\nein buch\n").as_ptr(),
            5,
            &mut lex,
            ll.as_mut_ptr(),
        );
        assert_eq!(status, CfStatus::Ok);
        assert!(ll.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{ll:?}");
        let mut p = 0.0;
        assert_eq!(
            cf_lexicon_prob(lex, c("house").as_ptr(), c("haus").as_ptr(), &mut p),
            CfStatus::Ok
        );
        assert!(p > 0.5);

        let mut tsv = ptr::null_mut();
        assert_eq!(cf_lexicon_to_tsv(lex, &mut tsv), CfStatus::Ok);
        assert!(CStr::from_ptr(tsv)
            .to_str()
            .unwrap()
            .lines()
            .any(|l| l.starts_with("house\thaus\t")));
        cf_string_free(tsv);

        let mut sim = 0.0;
        assert_eq!(
            cf_score_pair(lex, c("The house").as_ptr(), c("das Haus").as_ptr(), 0.1, &mut sim),
            CfStatus::Ok
        );
        assert!(sim > 0.5);

        let mut pairs = ptr::null_mut();
        let status = cf_mine_documents(
            lex,
            c("the book\nthe house\n").as_ptr(),
            c("noise noise\ndas buch\ndas haus\n").as_ptr(),
            0.5,
            -0.1,
            0.1,
            &mut pairs,
        );
        assert_eq!(status, CfStatus::Ok);
        let mut n = 0;
        assert_eq!(cf_mined_pairs_len(pairs, &mut n), CfStatus::Ok);
        let mut got = Vec::new();
        for k in 0..n {
            let mut m = CfMinedPair::default();
            assert_eq!(cf_mined_pairs_get(pairs, k, &mut m), CfStatus::Ok);
            got.push((m.source_index, m.target_index));
        }
        assert_eq!(got, [(0, 1), (1, 2)]);
        let mut m = CfMinedPair::default();
        assert_eq!(cf_mined_pairs_get(pairs, n, &mut m), CfStatus::InvalidArgument);
        cf_mined_pairs_free(pairs);

        let mut pairs = ptr::null_mut();
        let status = cf_mine_documents(lex, c("a").as_ptr(), c("b").as_ptr(), 1.5, -0.1, 0.1, &mut pairs);
        assert_eq!(status, CfStatus::InvalidArgument);
        assert!(pairs.is_null());
        cf_lexicon_free(lex);
    }
}

#[test]
fn alignment_buffer_protocol() {
    let scores = [0.9, 0.1, 0.0, 0.2, 0.1, 0.8];
    let (mut len, mut score) = (0usize, 0.0);
    unsafe {
        let status = cf_nw_align(scores.as_ptr(), 2, 3, -0.1, ptr::null_mut(), 0, &mut len, &mut score);
        assert_eq!(status, CfStatus::BufferTooSmall);
        assert_eq!(len, 3);
        let mut steps = vec![
            CfStep {
                kind: CfStepKind::Match,
                source: 0,
                target: 0
            };
            len
        ];
        let status = cf_nw_align(
            scores.as_ptr(),
            2,
            3,
            -0.1,
            steps.as_mut_ptr(),
            len,
            &mut len,
            &mut score,
        );
        assert_eq!(status, CfStatus::Ok);
        assert_eq!(
            steps,
            [
                CfStep {
                    kind: CfStepKind::Match,
                    source: 0,
                    target: 0
                },
                CfStep {
                    kind: CfStepKind::GapTarget,
                    source: -1,
                    target: 1
                },
                CfStep {
                    kind: CfStepKind::Match,
                    source: 1,
                    target: 2
                },
            ]
        );
        assert!((score - 1.6).abs() < 1e-12);

        assert_eq!(
            cf_nw_align(ptr::null(), 0, 0, -0.1, ptr::null_mut(), 0, &mut len, &mut score),
            CfStatus::Ok
        );
        assert_eq!((len, score), (0, 0.0));
        let nan = [f64::NAN];
        assert_eq!(
            cf_nw_align(nan.as_ptr(), 1, 1, -0.1, ptr::null_mut(), 0, &mut len, &mut score),
            CfStatus::InvalidArgument
        );
    }
}

#[test]
fn metrics() {
    unsafe {
        let mut b = CfBleu::default();
        let hyp = c("the the the the the the the");
        let reference = c("the cat is on the mat");
        assert_eq!(cf_bleu(hyp.as_ptr(), reference.as_ptr(), false, &mut b), CfStatus::Ok);
        assert!((b.precisions[0] - 2.0 / 7.0).abs() < 1e-12);
        assert_eq!(b.score, 0.0);

        let mut ter = 0.0;
        let (h, r) = (c("b c a\n"), c("a b c\n"));
        assert_eq!(cf_ter(h.as_ptr(), r.as_ptr(), false, &mut ter), CfStatus::Ok);
        assert!((ter - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(cf_ter(h.as_ptr(), r.as_ptr(), true, &mut ter), CfStatus::Ok);
        assert!((ter - 100.0 / 3.0).abs() < 1e-9);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut lm = ptr::null_mut();
        assert_eq!(cf_lm_train(ptr::null(), 2, 1, &mut lm), CfStatus::NullPointer);
        assert!(last_error().contains("text is null"));

        let bad = [0x61u8, 0xff, 0x00];
        assert_eq!(cf_lm_train(bad.as_ptr().cast(), 2, 1, &mut lm), CfStatus::InvalidUtf8);
        assert_eq!(cf_lm_train(c("a\n").as_ptr(), 0, 1, &mut lm), CfStatus::InvalidArgument);
        assert!(lm.is_null());

        assert_eq!(
            cf_lm_read_arpa(c("/nonexistent/m.arpa").as_ptr(), &mut lm),
            CfStatus::Io
        );
        let dir = tempfile::TempDir::new().unwrap();
        let junk = dir.path().join("junk.arpa");
        std::fs::write(&junk, "not an arpa file\n").unwrap();
        assert_eq!(
            cf_lm_read_arpa(c(junk.to_str().unwrap()).as_ptr(), &mut lm),
            CfStatus::Parse
        );

        let mut lex = ptr::null_mut();
        let status = cf_lexicon_train(c("").as_ptr(), c("").as_ptr(), 3, &mut lex, ptr::null_mut());
        assert_eq!(status, CfStatus::EmptyInput);
        let status = cf_lexicon_train(c("a\nb").as_ptr(), c("x").as_ptr(), 3, &mut lex, ptr::null_mut());
        assert_eq!(status, CfStatus::InvalidArgument);
        assert!(last_error().contains("2 source lines vs 1 target lines"));

        cf_lm_free(ptr::null_mut());
        cf_lexicon_free(ptr::null_mut());
        cf_mined_pairs_free(ptr::null_mut());
        cf_string_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let mut lm = ptr::null_mut();
        assert_eq!(cf_lm_train(ptr::null(), 2, 1, &mut lm), CfStatus::NullPointer);
    }
    std::thread::spawn(|| assert!(cf_last_error().is_null()))
        .join()
        .unwrap();
    assert!(!cf_last_error().is_null());
}
