//! Global (Needleman-Wunsch) alignment of two sentence sequences.

/// One move of a global alignment path. Indices are 0-based positions in the
/// source and target sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Match(usize, usize),
    GapSource(usize),
    GapTarget(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentPath {
    pub steps: Vec<Step>,
    pub score: f64,
}

impl AlignmentPath {
    pub fn matches(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.steps.iter().filter_map(|s| match *s {
            Step::Match(i, j) => Some((i, j)),
            _ => None,
        })
    }

    pub fn gap_count(&self) -> usize {
        self.steps.iter().filter(|s| !matches!(s, Step::Match(..))).count()
    }
}

/// Dense row-major matrix of sentence-pair similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ScoreMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// Find the monotone global alignment maximising the sum of match scores plus
/// `gap_penalty` per unmatched sentence.
///
/// Scores accumulate along the path from the origin, so the returned score is
/// bit-identical to summing the path's step scores in order. The backtrace
/// prefers a match, then a source gap, then a target gap whenever several
/// predecessors reach the same cell value.
pub fn nw_align(scores: &ScoreMatrix, gap_penalty: f64) -> AlignmentPath {
    let (n, m) = (scores.rows, scores.cols);
    let width = m + 1;
    let mut h = vec![0.0f64; (n + 1) * width];
    for j in 1..=m {
        h[j] = h[j - 1] + gap_penalty;
    }
    for i in 1..=n {
        h[i * width] = h[(i - 1) * width] + gap_penalty;
        for j in 1..=m {
            let diag = h[(i - 1) * width + j - 1] + scores.get(i - 1, j - 1);
            let up = h[(i - 1) * width + j] + gap_penalty;
            let left = h[i * width + j - 1] + gap_penalty;
            h[i * width + j] = diag.max(up).max(left);
        }
    }

    let mut steps = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = h[i * width + j];
        if i > 0 && j > 0 && here == h[(i - 1) * width + j - 1] + scores.get(i - 1, j - 1) {
            steps.push(Step::Match(i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && here == h[(i - 1) * width + j] + gap_penalty {
            steps.push(Step::GapSource(i - 1));
            i -= 1;
        } else {
            steps.push(Step::GapTarget(j - 1));
            j -= 1;
        }
    }
    steps.reverse();
    AlignmentPath {
        steps,
        score: h[n * width + m],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every monotone global path, scored by summing its steps in order.
    fn brute_force(scores: &ScoreMatrix, gap: f64) -> (f64, Vec<usize>) {
        fn walk(s: &ScoreMatrix, gap: f64, i: usize, j: usize, acc: f64, gaps: usize, out: &mut Vec<(f64, usize)>) {
            if i == s.rows() && j == s.cols() {
                out.push((acc, gaps));
                return;
            }
            if i < s.rows() && j < s.cols() {
                walk(s, gap, i + 1, j + 1, acc + s.get(i, j), gaps, out);
            }
            if i < s.rows() {
                walk(s, gap, i + 1, j, acc + gap, gaps + 1, out);
            }
            if j < s.cols() {
                walk(s, gap, i, j + 1, acc + gap, gaps + 1, out);
            }
        }
        let mut all = Vec::new();
        walk(scores, gap, 0, 0, 0.0, 0, &mut all);
        let best = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let gaps = all.iter().filter(|p| p.0 == best).map(|p| p.1).collect();
        (best, gaps)
    }

    fn check_path(path: &AlignmentPath, n: usize, m: usize) {
        let (mut i, mut j) = (0, 0);
        for s in &path.steps {
            match *s {
                Step::Match(a, b) => {
                    assert_eq!((a, b), (i, j));
                    i += 1;
                    j += 1;
                }
                Step::GapSource(a) => {
                    assert_eq!(a, i);
                    i += 1;
                }
                Step::GapTarget(b) => {
                    assert_eq!(b, j);
                    j += 1;
                }
            }
        }
        assert_eq!((i, j), (n, m));
    }

    #[test]
    fn identical_sequences_align_on_the_diagonal() {
        let s = ScoreMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 });
        let p = nw_align(&s, -0.5);
        assert_eq!(p.steps, vec![Step::Match(0, 0), Step::Match(1, 1), Step::Match(2, 2)]);
        assert_eq!(p.score, 3.0);
    }

    #[test]
    fn empty_source() {
        let s = ScoreMatrix::from_fn(0, 2, |_, _| 0.0);
        let p = nw_align(&s, -0.25);
        assert_eq!(p.steps, vec![Step::GapTarget(0), Step::GapTarget(1)]);
        assert_eq!(p.score, -0.5);
        assert!(nw_align(&ScoreMatrix::from_fn(0, 0, |_, _| 0.0), -1.0).steps.is_empty());
    }

    #[test]
    fn shifted_diagonal_pays_two_gaps() {
        // the only good match is (0, 1); taking it costs two gaps
        let s = ScoreMatrix::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { 1.0 } else { 0.0 });
        assert_eq!(nw_align(&s, -0.4).matches().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(nw_align(&s, -0.6).matches().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn tie_prefers_match_then_source_gap() {
        // one match (-2) ties with two gaps (-2)
        let s = ScoreMatrix::from_fn(1, 1, |_, _| -2.0);
        assert_eq!(nw_align(&s, -1.0).steps, vec![Step::Match(0, 0)]);
        // the backtrace starts at the end, so the final step is the match
        let s = ScoreMatrix::from_fn(2, 1, |_, _| 0.0);
        assert_eq!(nw_align(&s, -1.0).steps, vec![Step::GapSource(0), Step::Match(1, 0)]);
        // no match possible at the end: source gap beats target gap
        let s = ScoreMatrix::from_fn(1, 1, |_, _| -5.0);
        assert_eq!(nw_align(&s, -1.0).steps, vec![Step::GapTarget(0), Step::GapSource(0)]);
    }

    fn arb_matrix() -> impl Strategy<Value = (ScoreMatrix, f64)> {
        (0usize..=6, 0usize..=6, -2.0f64..=0.0).prop_flat_map(|(n, m, gap)| {
            prop::collection::vec(-1.0f64..1.0, n * m)
                .prop_map(move |v| (ScoreMatrix::from_fn(n, m, |i, j| v[i * m + j]), gap))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn optimal_against_brute_force((s, gap) in arb_matrix()) {
            let p = nw_align(&s, gap);
            check_path(&p, s.rows(), s.cols());
            let (best, gaps) = brute_force(&s, gap);
            prop_assert_eq!(p.score, best);
            prop_assert!(gaps.contains(&p.gap_count()));
        }

        #[test]
        fn harsher_gaps_never_add_gaps((s, gap) in arb_matrix(), extra in 0.0f64..2.0) {
            let loose = nw_align(&s, gap);
            let strict = nw_align(&s, gap - extra);
            prop_assert!(strict.gap_count() <= loose.gap_count());
        }
    }
}
