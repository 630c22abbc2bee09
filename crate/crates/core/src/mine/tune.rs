use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use super::{nw_align, score_matrix, DocumentPair, PairScorer};
use crate::error::{Error, Result};

/// A document pair with its gold sentence links `(source index, target index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldDocument {
    pub pair: DocumentPair,
    pub links: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub threshold: f64,
    pub gap_penalty: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub best_threshold: f64,
    pub best_gap_penalty: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Every evaluated point, penalties in the outer loop.
    pub grid: Vec<GridPoint>,
}

impl TuningResult {
    pub fn to_key_values(&self) -> String {
        let mut out = format!(
            "best_threshold={}\nbest_gap_penalty={}\nprecision={:.6}\nrecall={:.6}\nf1={:.6}\n",
            self.best_threshold, self.best_gap_penalty, self.precision, self.recall, self.f1
        );
        for (k, g) in self.grid.iter().enumerate() {
            out.push_str(&format!(
                "grid.{k}={}\t{}\t{:.6}\t{:.6}\t{:.6}\n",
                g.threshold, g.gap_penalty, g.precision, g.recall, g.f1
            ));
        }
        out
    }
}

pub fn default_threshold_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

pub fn default_penalty_grid() -> Vec<f64> {
    vec![-0.05, -0.1, -0.2, -0.4, -0.8]
}

fn better(a: &GridPoint, b: &GridPoint) -> bool {
    if a.f1 != b.f1 {
        return a.f1 > b.f1;
    }
    if a.threshold != b.threshold {
        return a.threshold < b.threshold;
    }
    a.gap_penalty > b.gap_penalty
}

/// Grid search over threshold and gap penalty, maximising micro-averaged F1 of
/// mined `(i, j)` links against the gold links. Ties go to the lower
/// threshold, then the less negative penalty. Precision with nothing mined is 0.
pub fn tune(
    gold: &[GoldDocument],
    scorer: &dyn PairScorer,
    thresholds: &[f64],
    penalties: &[f64],
) -> Result<TuningResult> {
    if gold.is_empty() {
        return Err(Error::EmptyInput("gold set has no documents".into()));
    }
    if thresholds.is_empty() || penalties.is_empty() {
        return Err(Error::InvalidArgument("tuning grids must be non-empty".into()));
    }
    if let Some(t) = thresholds.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument(format!("threshold {t} is not finite")));
    }
    if let Some(g) = penalties.iter().find(|g| g.is_nan() || **g > 0.0) {
        return Err(Error::InvalidArgument(format!("gap penalty {g} must be <= 0")));
    }
    for doc in gold {
        let (n, m) = (doc.pair.source.sentences.len(), doc.pair.target.sentences.len());
        if let Some(&(i, j)) = doc.links.iter().find(|&&(i, j)| i >= n || j >= m) {
            return Err(Error::LinkOutOfBounds {
                source_index: i,
                target_index: j,
                source_len: n,
                target_len: m,
            });
        }
    }

    let matrices: Vec<_> = gold.iter().map(|d| score_matrix(&d.pair, scorer)).collect();
    let gold_total: usize = gold.iter().map(|d| d.links.len()).sum();

    let mut grid = Vec::with_capacity(thresholds.len() * penalties.len());
    for &gap in penalties {
        // the path depends only on the penalty; thresholds just filter it
        let matched: Vec<Vec<(usize, usize, f64)>> = matrices
            .iter()
            .map(|s| nw_align(s, gap).matches().map(|(i, j)| (i, j, s.get(i, j))).collect())
            .collect();
        for &threshold in thresholds {
            let (mut predicted, mut correct) = (0usize, 0usize);
            for (doc, m) in gold.iter().zip(&matched) {
                for &(i, j, sim) in m {
                    if sim >= threshold {
                        predicted += 1;
                        correct += doc.links.contains(&(i, j)) as usize;
                    }
                }
            }
            let precision = if predicted == 0 {
                0.0
            } else {
                correct as f64 / predicted as f64
            };
            let recall = if gold_total == 0 {
                0.0
            } else {
                correct as f64 / gold_total as f64
            };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            grid.push(GridPoint {
                threshold,
                gap_penalty: gap,
                precision,
                recall,
                f1,
            });
        }
    }

    let best = grid
        .iter()
        .skip(1)
        .fold(grid[0], |best, p| if better(p, &best) { *p } else { best });
    Ok(TuningResult {
        best_threshold: best.threshold,
        best_gap_penalty: best.gap_penalty,
        precision: best.precision,
        recall: best.recall,
        f1: best.f1,
        grid,
    })
}

/// Gold links as `doc_id<TAB>i<TAB>j` lines, grouped by document id.
pub fn read_gold_tsv<R: BufRead>(input: R) -> Result<BTreeMap<String, BTreeSet<(usize, usize)>>> {
    let mut out: BTreeMap<String, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields[0].is_empty() {
            return Err(Error::format("gold links", k + 1, "expected doc_id<TAB>i<TAB>j"));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::format("gold links", k + 1, format!("bad index {s:?}")))
        };
        let (i, j) = (parse(fields[1])?, parse(fields[2])?);
        out.entry(fields[0].to_string()).or_default().insert((i, j));
    }
    Ok(out)
}
