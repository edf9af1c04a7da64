//! One-to-one nexus/step matchings over a similarity matrix.
//!
//! Only pairs with `M[i][j] > tau` are eligible for either matcher.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::embed::SimilarityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MatchStrategy {
    #[default]
    Greedy,
    DynamicProgramming,
}

impl MatchStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchStrategy::Greedy => "greedy",
            MatchStrategy::DynamicProgramming => "dp",
        }
    }
}

impl fmt::Display for MatchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatchStrategy {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(Self::Greedy),
            "dp" => Ok(Self::DynamicProgramming),
            other => Err(alloc::format!("unknown matcher {other:?}")),
        }
    }
}

/// A set of `(nexus, step)` pairs, stored sorted by nexus then step index.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
    strategy: MatchStrategy,
    tau: f64,
}

impl Matching {
    pub fn new(mut pairs: Vec<(usize, usize)>, strategy: MatchStrategy, tau: f64) -> Self {
        pairs.sort_unstable();
        Self {
            pairs,
            strategy,
            tau,
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn strategy(&self) -> MatchStrategy {
        self.strategy
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// One-to-one, in bounds, and every pair above threshold.
    pub fn is_valid_for(&self, m: &SimilarityMatrix) -> bool {
        let mut rows = vec![false; m.n()];
        let mut cols = vec![false; m.m()];
        for &(i, j) in &self.pairs {
            if i >= m.n() || j >= m.m() || rows[i] || cols[j] || m.get(i, j) <= self.tau {
                return false;
            }
            rows[i] = true;
            cols[j] = true;
        }
        true
    }

    /// For `(i, j)`, `(i', j')` with `i < i'`, also `j < j'`.
    pub fn is_non_crossing(&self) -> bool {
        self.pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
    }
}

/// Repeatedly takes the unmatched eligible pair with the largest similarity;
/// ties go to the smaller nexus index, then the smaller step index.
pub fn match_greedy(m: &SimilarityMatrix, tau: f64) -> Matching {
    const NONE: usize = usize::MAX;
    let (n, cols) = (m.n(), m.m());
    let e = m.entries();
    let mut col_used = vec![false; cols];
    // Per unmatched row: its best free column (NONE if nothing is eligible)
    // and that value. Only rows whose best column gets taken need rescanning.
    let mut best: Vec<(f64, usize)> = e.chunks_exact(cols).map(|row| row_max(row, tau)).collect();
    let mut matched = vec![NONE; n];
    let mut count = 0;

    loop {
        let (mut pick, mut pick_v) = (NONE, tau);
        for (i, &(v, j)) in best.iter().enumerate() {
            if j != NONE && v > pick_v {
                pick_v = v;
                pick = i;
            }
        }
        if pick == NONE {
            break;
        }
        let j = best[pick].1;
        matched[pick] = j;
        count += 1;
        best[pick].1 = NONE;
        col_used[j] = true;
        for k in 0..n {
            if best[k].1 == j {
                best[k] = row_best(&e[k * cols..(k + 1) * cols], &col_used, tau);
            }
        }
    }

    let mut pairs = Vec::with_capacity(count);
    for (i, &j) in matched.iter().enumerate() {
        if j != NONE {
            pairs.push((i, j));
        }
    }
    Matching {
        pairs,
        strategy: MatchStrategy::Greedy,
        tau,
    }
}

fn row_max(row: &[f64], tau: f64) -> (f64, usize) {
    let (mut bv, mut bj) = (tau, usize::MAX);
    for (j, &v) in row.iter().enumerate() {
        if v > bv {
            bv = v;
            bj = j;
        }
    }
    (bv, bj)
}

fn row_best(row: &[f64], col_used: &[bool], tau: f64) -> (f64, usize) {
    let (mut bv, mut bj) = (tau, usize::MAX);
    for (j, (&v, &used)) in row.iter().zip(col_used).enumerate() {
        if v > bv && !used {
            bv = v;
            bj = j;
        }
    }
    (bv, bj)
}

/// Non-crossing one-to-one matching maximizing `Σ w_i · M[i][j]` over
/// eligible pairs, by the usual skip/skip/match alignment recurrence.
///
/// Among optimal matchings the lexicographically smallest sorted pair list
/// is returned.
pub fn match_dp(m: &SimilarityMatrix, tau: f64, weights: &[f64]) -> Matching {
    let (n, cols) = (m.n(), m.m());
    assert_eq!(weights.len(), n, "one weight per nexus");
    let width = cols + 1;
    // best[i][j]: optimum over nexuses i.. and steps j..
    // first[i][j]: 0 for the empty matching, otherwise 1 + row-major index of
    // the smallest first pair among optimal matchings. Row-major order is
    // lexicographic (i, j) order.
    let mut best = vec![0.0f64; (n + 1) * width];
    let mut first = vec![0usize; (n + 1) * width];

    for i in (0..n).rev() {
        let row = m.row(i);
        let w = weights[i];
        for j in (0..cols).rev() {
            let here = i * width + j;
            let (mut value, mut head) = (best[here + 1], first[here + 1]);
            let (down, down_head) = (best[here + width], first[here + width]);
            if down > value || (down == value && down_head < head) {
                value = down;
                head = down_head;
            }
            let s = row[j];
            if s > tau {
                let matched = w * s + best[here + width + 1];
                let matched_head = i * cols + j + 1;
                if matched > value || (matched == value && matched_head < head) {
                    value = matched;
                    head = matched_head;
                }
            }
            best[here] = value;
            first[here] = head;
        }
    }

    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < cols {
        let head = first[i * width + j];
        if head == 0 {
            break;
        }
        let (pi, pj) = ((head - 1) / cols, (head - 1) % cols);
        pairs.push((pi, pj));
        i = pi + 1;
        j = pj + 1;
    }
    Matching::new(pairs, MatchStrategy::DynamicProgramming, tau)
}

/// `Σ w_i · M[i][j]` over the pairs, accumulated from the last pair backwards
/// (the same association order the DP recurrence uses).
pub fn alignment_objective(m: &SimilarityMatrix, weights: &[f64], pairs: &[(usize, usize)]) -> f64 {
    pairs
        .iter()
        .rev()
        .fold(0.0, |acc, &(i, j)| weights[i] * m.get(i, j) + acc)
}

/// Dispatches on `strategy`.
pub fn match_with(strategy: MatchStrategy, m: &SimilarityMatrix, tau: f64, weights: &[f64]) -> Matching {
    match strategy {
        MatchStrategy::Greedy => match_greedy(m, tau),
        MatchStrategy::DynamicProgramming => match_dp(m, tau, weights),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn mat(rows: &[&[f64]]) -> SimilarityMatrix {
        SimilarityMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn greedy_picks_diagonal() {
        let m = mat(&[&[0.8, 0.1], &[0.2, 0.5]]);
        assert_eq!(match_greedy(&m, 0.3).pairs(), &[(0, 0), (1, 1)]);
    }

    #[test]
    fn greedy_tie_goes_to_smaller_indices() {
        let m = mat(&[&[0.9, 0.9]]);
        assert_eq!(match_greedy(&m, 0.3).pairs(), &[(0, 0)]);
        let m = mat(&[&[0.9], &[0.9]]);
        assert_eq!(match_greedy(&m, 0.3).pairs(), &[(0, 0)]);
        let m = mat(&[&[0.5, 0.9], &[0.9, 0.5]]);
        assert_eq!(match_greedy(&m, 0.3).pairs(), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn greedy_rescans_rows_that_lost_their_column() {
        // Row 1 prefers column 0, which row 0 takes first.
        let m = mat(&[&[0.95, 0.2, 0.1], &[0.9, 0.8, 0.4], &[0.1, 0.85, 0.7]]);
        assert_eq!(match_greedy(&m, 0.3).pairs(), &[(0, 0), (1, 2), (2, 1)]);
    }

    #[test]
    fn threshold_is_strict() {
        let m = mat(&[&[0.3, 0.2], &[0.1, 0.3]]);
        assert!(match_greedy(&m, 0.3).is_empty());
        assert!(match_dp(&m, 0.3, &[1.0, 1.0]).is_empty());
    }

    #[test]
    fn dp_single_cell() {
        let m = mat(&[&[0.9]]);
        assert_eq!(match_dp(&m, 0.3, &[5.0]).pairs(), &[(0, 0)]);
    }

    #[test]
    fn dp_avoids_crossing() {
        // Unrestricted optimum (0,1),(1,0),(2,2) crosses.
        let m = mat(&[&[0.4, 0.9, 0.1], &[0.9, 0.4, 0.1], &[0.1, 0.1, 0.9]]);
        let dp = match_dp(&m, 0.3, &[1.0, 1.0, 1.0]);
        assert!(dp.is_non_crossing());
        assert!(dp.is_valid_for(&m));
        assert_eq!(dp.pairs(), &[(0, 1), (2, 2)]);
        let greedy = match_greedy(&m, 0.3);
        assert_eq!(greedy.pairs(), &[(0, 1), (1, 0), (2, 2)]);
    }

    #[test]
    fn dp_prefers_lexicographically_smallest_on_ties() {
        let m = mat(&[&[0.5, 0.5]]);
        assert_eq!(match_dp(&m, 0.3, &[1.0]).pairs(), &[(0, 0)]);
        let m = mat(&[&[0.5], &[0.5]]);
        assert_eq!(match_dp(&m, 0.3, &[1.0, 1.0]).pairs(), &[(0, 0)]);
    }

    #[test]
    fn strategy_names() {
        assert_eq!("dp".parse::<MatchStrategy>().unwrap(), MatchStrategy::DynamicProgramming);
        assert_eq!(MatchStrategy::Greedy.to_string(), "greedy");
        assert!("hungarian".parse::<MatchStrategy>().is_err());
    }
}
