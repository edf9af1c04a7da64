//! Straight-from-the-definition reference implementations used as oracles.
//! Nothing here calls into the crate's metric code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..30.0_f64).round()).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 10.0;
    }
    w
}

pub fn plain_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Greedy matching by scanning the whole matrix for the best remaining pair
/// each round.
pub fn naive_greedy(m: &[Vec<f64>], tau: f64) -> Vec<(usize, usize)> {
    let n = m.len();
    let cols = m[0].len();
    let mut row_used = vec![false; n];
    let mut col_used = vec![false; cols];
    let mut pairs = Vec::new();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for i in 0..n {
            for j in 0..cols {
                if row_used[i] || col_used[j] || m[i][j] <= tau {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| m[i][j] > m[bi][bj]) {
                    best = Some((i, j));
                }
            }
        }
        match best {
            Some((i, j)) => {
                row_used[i] = true;
                col_used[j] = true;
                pairs.push((i, j));
            }
            None => break,
        }
    }
    pairs.sort();
    pairs
}

/// Every one-to-one matching over eligible pairs (optionally non-crossing).
pub fn all_matchings(m: &[Vec<f64>], tau: f64, non_crossing: bool) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        m: &[Vec<f64>],
        tau: f64,
        non_crossing: bool,
        i: usize,
        col_used: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if i == m.len() {
            out.push(current.clone());
            return;
        }
        rec(m, tau, non_crossing, i + 1, col_used, current, out);
        let min_j = if non_crossing {
            current.last().map_or(0, |&(_, j)| j + 1)
        } else {
            0
        };
        for j in min_j..m[0].len() {
            if col_used[j] || m[i][j] <= tau {
                continue;
            }
            col_used[j] = true;
            current.push((i, j));
            rec(m, tau, non_crossing, i + 1, col_used, current, out);
            current.pop();
            col_used[j] = false;
        }
    }
    let mut out = Vec::new();
    rec(m, tau, non_crossing, 0, &mut vec![false; m[0].len()], &mut Vec::new(), &mut out);
    out
}

/// Same association order as the crate's DP: last pair first.
pub fn objective(m: &[Vec<f64>], w: &[f64], pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().rev().fold(0.0, |acc, &(i, j)| w[i] * m[i][j] + acc)
}

pub struct EqScores {
    pub precision: f64,
    pub recall: f64,
    pub fidelity: f64,
    pub causal: f64,
    pub progress: f64,
}

/// The three metrics written directly from their defining equations, with
/// negative similarities clamped to zero.
pub fn equations(m: &[Vec<f64>], w: &[f64], pairs: &[(usize, usize)]) -> EqScores {
    let n = m.len();
    let cols = m[0].len();
    let total_w: f64 = w.iter().sum();

    let mut recall = 0.0;
    for &(i, j) in pairs {
        recall += w[i] * m[i][j].max(0.0);
    }
    recall /= total_w;
    let precision = pairs.len() as f64 / cols as f64;
    let fidelity = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    let mut centroid = vec![None; n];
    for i in 0..n {
        let num: f64 = (1..=cols).map(|j| j as f64 * m[i][j - 1].max(0.0)).sum();
        let den: f64 = (1..=cols).map(|j| m[i][j - 1].max(0.0)).sum();
        if den > 0.0 {
            centroid[i] = Some(num / den);
        }
    }
    let mut good = 0.0;
    let mut all = 0.0;
    for i in 0..n {
        for k in (i + 1)..n {
            if let (Some(a), Some(b)) = (centroid[i], centroid[k]) {
                all += w[i] + w[k];
                if a < b {
                    good += w[i] + w[k];
                }
            }
        }
    }
    let causal = if all > 0.0 { good / all } else { 1.0 };

    let progress = if cols == 1 {
        1.0
    } else {
        let col = |j: usize| -> Vec<f64> { (0..n).map(|i| m[i][j].max(0.0)).collect() };
        let mut sum = 0.0;
        for j in 1..cols {
            let sj = col(j);
            let mut best = f64::NEG_INFINITY;
            for k in 0..j {
                best = best.max(plain_cosine(&sj, &col(k)));
            }
            sum += 1.0 - best;
        }
        sum / (cols - 1) as f64
    };

    EqScores {
        precision,
        recall: recall.clamp(0.0, 1.0),
        fidelity,
        causal,
        progress: progress.clamp(0.0, 1.0),
    }
}

pub fn two_pass_moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn textbook_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|a| a * a).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Rank by counting: `#less + (#equal + 1) / 2`.
pub fn counting_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&u| u < v).count() as f64;
            let equal = x.iter().filter(|&&u| u == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}
