//! Composite logic score and top-κ selection for distillation data.
//!
//! Each raw metric `X` is z-normalized against corpus moments and squashed:
//! `X~ = sigmoid((X - mean) / std)`, with `X~ = 0.5` when `std == 0`. The
//! composite is
//!
//! ```text
//! S = δF · 2·π~·ρ~ / (π~ + ρ~) + δO · O~ + δP · P~
//! ```

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::metrics::LogicalityScores;

/// Population mean and standard deviation of one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub fn normalize(&self, x: f64) -> f64 {
        if self.std == 0.0 {
            0.5
        } else {
            sigmoid((x - self.mean) / self.std)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub precision: Moments,
    pub recall: Moments,
    pub causal: Moments,
    pub progress: Moments,
    pub count: usize,
}

/// Welford accumulator; divides by N.
#[derive(Debug, Clone, Copy, Default)]
struct Running {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn moments(&self) -> Moments {
        Moments {
            mean: self.mean,
            std: libm::sqrt((self.m2 / self.count as f64).max(0.0)),
        }
    }
}

pub fn corpus_stats<'a, I>(scores: I) -> Result<CorpusStats, Error>
where
    I: IntoIterator<Item = &'a LogicalityScores>,
{
    let mut acc = [Running::default(); 4];
    for s in scores {
        acc[0].push(s.precision);
        acc[1].push(s.recall);
        acc[2].push(s.causal);
        acc[3].push(s.progress);
    }
    if acc[0].count == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(CorpusStats {
        precision: acc[0].moments(),
        recall: acc[1].moments(),
        causal: acc[2].moments(),
        progress: acc[3].moments(),
        count: acc[0].count,
    })
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeConfig {
    pub delta_f: f64,
    pub delta_o: f64,
    pub delta_p: f64,
    pub kappa: f64,
}

impl Default for CompositeConfig {
    fn default() -> Self {
        Self {
            delta_f: 0.25,
            delta_o: 0.50,
            delta_p: 0.25,
            kappa: 0.5,
        }
    }
}

impl CompositeConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let deltas = [self.delta_f, self.delta_o, self.delta_p];
        if deltas.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidConfig("deltas must be finite and non-negative"));
        }
        if deltas.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidConfig("at least one delta must be positive"));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidConfig("kappa must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// The three composite dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Fidelity,
    Causal,
    Progress,
}

/// Drops one dimension and splits the weight evenly over the other two.
pub fn ablation_config(drop: Dimension) -> CompositeConfig {
    let (delta_f, delta_o, delta_p) = match drop {
        Dimension::Fidelity => (0.0, 0.5, 0.5),
        Dimension::Causal => (0.5, 0.0, 0.5),
        Dimension::Progress => (0.5, 0.5, 0.0),
    };
    CompositeConfig {
        delta_f,
        delta_o,
        delta_p,
        ..CompositeConfig::default()
    }
}

pub fn composite_score(scores: &LogicalityScores, stats: &CorpusStats, cfg: &CompositeConfig) -> f64 {
    let p = stats.precision.normalize(scores.precision);
    let r = stats.recall.normalize(scores.recall);
    let o = stats.causal.normalize(scores.causal);
    let q = stats.progress.normalize(scores.progress);
    debug_assert!(p + r > 0.0, "sigmoid outputs are positive");
    let fidelity = 2.0 * p * r / (p + r);
    cfg.delta_f * fidelity + cfg.delta_o * o + cfg.delta_p * q
}

/// `⌈κ·N⌉`, ignoring float noise in the product (0.3 · 10 selects 3).
pub fn selection_size(n: usize, kappa: f64) -> usize {
    let x = kappa * n as f64;
    let nearest = libm::round(x);
    let k = if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest
    } else {
        libm::ceil(x)
    };
    (k as usize).min(n)
}

/// Ids of the `⌈κ·N⌉` highest scores; equal scores are ordered by ascending id.
pub fn select_top_kappa<S: AsRef<str>>(items: &[(S, f64)], kappa: f64) -> Vec<String> {
    let mut order: Vec<&(S, f64)> = items.iter().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.as_ref().cmp(b.0.as_ref())));
    order
        .into_iter()
        .take(selection_size(items.len(), kappa))
        .map(|(id, _)| String::from(id.as_ref()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn scores(p: f64, r: f64, o: f64, q: f64) -> LogicalityScores {
        LogicalityScores {
            precision: p,
            recall: r,
            fidelity: crate::metrics::harmonic(p, r),
            causal: o,
            progress: q,
            centroids: vec![],
        }
    }

    #[test]
    fn single_item_stats() {
        let s = corpus_stats(&[scores(0.2, 0.4, 0.6, 0.8)]).unwrap();
        assert_eq!(s.precision, Moments { mean: 0.2, std: 0.0 });
        assert_eq!(s.progress, Moments { mean: 0.8, std: 0.0 });
        assert_eq!(s.count, 1);
    }

    #[test]
    fn two_point_population_std() {
        let s = corpus_stats(&[scores(0.2, 0.0, 0.0, 0.0), scores(0.8, 0.0, 0.0, 0.0)]).unwrap();
        assert!((s.precision.mean - 0.5).abs() < 1e-15);
        assert!((s.precision.std - 0.3).abs() < 1e-15);
    }

    #[test]
    fn empty_corpus_errors() {
        let none: [LogicalityScores; 0] = [];
        assert_eq!(corpus_stats(&none), Err(Error::EmptyCorpus));
    }

    #[test]
    fn mean_item_scores_half() {
        let corpus = [scores(0.2, 0.3, 0.5, 0.1), scores(0.6, 0.7, 0.9, 0.3)];
        let stats = corpus_stats(&corpus).unwrap();
        let mid = scores(0.4, 0.5, 0.7, 0.2);
        let s = composite_score(&mid, &stats, &CompositeConfig::default());
        assert!((s - 0.5).abs() < 1e-12, "{s}");
    }

    #[test]
    fn fidelity_only_equal_inputs() {
        let corpus = [scores(0.2, 0.2, 0.5, 0.1), scores(0.6, 0.6, 0.9, 0.3)];
        let stats = corpus_stats(&corpus).unwrap();
        let cfg = CompositeConfig {
            delta_f: 1.0,
            delta_o: 0.0,
            delta_p: 0.0,
            kappa: 0.5,
        };
        let item = scores(0.5, 0.5, 0.0, 0.0);
        let expected = stats.precision.normalize(0.5);
        assert!((composite_score(&item, &stats, &cfg) - expected).abs() < 1e-15);
    }

    #[test]
    fn ablations() {
        let f = ablation_config(Dimension::Fidelity);
        assert_eq!((f.delta_f, f.delta_o, f.delta_p, f.kappa), (0.0, 0.5, 0.5, 0.5));
        let o = ablation_config(Dimension::Causal);
        assert_eq!((o.delta_f, o.delta_o, o.delta_p), (0.5, 0.0, 0.5));
        let p = ablation_config(Dimension::Progress);
        assert_eq!((p.delta_f, p.delta_o, p.delta_p), (0.5, 0.5, 0.0));
    }

    #[test]
    fn selection_counts_and_ties() {
        let items: Vec<(String, f64)> = (0..10).map(|i| (format!("id{i}"), i as f64)).collect();
        assert_eq!(select_top_kappa(&items, 0.5).len(), 5);
        assert_eq!(select_top_kappa(&items, 0.5)[0], "id9");

        let flat: Vec<(String, f64)> = (0..10).rev().map(|i| (format!("id{i}"), 1.0)).collect();
        assert_eq!(select_top_kappa(&flat, 0.3), vec!["id0", "id1", "id2"]);
    }

    #[test]
    fn selection_size_rounding() {
        assert_eq!(selection_size(10, 0.3), 3);
        assert_eq!(selection_size(10, 0.31), 4);
        assert_eq!(selection_size(1, 0.01), 1);
        assert_eq!(selection_size(7, 1.0), 7);
        assert_eq!(selection_size(80_000, 0.5), 40_000);
    }

    #[test]
    fn config_validation() {
        assert!(CompositeConfig::default().validate().is_ok());
        let bad = CompositeConfig {
            kappa: 0.0,
            ..CompositeConfig::default()
        };
        assert!(bad.validate().is_err());
        let zero = CompositeConfig {
            delta_f: 0.0,
            delta_o: 0.0,
            delta_p: 0.0,
            kappa: 0.5,
        };
        assert!(zero.validate().is_err());
    }
}
