use alloc::vec::Vec;

use super::PairStats;

/// Fraction of `counts` that are at least `size`.
pub fn ccdf_at(counts: &[u64], size: u64) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    counts.iter().filter(|&&c| c >= size).count() as f64 / counts.len() as f64
}

/// `(size, fraction with count >= size)` at every distinct size, ascending.
pub fn pair_size_ccdf_from_counts(counts: &[u64]) -> Vec<(u64, f64)> {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut out: Vec<(u64, f64)> = Vec::new();
    for (i, &c) in sorted.iter().enumerate() {
        if out.last().is_none_or(|&(s, _)| s != c) {
            out.push((c, (sorted.len() - i) as f64 / n));
        }
    }
    out
}

/// CCDF over every unordered topic pair, empty pairs included.
pub fn pair_size_ccdf(stats: &PairStats) -> Vec<(u64, f64)> {
    let counts: Vec<u64> = stats.all_pairs().map(|(_, c)| c).collect();
    pair_size_ccdf_from_counts(&counts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSizeSummary {
    pub pairs: usize,
    pub empty: f64,
    pub at_least_50: f64,
    pub at_least_100: f64,
}

pub fn pair_size_summary(stats: &PairStats) -> PairSizeSummary {
    let counts: Vec<u64> = stats.all_pairs().map(|(_, c)| c).collect();
    PairSizeSummary {
        pairs: counts.len(),
        empty: if counts.is_empty() { 0.0 } else { 1.0 - ccdf_at(&counts, 1) },
        at_least_50: ccdf_at(&counts, 50),
        at_least_100: ccdf_at(&counts, 100),
    }
}
