use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::MetricsError;

/// Top-1 marginals and unordered pair counts over a document set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairStats {
    topics: Vec<String>,
    marginals: Vec<u64>,
    /// Keyed by `(i, j)` with `i < j`.
    counts: BTreeMap<(usize, usize), u64>,
    total: u64,
}

fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl PairStats {
    /// Counts `(top1, top2)` topic indices, one entry per document.
    pub fn from_assignments(topics: Vec<String>, assignments: &[(usize, usize)]) -> Result<Self, MetricsError> {
        let n = topics.len();
        let mut marginals = vec![0u64; n];
        let mut counts = BTreeMap::new();
        for &(t1, t2) in assignments {
            for t in [t1, t2] {
                if t >= n {
                    return Err(MetricsError::TopicOutOfRange { index: t, num_topics: n });
                }
            }
            if t1 == t2 {
                return Err(MetricsError::SameTopic(t1));
            }
            marginals[t1] += 1;
            *counts.entry(key(t1, t2)).or_insert(0) += 1;
        }
        Ok(PairStats {
            topics,
            marginals,
            counts,
            total: assignments.len() as u64,
        })
    }

    /// Assembles precomputed counts. Pair counts may not exceed `total` and
    /// marginals must sum to it.
    pub fn from_parts(
        topics: Vec<String>,
        marginals: Vec<u64>,
        pair_counts: impl IntoIterator<Item = ((usize, usize), u64)>,
        total: u64,
    ) -> Result<Self, MetricsError> {
        let n = topics.len();
        if marginals.len() != n {
            return Err(MetricsError::LengthMismatch {
                left: n,
                right: marginals.len(),
            });
        }
        let mut counts = BTreeMap::new();
        for ((i, j), c) in pair_counts {
            for t in [i, j] {
                if t >= n {
                    return Err(MetricsError::TopicOutOfRange { index: t, num_topics: n });
                }
            }
            if i == j {
                return Err(MetricsError::SameTopic(i));
            }
            if c > 0 {
                *counts.entry(key(i, j)).or_insert(0) += c;
            }
        }
        let pairs: u64 = counts.values().sum();
        if pairs > total {
            return Err(MetricsError::PairsExceedTotal { pairs, total });
        }
        let m: u64 = marginals.iter().sum();
        if m != total {
            return Err(MetricsError::MarginalMismatch { marginals: m, total });
        }
        Ok(PairStats {
            topics,
            marginals,
            counts,
            total,
        })
    }

    pub fn topics(&self) -> &[String] {
        &self.topics
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn marginal(&self, topic: usize) -> u64 {
        self.marginals[topic]
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts.get(&key(i, j)).copied().unwrap_or(0)
    }

    /// Every unordered pair `(i, j)`, `i < j`, with its count, zeros included.
    pub fn all_pairs(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        let n = self.topics.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| ((i, j), self.count(i, j))))
    }

    /// Pairs with a non-zero count.
    pub fn nonzero_pairs(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }
}

/// `log2(p_joint / (p_a * p_b))`, undefined when any term is zero.
pub fn pmi(p_joint: f64, p_a: f64, p_b: f64) -> Option<f64> {
    (p_joint > 0.0 && p_a > 0.0 && p_b > 0.0).then(|| libm::log2(p_joint / (p_a * p_b)))
}

/// Symmetric PMI matrix; `None` marks an undefined cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PmiMatrix {
    pub topics: Vec<String>,
    cells: Vec<Option<f64>>,
}

impl PmiMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i * self.topics.len() + j]
    }

    pub fn size(&self) -> usize {
        self.topics.len()
    }
}

pub fn pmi_matrix(stats: &PairStats) -> Result<PmiMatrix, MetricsError> {
    if stats.total == 0 {
        return Err(MetricsError::Empty);
    }
    let n = stats.topics.len();
    let total = stats.total as f64;
    let mut cells = vec![None; n * n];
    for (&(i, j), &c) in &stats.counts {
        let v = pmi(
            c as f64 / total,
            stats.marginals[i] as f64 / total,
            stats.marginals[j] as f64 / total,
        );
        cells[i * n + j] = v;
        cells[j * n + i] = v;
    }
    Ok(PmiMatrix {
        topics: stats.topics.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("t{i}")).collect()
    }

    #[test]
    fn analytic_values() {
        assert!(pmi(0.25, 0.5, 0.5).unwrap().abs() < 1e-15);
        assert!((pmi(0.5, 0.5, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pmi(0.0, 0.5, 0.5), None);
    }

    #[test]
    fn matrix_from_assignments() {
        // 4 docs: (0,1) (0,1) (1,2) (2,0)
        let stats = PairStats::from_assignments(names(3), &[(0, 1), (0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(stats.marginal(0), 2);
        assert_eq!(stats.count(1, 0), 2);
        let m = pmi_matrix(&stats).unwrap();
        // p(0,1)=0.5, p(0)=0.5, p(1)=0.25
        assert!((m.get(0, 1).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert_eq!(m.get(1, 1), None);
        let all: Vec<_> = stats.all_pairs().collect();
        assert_eq!(all, vec![((0, 1), 2), ((0, 2), 1), ((1, 2), 1)]);
    }

    #[test]
    fn zero_marginal_row_is_undefined() {
        let stats = PairStats::from_assignments(names(3), &[(0, 2), (0, 2)]).unwrap();
        let m = pmi_matrix(&stats).unwrap();
        assert_eq!(m.get(0, 2), None);
        assert_eq!(m.get(1, 0), None);
    }

    #[test]
    fn validation() {
        assert_eq!(
            PairStats::from_assignments(names(2), &[(0, 0)]),
            Err(MetricsError::SameTopic(0))
        );
        assert_eq!(
            pmi_matrix(&PairStats::from_assignments(names(2), &[]).unwrap()),
            Err(MetricsError::Empty)
        );
        assert_eq!(
            PairStats::from_parts(names(2), vec![1, 1], [((0, 1), 3)], 2),
            Err(MetricsError::PairsExceedTotal { pairs: 3, total: 2 })
        );
        assert!(PairStats::from_parts(vec!["a".to_string()], vec![], [], 0).is_err());
    }
}
