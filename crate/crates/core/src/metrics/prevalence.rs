use alloc::vec;
use alloc::vec::Vec;

use super::MetricsError;

/// Percentage of documents having a topic as top-1, and as top-1 or top-2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prevalence {
    pub top1_pct: f64,
    pub top12_pct: f64,
}

/// `assignments` holds each document's `(top1, top2)` topic indices.
pub fn prevalence(assignments: &[(usize, usize)], num_topics: usize) -> Result<Vec<Prevalence>, MetricsError> {
    if assignments.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut top1 = vec![0u64; num_topics];
    let mut top12 = vec![0u64; num_topics];
    for &(t1, t2) in assignments {
        for t in [t1, t2] {
            if t >= num_topics {
                return Err(MetricsError::TopicOutOfRange { index: t, num_topics });
            }
        }
        top1[t1] += 1;
        top12[t1] += 1;
        if t2 != t1 {
            top12[t2] += 1;
        }
    }
    let n = assignments.len() as f64;
    Ok(top1
        .into_iter()
        .zip(top12)
        .map(|(a, b)| Prevalence {
            top1_pct: 100.0 * a as f64 / n,
            top12_pct: 100.0 * b as f64 / n,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shares() {
        let p = prevalence(&[(0, 1), (0, 2), (1, 0), (2, 1)], 3).unwrap();
        assert_eq!(p[0].top1_pct, 50.0);
        assert_eq!(p[0].top12_pct, 75.0);
        assert_eq!(p[1].top12_pct, 75.0);
        let total: f64 = p.iter().map(|x| x.top1_pct).sum();
        assert!((total - 100.0).abs() < 1e-9);
        assert!(p.iter().all(|x| x.top12_pct >= x.top1_pct));
        assert_eq!(prevalence(&[], 3), Err(MetricsError::Empty));
    }
}
