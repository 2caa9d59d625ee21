//! Correlation of lexicon features with YA judgments.

use moraltopics_core::lexicon::{pearson, LexiconError};
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least 3 documents, got {0}")]
    TooFewDocuments(usize),
    #[error("YA flags are constant across the group")]
    ConstantFlags,
    #[error("document {doc} has {found} features, expected {expected}")]
    Ragged { doc: usize, expected: usize, found: usize },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    /// `None` when the feature has zero variance.
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub significant: bool,
}

/// Two-sided p-value of a Pearson `r` over `n` points, from the t
/// distribution with `n - 2` degrees of freedom.
pub fn pearson_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Pearson r of every feature column against `ya_flags`, with two-sided
/// p-values; `significant` is `p <= alpha`.
pub fn correlate_ya(features: &[Vec<f64>], ya_flags: &[bool], alpha: f64) -> Result<Vec<Correlation>, StatsError> {
    let n = features.len();
    if n != ya_flags.len() {
        return Err(LexiconError::LengthMismatch {
            left: n,
            right: ya_flags.len(),
        }
        .into());
    }
    if n < 3 {
        return Err(StatsError::TooFewDocuments(n));
    }
    if ya_flags.iter().all(|&f| f == ya_flags[0]) {
        return Err(StatsError::ConstantFlags);
    }
    let width = features[0].len();
    if let Some((doc, row)) = features.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(StatsError::Ragged {
            doc,
            expected: width,
            found: row.len(),
        });
    }
    let y: Vec<f64> = ya_flags.iter().map(|&f| f64::from(u8::from(f))).collect();
    let mut out = Vec::with_capacity(width);
    let mut column = vec![0.0; n];
    for c in 0..width {
        for (slot, row) in column.iter_mut().zip(features) {
            *slot = row[c];
        }
        let r = pearson(&column, &y)?;
        let p = r.map(|r| pearson_p_value(r, n));
        out.push(Correlation {
            r,
            p,
            significant: p.is_some_and(|p| p <= alpha),
        });
    }
    Ok(out)
}
