use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::MetricsError;

/// Document and co-document frequencies for a fixed set of terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherenceCounts<T: Ord> {
    d1: BTreeMap<T, u64>,
    d2: BTreeMap<(T, T), u64>,
}

impl<T: Ord + Clone> CoherenceCounts<T> {
    /// Counts over `docs`, tracking only `terms`. Repeats within a document
    /// count once.
    pub fn from_documents<D, I>(docs: D, terms: &BTreeSet<T>) -> Self
    where
        D: IntoIterator<Item = I>,
        I: IntoIterator<Item = T>,
    {
        let mut d1 = BTreeMap::new();
        let mut d2 = BTreeMap::new();
        for doc in docs {
            let present: Vec<T> = doc
                .into_iter()
                .filter(|t| terms.contains(t))
                .collect::<BTreeSet<T>>()
                .into_iter()
                .collect();
            for (i, x) in present.iter().enumerate() {
                *d1.entry(x.clone()).or_insert(0) += 1;
                for y in &present[i + 1..] {
                    *d2.entry((x.clone(), y.clone())).or_insert(0) += 1;
                }
            }
        }
        CoherenceCounts { d1, d2 }
    }

    pub fn doc_freq(&self, term: &T) -> u64 {
        self.d1.get(term).copied().unwrap_or(0)
    }

    pub fn co_doc_freq(&self, x: &T, y: &T) -> u64 {
        let k = if x <= y { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) };
        self.d2.get(&k).copied().unwrap_or(0)
    }
}

/// UMass coherence of an ordered top-term list, natural log, divided by the
/// number of term pairs.
pub fn umass_coherence<T: Ord + Clone>(top_terms: &[T], counts: &CoherenceCounts<T>) -> Result<f64, MetricsError> {
    let n = top_terms.len();
    if n < 2 {
        return Err(MetricsError::TooFewTerms(n));
    }
    if let Some(pos) = top_terms.iter().position(|t| counts.doc_freq(t) == 0) {
        return Err(MetricsError::ZeroDocFreq(pos));
    }
    let mut c = 0.0;
    for m in 1..n {
        let dm = counts.doc_freq(&top_terms[m]) as f64;
        for l in 0..m {
            let joint = counts.co_doc_freq(&top_terms[m], &top_terms[l]) as f64;
            c += libm::log((joint + 1.0) / dm);
        }
    }
    Ok(c / (0.5 * (n * (n - 1)) as f64))
}
