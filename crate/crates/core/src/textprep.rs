//! Tokenization, lemmatization, vocabulary pruning and bag-of-words vectors.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::seed::fnv1a64_extend;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VocabularyError {
    #[error("vocabulary is empty after stopword removal and min_df={min_df} pruning")]
    Empty { min_df: u32 },
    #[error("term {0:?} appears twice in vocabulary")]
    DuplicateTerm(String),
    #[error("{terms} terms but {freqs} document frequencies")]
    LengthMismatch { terms: usize, freqs: usize },
}

/// Lowercased tokens split at every character that is neither a letter nor
/// a digit. Pure-digit tokens and single-character tokens are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().nth(1).is_some() && !t.chars().all(char::is_numeric))
        .map(str::to_lowercase)
        .collect()
}

/// Surface form to lemma lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaTable {
    entries: BTreeMap<String, String>,
}

impl LemmaTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, surface: impl Into<String>, lemma: impl Into<String>) {
        self.entries.insert(surface.into(), lemma.into());
    }

    pub fn get(&self, surface: &str) -> Option<&str> {
        self.entries.get(surface).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<S: Into<String>, L: Into<String>> FromIterator<(S, L)> for LemmaTable {
    fn from_iter<I: IntoIterator<Item = (S, L)>>(iter: I) -> Self {
        let mut t = LemmaTable::new();
        for (s, l) in iter {
            t.insert(s, l);
        }
        t
    }
}

/// Replaces each token found in the table; others pass through.
pub fn lemmatize(tokens: Vec<String>, table: &LemmaTable) -> Vec<String> {
    tokens
        .into_iter()
        .map(|t| match table.get(&t) {
            Some(lemma) => String::from(lemma),
            None => t,
        })
        .collect()
}

/// Pruned training vocabulary, ordered by descending document frequency and
/// then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: BTreeMap<String, u32>,
    doc_freq: Vec<u32>,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from its exported form. Order is taken as given.
    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<u32>) -> Result<Self, VocabularyError> {
        if terms.len() != doc_freq.len() {
            return Err(VocabularyError::LengthMismatch {
                terms: terms.len(),
                freqs: doc_freq.len(),
            });
        }
        let mut index = BTreeMap::new();
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(VocabularyError::DuplicateTerm(t.clone()));
            }
        }
        Ok(Vocabulary {
            terms,
            index,
            doc_freq,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, index: usize) -> u32 {
        self.doc_freq[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.terms
            .iter()
            .map(String::as_str)
            .zip(self.doc_freq.iter().copied())
    }

    /// Order-sensitive hash of the term list, used to check that a model
    /// and a vocabulary belong together.
    pub fn fingerprint(&self) -> u64 {
        self.terms.iter().fold(0xcbf2_9ce4_8422_2325, |h, t| {
            fnv1a64_extend(fnv1a64_extend(h, t.as_bytes()), &[0xff])
        })
    }
}

/// Keeps non-stopword terms occurring in at least `min_df` documents.
pub fn build_vocabulary<D, S>(
    docs: &[D],
    stopwords: &BTreeSet<String>,
    min_df: u32,
) -> Result<Vocabulary, VocabularyError>
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for doc in docs {
        let distinct: BTreeSet<&str> = doc.as_ref().iter().map(AsRef::as_ref).collect();
        for t in distinct {
            if !stopwords.contains(t) {
                *df.entry(t).or_insert(0) += 1;
            }
        }
    }
    let mut kept: Vec<(&str, u32)> = df.into_iter().filter(|&(_, n)| n >= min_df).collect();
    if kept.is_empty() {
        return Err(VocabularyError::Empty { min_df });
    }
    // BTreeMap iteration is already lexicographic; a stable sort keeps it
    // as the secondary key.
    kept.sort_by_key(|&(_, n)| core::cmp::Reverse(n));
    let (terms, doc_freq) = kept.into_iter().map(|(t, n)| (String::from(t), n)).unzip();
    Vocabulary::from_parts(terms, doc_freq)
}

/// Sparse word counts of one document over a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocBow {
    pub doc_id: String,
    /// `(term index, count)` sorted by index; every count is at least one.
    pub counts: Vec<(u32, u32)>,
}

impl DocBow {
    /// Builds from arbitrary `(index, count)` pairs, merging repeats and
    /// dropping zero counts.
    pub fn from_counts(doc_id: impl Into<String>, pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut merged: BTreeMap<u32, u32> = BTreeMap::new();
        for (i, c) in pairs {
            if c > 0 {
                *merged.entry(i).or_insert(0) += c;
            }
        }
        DocBow {
            doc_id: doc_id.into(),
            counts: merged.into_iter().collect(),
        }
    }

    /// Empty documents are unscorable and excluded from training.
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| u64::from(c)).sum()
    }

    /// Token indices with multiplicity, in index order.
    pub fn tokens(&self) -> impl Iterator<Item = u32> + '_ {
        self.counts
            .iter()
            .flat_map(|&(i, c)| core::iter::repeat_n(i, c as usize))
    }

    pub fn max_index(&self) -> Option<u32> {
        self.counts.last().map(|&(i, _)| i)
    }
}

/// Counts in-vocabulary tokens; out-of-vocabulary tokens are ignored.
pub fn vectorize<S: AsRef<str>>(doc_id: impl Into<String>, tokens: &[S], vocab: &Vocabulary) -> DocBow {
    DocBow::from_counts(
        doc_id,
        tokens
            .iter()
            .filter_map(|t| vocab.index_of(t.as_ref()))
            .map(|i| (i, 1)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_rules() {
        assert_eq!(
            tokenize("My sister's DOG barked 3 times"),
            strings(&["my", "sister", "dog", "barked", "times"])
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("café—menu"), strings(&["café", "menu"]));
        assert_eq!(tokenize("covid19 2020 a1 x"), strings(&["covid19", "a1"]));
        assert_eq!(tokenize("ÉCOLE"), strings(&["école"]));
    }

    #[test]
    fn lemmatize_lookup() {
        let table: LemmaTable = [("barked", "bark"), ("dogs", "dog")].into_iter().collect();
        assert_eq!(
            lemmatize(strings(&["barked", "dogs", "cat"]), &table),
            strings(&["bark", "dog", "cat"])
        );
        assert_eq!(
            lemmatize(strings(&["barked"]), &LemmaTable::new()),
            strings(&["barked"])
        );
    }

    #[test]
    fn vocabulary_min_df_and_stopwords() {
        let mut docs = Vec::new();
        for i in 0..30 {
            let mut d = strings(&["family", "the"]);
            if i < 19 {
                d.push("rare".to_string());
            }
            if i < 20 {
                d.push("money".to_string());
            }
            docs.push(d);
        }
        let stop: BTreeSet<String> = ["the".to_string()].into_iter().collect();
        let v = build_vocabulary(&docs, &stop, 20).unwrap();
        assert_eq!(v.terms(), &strings(&["family", "money"])[..]);
        assert_eq!(v.doc_freq(0), 30);
        assert_eq!(v.doc_freq(1), 20);
        assert!(v.index_of("rare").is_none());
        assert!(v.index_of("the").is_none());
    }

    #[test]
    fn vocabulary_ties_are_lexicographic() {
        let docs = vec![strings(&["b", "a", "c"]), strings(&["c", "b", "a", "a"])];
        let v = build_vocabulary(&docs, &BTreeSet::new(), 1).unwrap();
        assert_eq!(v.terms(), &strings(&["a", "b", "c"])[..]);
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let docs = vec![strings(&["once"])];
        assert_eq!(
            build_vocabulary(&docs, &BTreeSet::new(), 2),
            Err(VocabularyError::Empty { min_df: 2 })
        );
    }

    #[test]
    fn vectorize_counts() {
        let v = Vocabulary::from_parts(strings(&["dog", "cat"]), vec![5, 4]).unwrap();
        let bow = vectorize("d", &strings(&["dog", "dog", "cat", "emu"]), &v);
        assert_eq!(bow.counts, vec![(0, 2), (1, 1)]);
        assert_eq!(bow.total(), 3);
        assert!(vectorize("e", &strings(&["emu"]), &v).is_empty());
        let tokens: Vec<u32> = bow.tokens().collect();
        assert_eq!(tokens, vec![0, 0, 1]);
    }

    #[test]
    fn fingerprint_is_order_sensitive() {
        let a = Vocabulary::from_parts(strings(&["x", "y"]), vec![1, 1]).unwrap();
        let b = Vocabulary::from_parts(strings(&["y", "x"]), vec![1, 1]).unwrap();
        let c = Vocabulary::from_parts(strings(&["xy"]), vec![1]).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
