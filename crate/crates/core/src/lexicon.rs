//! Word-list scoring: per-category match fractions, moral-foundation
//! presence flags, valence-split prevalence and Pearson correlation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Valence;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("category {0:?} appears twice")]
    DuplicateCategory(String),
    #[error("category {0:?} has no words")]
    EmptyCategory(String),
    #[error("lexicon has no categories")]
    NoCategories,
    #[error("unknown match mode {0:?}")]
    UnknownMode(String),
    #[error("a foundation lexicon needs exactly the categories care, fairness, loyalty, authority, sanctity; found {0:?}")]
    NotFoundations(Vec<String>),
    #[error("no items with YA or NA valence")]
    NoValencedItems,
    #[error("input is empty")]
    Empty,
    #[error("inputs have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchMode {
    #[default]
    Exact,
    /// A word ending in `*` matches any token starting with the rest.
    PrefixWildcard,
}

impl MatchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchMode::Exact => "EXACT",
            MatchMode::PrefixWildcard => "PREFIX_WILDCARD",
        }
    }
}

impl core::str::FromStr for MatchMode {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EXACT" => Ok(MatchMode::Exact),
            "PREFIX_WILDCARD" => Ok(MatchMode::PrefixWildcard),
            _ => Err(LexiconError::UnknownMode(String::from(s))),
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Category {
    name: String,
    words: BTreeSet<String>,
    exact: BTreeSet<String>,
    prefixes: Vec<String>,
}

impl Category {
    fn matches(&self, token: &str) -> bool {
        self.exact.contains(token) || self.prefixes.iter().any(|p| token.starts_with(p.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    name: String,
    mode: MatchMode,
    categories: Vec<Category>,
}

impl Lexicon {
    /// Categories keep their given order; repeated words collapse.
    pub fn new<C, W, S>(name: impl Into<String>, mode: MatchMode, categories: C) -> Result<Self, LexiconError>
    where
        C: IntoIterator<Item = (S, W)>,
        W: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let mut cats = Vec::new();
        for (cname, words) in categories {
            let cname: String = cname.into();
            if !seen.insert(cname.clone()) {
                return Err(LexiconError::DuplicateCategory(cname));
            }
            let words: BTreeSet<String> = words.into_iter().map(Into::into).filter(|w: &String| !w.is_empty()).collect();
            if words.is_empty() {
                return Err(LexiconError::EmptyCategory(cname));
            }
            let mut exact = BTreeSet::new();
            let mut prefixes = Vec::new();
            for w in &words {
                match (mode, w.strip_suffix('*')) {
                    (MatchMode::PrefixWildcard, Some(stem)) => prefixes.push(String::from(stem)),
                    _ => {
                        exact.insert(w.clone());
                    }
                }
            }
            cats.push(Category {
                name: cname,
                words,
                exact,
                prefixes,
            });
        }
        if cats.is_empty() {
            return Err(LexiconError::NoCategories);
        }
        Ok(Lexicon {
            name: name.into(),
            mode,
            categories: cats,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn category_names(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|c| c.name.as_str())
    }

    pub fn words(&self, category: usize) -> &BTreeSet<String> {
        &self.categories[category].words
    }

    pub fn matches(&self, category: usize, token: &str) -> bool {
        self.categories[category].matches(token)
    }
}

/// Per-category share of tokens that match.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryFractions {
    pub values: Vec<f64>,
    /// The document had no tokens; `values` is all zero.
    pub empty_document: bool,
}

pub fn category_fractions<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> CategoryFractions {
    let mut hits = alloc::vec![0u64; lexicon.len()];
    for t in tokens {
        for (c, cat) in lexicon.categories.iter().enumerate() {
            if cat.matches(t.as_ref()) {
                hits[c] += 1;
            }
        }
    }
    let n = tokens.len() as f64;
    CategoryFractions {
        values: hits
            .into_iter()
            .map(|h| if tokens.is_empty() { 0.0 } else { h as f64 / n })
            .collect(),
        empty_document: tokens.is_empty(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Foundation {
    Care,
    Fairness,
    Loyalty,
    Authority,
    Sanctity,
}

impl Foundation {
    pub const ALL: [Foundation; 5] = [
        Foundation::Care,
        Foundation::Fairness,
        Foundation::Loyalty,
        Foundation::Authority,
        Foundation::Sanctity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Foundation::Care => "care",
            Foundation::Fairness => "fairness",
            Foundation::Loyalty => "loyalty",
            Foundation::Authority => "authority",
            Foundation::Sanctity => "sanctity",
        }
    }
}

/// Presence flag per foundation, in [`Foundation::ALL`] order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FoundationVector(pub [bool; 5]);

impl FoundationVector {
    pub fn get(&self, f: Foundation) -> bool {
        self.0[f as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| !b)
    }
}

/// Lexicon category index for each foundation.
fn foundation_columns(mfd: &Lexicon) -> Result<[usize; 5], LexiconError> {
    let names: Vec<String> = mfd.category_names().map(String::from).collect();
    let mut cols = [usize::MAX; 5];
    if names.len() == 5 {
        for (c, n) in names.iter().enumerate() {
            if let Some(f) = Foundation::ALL.iter().find(|f| f.as_str().eq_ignore_ascii_case(n)) {
                cols[*f as usize] = c;
            }
        }
    }
    if cols.contains(&usize::MAX) {
        return Err(LexiconError::NotFoundations(names));
    }
    Ok(cols)
}

pub fn foundation_presence<S: AsRef<str>>(tokens: &[S], mfd: &Lexicon) -> Result<FoundationVector, LexiconError> {
    let cols = foundation_columns(mfd)?;
    let mut v = FoundationVector::default();
    for (f, &c) in cols.iter().enumerate() {
        v.0[f] = tokens.iter().any(|t| mfd.matches(c, t.as_ref()));
    }
    Ok(v)
}

/// Mean flag per foundation over one valence class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValenceProfile {
    pub shares: [f64; 5],
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoundationPrevalence {
    pub ya: Option<ValenceProfile>,
    pub na: Option<ValenceProfile>,
}

/// Items with valence NONE are skipped; a class with no items is `None`.
pub fn foundation_prevalence(group: &[(FoundationVector, Valence)]) -> Result<FoundationPrevalence, LexiconError> {
    let profile = |want: Valence| {
        let mut sums = [0u64; 5];
        let mut n = 0usize;
        for (v, _) in group.iter().filter(|(_, val)| *val == want) {
            n += 1;
            for (s, &b) in sums.iter_mut().zip(&v.0) {
                *s += u64::from(b);
            }
        }
        (n > 0).then(|| ValenceProfile {
            shares: sums.map(|s| s as f64 / n as f64),
            n,
        })
    };
    let out = FoundationPrevalence {
        ya: profile(Valence::Ya),
        na: profile(Valence::Na),
    };
    if out.ya.is_none() && out.na.is_none() {
        return Err(LexiconError::NoValencedItems);
    }
    Ok(out)
}

/// Share of vectors with no foundation present.
pub fn coverage_missing_rate(vectors: &[FoundationVector]) -> Result<f64, LexiconError> {
    if vectors.is_empty() {
        return Err(LexiconError::Empty);
    }
    Ok(vectors.iter().filter(|v| v.is_zero()).count() as f64 / vectors.len() as f64)
}

/// [`coverage_missing_rate`] per group key.
pub fn coverage_by_group<G: Ord + Clone>(items: &[(G, FoundationVector)]) -> BTreeMap<G, (f64, usize)> {
    let mut acc: BTreeMap<G, (usize, usize)> = BTreeMap::new();
    for (g, v) in items {
        let e = acc.entry(g.clone()).or_insert((0, 0));
        e.0 += usize::from(v.is_zero());
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(g, (zero, n))| (g, (zero as f64 / n as f64, n)))
        .collect()
}

/// Pearson correlation; `None` when either side has zero variance or fewer
/// than two points.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>, LexiconError> {
    if x.len() != y.len() {
        return Err(LexiconError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Ok(None);
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0)))
}

/// Column indices of the `n` highest-variance columns of a row-major
/// documents x categories matrix; ties keep column order.
pub fn top_by_variance(rows: &[Vec<f64>], n: usize) -> Vec<usize> {
    let Some(width) = rows.first().map(Vec::len) else {
        return Vec::new();
    };
    let count = rows.len() as f64;
    let variance: Vec<f64> = (0..width)
        .map(|c| {
            let mean = rows.iter().map(|r| r[c]).sum::<f64>() / count;
            rows.iter().map(|r| (r[c] - mean) * (r[c] - mean)).sum::<f64>() / count
        })
        .collect();
    let mut idx: Vec<usize> = (0..width).collect();
    idx.sort_by(|&a, &b| variance[b].total_cmp(&variance[a]));
    idx.truncate(n);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn mfd() -> Lexicon {
        Lexicon::new(
            "mfd",
            MatchMode::PrefixWildcard,
            vec![
                ("care", vec!["harm*", "protect"]),
                ("fairness", vec!["fair*", "cheat"]),
                ("loyalty", vec!["loyal*", "betray*"]),
                ("authority", vec!["obey", "boss"]),
                ("sanctity", vec!["pure", "disgust*"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn construction_rules() {
        let lex = Lexicon::new("x", MatchMode::Exact, vec![("a", vec!["w", "w"]), ("b", vec!["w"])]).unwrap();
        assert_eq!(lex.words(0).len(), 1);
        assert_eq!(
            Lexicon::new("x", MatchMode::Exact, vec![("a", vec![]), ("b", vec!["w"])]),
            Err(LexiconError::EmptyCategory("a".into()))
        );
        assert_eq!(
            Lexicon::new("x", MatchMode::Exact, vec![("a", vec!["w"]), ("a", vec!["v"])]),
            Err(LexiconError::DuplicateCategory("a".into()))
        );
        assert!("prefix_wildcard".parse::<MatchMode>().is_ok());
        assert!("fuzzy".parse::<MatchMode>().is_err());
    }

    #[test]
    fn wildcard_only_in_prefix_mode() {
        assert!(mfd().matches(2, "loyalty"));
        let exact = Lexicon::new("x", MatchMode::Exact, vec![("l", vec!["loyal*"])]).unwrap();
        assert!(!exact.matches(0, "loyalty"));
        assert!(exact.matches(0, "loyal*"));
    }

    #[test]
    fn fractions() {
        let lex = Lexicon::new(
            "e",
            MatchMode::Exact,
            vec![("money", vec!["cash", "pay"]), ("work", vec!["pay", "boss"])],
        )
        .unwrap();
        let toks = ["cash", "pay", "a", "b", "c", "d", "e", "f", "g", "h"];
        let f = category_fractions(&toks, &lex);
        assert_eq!(f.values, vec![0.2, 0.1]);
        let empty: [&str; 0] = [];
        let f = category_fractions(&empty, &lex);
        assert!(f.empty_document && f.values == vec![0.0, 0.0]);
    }

    #[test]
    fn presence_and_prevalence() {
        let v = foundation_presence(&["my", "loyalty", "matters"], &mfd()).unwrap();
        assert_eq!(v.0, [false, false, true, false, false]);
        assert!(foundation_presence(&["firing", "him"], &mfd()).unwrap().is_zero());
        let four = Lexicon::new("m", MatchMode::Exact, vec![("care", vec!["a"])]).unwrap();
        assert!(matches!(foundation_presence(&["a"], &four), Err(LexiconError::NotFoundations(_))));

        let care = |b| FoundationVector([b, false, false, false, false]);
        let group = [
            (care(true), Valence::Ya),
            (care(true), Valence::Ya),
            (care(false), Valence::Ya),
            (care(true), Valence::Ya),
            (care(true), Valence::Neither),
        ];
        let p = foundation_prevalence(&group).unwrap();
        assert_eq!(p.ya.unwrap().shares[0], 0.75);
        assert!(p.na.is_none());
        assert_eq!(
            foundation_prevalence(&[(care(true), Valence::Neither)]),
            Err(LexiconError::NoValencedItems)
        );
    }

    #[test]
    fn coverage() {
        let z = FoundationVector::default();
        let nz = FoundationVector([true, false, false, false, false]);
        assert_eq!(coverage_missing_rate(&[z, nz, nz, nz]).unwrap(), 0.25);
        assert_eq!(coverage_missing_rate(&[nz]).unwrap(), 0.0);
        let by = coverage_by_group(&[("a", z), ("a", nz), ("b", nz)]);
        assert_eq!(by["a"], (0.5, 2));
        assert_eq!(by["b"], (0.0, 1));
    }

    #[test]
    fn pearson_values() {
        let y = [1.0, 0.0, 1.0, 0.0, 0.0];
        assert!((pearson(&y, &y).unwrap().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[0.0, 1.0, 0.0]).unwrap(), None);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let z = [2.0, 4.0, 5.0, 4.0, 5.0];
        // Closed form: r = 6 / sqrt(10 * 6)
        let r = pearson(&x, &z).unwrap().unwrap();
        assert!((r - 6.0 / libm::sqrt(60.0)).abs() < 1e-12);
    }

    #[test]
    fn variance_ranking() {
        let rows = vec![vec![0.0, 1.0, 5.0], vec![0.0, 3.0, 5.0], vec![0.0, 2.0, 5.0]];
        assert_eq!(top_by_variance(&rows, 2), vec![1, 0]);
    }
}
