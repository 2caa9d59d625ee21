//! Naming-survey banks, human name maps, merged topics and topic pairs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::lda::{argmax, top_words, LdaError, TopicModel};
use crate::seed::{rng, sub_seed};
use crate::textprep::Vocabulary;

/// Placeholder name for clusters the annotators could not name.
pub const OTHER: &str = "other";

pub const KEYWORDS_PER_QUESTION: usize = 10;
pub const TOP_EXAMPLES: usize = 3;
pub const RANDOM_EXAMPLES: usize = 3;
pub const PREVIEW_WORDS: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NamingError {
    #[error(transparent)]
    Model(#[from] LdaError),
    #[error("model has {model} documents but {posts} post texts were supplied")]
    PostCountMismatch { model: usize, posts: usize },
    #[error("no post text for model document {0:?}")]
    MissingPost(String),
    #[error("cluster {0} has no decision record")]
    MissingCluster(usize),
    #[error("cluster {0} has more than one decision record")]
    DuplicateCluster(usize),
    #[error("cluster {cluster} is outside the model's {num_clusters} clusters")]
    UnknownCluster { cluster: usize, num_clusters: usize },
    #[error("cluster {0} has an empty name")]
    EmptyName(usize),
    #[error("cluster {0} is decided OTHER but not named \"other\"")]
    OtherMisnamed(usize),
    #[error("cluster {0} is named \"other\" without an OTHER decision")]
    OtherWithoutDecision(usize),
    #[error("cluster {cluster} has {found} survey answers, expected 3")]
    AnswerCount { cluster: usize, found: usize },
    #[error("cluster {0} is recorded as unanimous but its answers differ from the final name")]
    NotUnanimous(usize),
    #[error("named topic {0:?} has no meta-category")]
    MissingMeta(String),
    #[error("posterior has {found} entries, expected {expected}")]
    PosteriorLength { expected: usize, found: usize },
    #[error("fewer than two named topics with positive mass")]
    TooFewTopics,
}

/// Post fields shown to annotators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostText {
    pub post_id: String,
    pub title: String,
    pub body: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Selection {
    Top,
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamplePost {
    pub post_id: String,
    pub title: String,
    pub body_preview: String,
    pub selection: Selection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamingQuestion {
    pub cluster_id: usize,
    pub keywords: Vec<String>,
    pub example_posts: Vec<ExamplePost>,
    /// Set when the cluster had fewer than six assigned posts.
    pub flagged: bool,
}

/// Where the three non-top example posts come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomSource {
    /// Uniformly among the cluster's remaining assigned posts.
    #[default]
    Uniform,
    /// Uniformly among the lowest-posterior tenth (at least three) of them.
    LowPosterior,
}

/// First [`PREVIEW_WORDS`] whitespace-delimited words, with `" [...]"`
/// appended when anything was cut.
pub fn body_preview(body: &str) -> String {
    let mut words = body.split_whitespace();
    let head: Vec<&str> = words.by_ref().take(PREVIEW_WORDS).collect();
    let mut out = head.join(" ");
    if words.next().is_some() {
        out.push_str(" [...]");
    }
    out
}

/// One naming question per cluster. `posts` must cover every model document.
pub fn naming_bank(
    model: &TopicModel,
    vocab: &Vocabulary,
    posts: &[PostText],
    random_source: RandomSource,
    seed: u64,
) -> Result<Vec<NamingQuestion>, NamingError> {
    let by_id: BTreeMap<&str, &PostText> = posts.iter().map(|p| (p.post_id.as_str(), p)).collect();
    let texts: Vec<&PostText> = model
        .doc_ids()
        .iter()
        .map(|id| by_id.get(id.as_str()).copied().ok_or_else(|| NamingError::MissingPost(id.clone())))
        .collect::<Result<_, _>>()?;

    let k_topics = model.num_topics();
    let mut assigned: Vec<Vec<usize>> = (0..k_topics).map(|_| Vec::new()).collect();
    for d in 0..model.num_docs() {
        assigned[argmax(model.theta(d))].push(d);
    }

    let mut bank = Vec::with_capacity(k_topics);
    for (k, docs) in assigned.into_iter().enumerate() {
        let keywords = top_words(model, vocab, k, KEYWORDS_PER_QUESTION.min(vocab.len()))?
            .into_iter()
            .map(String::from)
            .collect();

        let mut ranked = docs;
        ranked.sort_by(|&a, &b| model.theta(b)[k].total_cmp(&model.theta(a)[k]));
        let flagged = ranked.len() < TOP_EXAMPLES + RANDOM_EXAMPLES;
        let split = TOP_EXAMPLES.min(ranked.len());
        let (top, rest) = ranked.split_at(split);

        let pool: &[usize] = match random_source {
            RandomSource::Uniform => rest,
            RandomSource::LowPosterior => {
                let n = (rest.len() / 10).max(RANDOM_EXAMPLES).min(rest.len());
                &rest[rest.len() - n..]
            }
        };
        let take = RANDOM_EXAMPLES.min(pool.len());
        let mut picked: Vec<usize> = sample(&mut rng(sub_seed(seed, k as u64)), pool.len(), take)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        picked.sort_unstable();

        let example = |d: usize, selection| ExamplePost {
            post_id: texts[d].post_id.clone(),
            title: texts[d].title.clone(),
            body_preview: body_preview(&texts[d].body),
            selection,
        };
        let mut example_posts: Vec<ExamplePost> = top.iter().map(|&d| example(d, Selection::Top)).collect();
        example_posts.extend(picked.into_iter().map(|d| example(d, Selection::Random)));

        bank.push(NamingQuestion {
            cluster_id: k,
            keywords,
            example_posts,
            flagged,
        });
    }
    Ok(bank)
}

/// How annotators arrived at a cluster's name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Unanimous,
    Wording,
    Deliberation,
    Other,
}

impl Decision {
    pub const ALL: [Decision; 4] = [
        Decision::Unanimous,
        Decision::Wording,
        Decision::Deliberation,
        Decision::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Unanimous => "UNANIMOUS",
            Decision::Wording => "WORDING",
            Decision::Deliberation => "DELIBERATION",
            Decision::Other => "OTHER",
        }
    }

    pub fn from_name(s: &str) -> Option<Decision> {
        Decision::ALL.into_iter().find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One adjudicated line of the decisions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub cluster_id: usize,
    pub name: String,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameMap {
    names: Vec<String>,
    decisions: Vec<Decision>,
}

impl NameMap {
    pub fn num_clusters(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, cluster: usize) -> &str {
        &self.names[cluster]
    }

    pub fn decision(&self, cluster: usize) -> Decision {
        self.decisions[cluster]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, Decision)> {
        self.names
            .iter()
            .zip(&self.decisions)
            .enumerate()
            .map(|(c, (n, &d))| (c, n.as_str(), d))
    }

    pub fn decision_counts(&self) -> BTreeMap<Decision, usize> {
        let mut counts = BTreeMap::new();
        for &d in &self.decisions {
            *counts.entry(d).or_insert(0) += 1;
        }
        counts
    }
}

fn normalized(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Builds a name map from adjudication records. When survey `answers` are
/// supplied for a cluster they are checked for consistency with the record;
/// the records themselves are never second-guessed beyond that.
pub fn resolve_names(
    answers: &BTreeMap<usize, Vec<String>>,
    records: &[DecisionRecord],
    num_clusters: usize,
) -> Result<NameMap, NamingError> {
    let mut slots: Vec<Option<(String, Decision)>> = (0..num_clusters).map(|_| None).collect();
    for r in records {
        let slot = slots.get_mut(r.cluster_id).ok_or(NamingError::UnknownCluster {
            cluster: r.cluster_id,
            num_clusters,
        })?;
        if slot.is_some() {
            return Err(NamingError::DuplicateCluster(r.cluster_id));
        }
        let name = normalized(&r.name);
        if name.is_empty() {
            return Err(NamingError::EmptyName(r.cluster_id));
        }
        match (r.decision == Decision::Other, name == OTHER) {
            (true, false) => return Err(NamingError::OtherMisnamed(r.cluster_id)),
            (false, true) => return Err(NamingError::OtherWithoutDecision(r.cluster_id)),
            _ => {}
        }
        if let Some(given) = answers.get(&r.cluster_id) {
            if given.len() != 3 {
                return Err(NamingError::AnswerCount {
                    cluster: r.cluster_id,
                    found: given.len(),
                });
            }
            if r.decision == Decision::Unanimous && given.iter().any(|a| normalized(a) != name) {
                return Err(NamingError::NotUnanimous(r.cluster_id));
            }
        }
        *slot = Some((name, r.decision));
    }
    let mut names = Vec::with_capacity(num_clusters);
    let mut decisions = Vec::with_capacity(num_clusters);
    for (c, slot) in slots.into_iter().enumerate() {
        let (n, d) = slot.ok_or(NamingError::MissingCluster(c))?;
        names.push(n);
        decisions.push(d);
    }
    Ok(NameMap { names, decisions })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetaCategory {
    Identities,
    Things,
    Processes,
    Events,
    Aspects,
}

impl MetaCategory {
    pub const ALL: [MetaCategory; 5] = [
        MetaCategory::Identities,
        MetaCategory::Things,
        MetaCategory::Processes,
        MetaCategory::Events,
        MetaCategory::Aspects,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetaCategory::Identities => "identities",
            MetaCategory::Things => "things",
            MetaCategory::Processes => "processes",
            MetaCategory::Events => "events",
            MetaCategory::Aspects => "aspects",
        }
    }

    pub fn from_name(s: &str) -> Option<MetaCategory> {
        MetaCategory::ALL.into_iter().find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for MetaCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Clusters merged by name. Topics are indexed in name order; posterior
/// vectors over named topics carry one extra trailing entry for "other".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedTopics {
    names: Vec<String>,
    meta: Vec<MetaCategory>,
    members: Vec<Vec<usize>>,
    other_clusters: Vec<usize>,
    cluster_topic: Vec<Option<usize>>,
}

/// Result of [`merge_topics`]: the merged topics plus meta-file entries that
/// matched no topic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Merge {
    pub topics: NamedTopics,
    pub unused_meta: Vec<String>,
}

pub fn merge_topics(
    name_map: &NameMap,
    meta: &BTreeMap<String, MetaCategory>,
) -> Result<Merge, NamingError> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut other_clusters = Vec::new();
    for (c, name, decision) in name_map.iter() {
        if decision == Decision::Other {
            other_clusters.push(c);
        } else {
            groups.entry(name).or_default().push(c);
        }
    }
    let mut names = Vec::with_capacity(groups.len());
    let mut metas = Vec::with_capacity(groups.len());
    let mut members = Vec::with_capacity(groups.len());
    let mut cluster_topic = alloc::vec![None; name_map.num_clusters()];
    for (t, (name, clusters)) in groups.into_iter().enumerate() {
        let m = meta
            .iter()
            .find(|(k, _)| normalized(k) == name)
            .map(|(_, &m)| m)
            .ok_or_else(|| NamingError::MissingMeta(name.to_string()))?;
        for &c in &clusters {
            cluster_topic[c] = Some(t);
        }
        names.push(name.to_string());
        metas.push(m);
        members.push(clusters);
    }
    let known: BTreeSet<&str> = names.iter().map(String::as_str).collect();
    let unused_meta = meta
        .keys()
        .filter(|k| !known.contains(normalized(k).as_str()))
        .cloned()
        .collect();
    Ok(Merge {
        topics: NamedTopics {
            names,
            meta: metas,
            members,
            other_clusters,
            cluster_topic,
        },
        unused_meta,
    })
}

impl NamedTopics {
    /// Named topics, excluding "other".
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_topic.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, topic: usize) -> &str {
        &self.names[topic]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn meta(&self, topic: usize) -> MetaCategory {
        self.meta[topic]
    }

    pub fn members(&self, topic: usize) -> &[usize] {
        &self.members[topic]
    }

    pub fn other_clusters(&self) -> &[usize] {
        &self.other_clusters
    }

    /// `None` for clusters merged into "other".
    pub fn topic_of_cluster(&self, cluster: usize) -> Option<usize> {
        self.cluster_topic[cluster]
    }

    /// Position of the "other" entry in aggregated posteriors.
    pub fn other_index(&self) -> usize {
        self.names.len()
    }
}

/// Sums cluster posteriors per name; the last entry is the "other" mass,
/// not renormalized away.
pub fn aggregate_posterior(theta_d: &[f64], named: &NamedTopics) -> Result<Vec<f64>, NamingError> {
    if theta_d.len() != named.num_clusters() {
        return Err(NamingError::PosteriorLength {
            expected: named.num_clusters(),
            found: theta_d.len(),
        });
    }
    let mut out = alloc::vec![0.0; named.len() + 1];
    for (c, &p) in theta_d.iter().enumerate() {
        out[named.topic_of_cluster(c).unwrap_or(named.other_index())] += p;
    }
    Ok(out)
}

/// Highest-probability named topics, "other" excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct TopTopics {
    /// `(topic index, probability)`, descending; ties in name order.
    pub ranked: Vec<(usize, f64)>,
    /// Top-1 minus top-2 probability, when both exist.
    pub gap: Option<f64>,
}

pub fn top_topics(named_theta: &[f64], named: &NamedTopics, n: usize) -> Result<TopTopics, NamingError> {
    if named_theta.len() != named.len() + 1 {
        return Err(NamingError::PosteriorLength {
            expected: named.len() + 1,
            found: named_theta.len(),
        });
    }
    let mut ranked: Vec<(usize, f64)> = named_theta[..named.len()].iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let gap = match ranked.as_slice() {
        [first, second, ..] => Some(first.1 - second.1),
        _ => None,
    };
    ranked.truncate(n);
    Ok(TopTopics { ranked, gap })
}

/// Unordered pair of distinct named topics, stored in name order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TopicPair {
    a: String,
    b: String,
}

impl TopicPair {
    /// `None` when the names coincide or either is "other".
    pub fn new(x: impl Into<String>, y: impl Into<String>) -> Option<TopicPair> {
        let (x, y) = (x.into(), y.into());
        if x == y || x == OTHER || y == OTHER {
            return None;
        }
        Some(if x < y { TopicPair { a: x, b: y } } else { TopicPair { a: y, b: x } })
    }

    pub fn first(&self) -> &str {
        &self.a
    }

    pub fn second(&self) -> &str {
        &self.b
    }

    pub fn contains(&self, name: &str) -> bool {
        self.a == name || self.b == name
    }
}

impl fmt::Display for TopicPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} & {}", self.a, self.b)
    }
}

/// Top-1 and top-2 named topic indices of a document.
pub fn top_two(named_theta: &[f64], named: &NamedTopics) -> Result<(usize, usize), NamingError> {
    let top = top_topics(named_theta, named, 2)?;
    match top.ranked.as_slice() {
        [(t1, p1), (t2, p2)] if *p1 > 0.0 && *p2 > 0.0 => Ok((*t1, *t2)),
        _ => Err(NamingError::TooFewTopics),
    }
}

pub fn topic_pair(named_theta: &[f64], named: &NamedTopics) -> Result<TopicPair, NamingError> {
    let (t1, t2) = top_two(named_theta, named)?;
    TopicPair::new(named.name(t1), named.name(t2)).ok_or(NamingError::TooFewTopics)
}

/// Documents per named topic under top-1 assignment ("other" excluded from
/// the ranking, so every document lands on some named topic).
pub fn topic_post_counts(model: &TopicModel, named: &NamedTopics) -> Result<Vec<usize>, NamingError> {
    let mut counts = alloc::vec![0usize; named.len()];
    for d in 0..model.num_docs() {
        let agg = aggregate_posterior(model.theta(d), named)?;
        let top = top_topics(&agg, named, 1)?;
        if let Some(&(t, _)) = top.ranked.first() {
            counts[t] += 1;
        }
    }
    Ok(counts)
}

/// Mean top-1 minus top-2 gap over documents that have both.
pub fn mean_top_gap<'a>(posteriors: impl IntoIterator<Item = &'a [f64]>, named: &NamedTopics) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for p in posteriors {
        if let Ok(TopTopics { gap: Some(g), .. }) = top_topics(p, named, 2) {
            sum += g;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Human-readable label used in exports for a decision mix, e.g. `17/41/9/3`.
pub fn decision_summary(map: &NameMap) -> String {
    let counts = map.decision_counts();
    let parts: Vec<String> = Decision::ALL
        .iter()
        .map(|d| format!("{}", counts.get(d).copied().unwrap_or(0)))
        .collect();
    parts.join("/")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(c: usize, name: &str, d: Decision) -> DecisionRecord {
        DecisionRecord {
            cluster_id: c,
            name: name.to_string(),
            decision: d,
        }
    }

    fn small_map() -> NameMap {
        let records = [
            rec(0, "family", Decision::Wording),
            rec(1, "money", Decision::Unanimous),
            rec(2, "family", Decision::Deliberation),
            rec(3, "other", Decision::Other),
        ];
        resolve_names(&BTreeMap::new(), &records, 4).unwrap()
    }

    fn small_meta() -> BTreeMap<String, MetaCategory> {
        [
            ("family".to_string(), MetaCategory::Identities),
            ("money".to_string(), MetaCategory::Things),
            ("weather".to_string(), MetaCategory::Things),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn preview_truncates_at_100_words() {
        let long: Vec<String> = (0..120).map(|i| format!("w{i}")).collect();
        let p = body_preview(&long.join(" "));
        assert!(p.ends_with("w99 [...]"));
        assert_eq!(p.split_whitespace().count(), 101);
        assert_eq!(body_preview("short  body\n here"), "short body here");
    }

    #[test]
    fn resolve_examples() {
        let answers: BTreeMap<usize, Vec<String>> = [
            (0, vec!["shopping".into(), "shopping".into(), "Shopping".into()]),
            (1, vec!["race".into(), "racism".into(), "race".into()]),
            (2, vec!["a".into(), "b".into(), "c".into()]),
        ]
        .into_iter()
        .collect();
        let records = [
            rec(0, "shopping", Decision::Unanimous),
            rec(1, "race", Decision::Wording),
            rec(2, "other", Decision::Other),
        ];
        let map = resolve_names(&answers, &records, 3).unwrap();
        assert_eq!(map.name(0), "shopping");
        assert_eq!(map.name(1), "race");
        assert_eq!(map.name(2), OTHER);
        assert_eq!(decision_summary(&map), "1/1/0/1");
    }

    #[test]
    fn resolve_errors() {
        let none = BTreeMap::new();
        assert_eq!(
            resolve_names(&none, &[rec(0, "a", Decision::Wording)], 2),
            Err(NamingError::MissingCluster(1))
        );
        assert_eq!(
            resolve_names(&none, &[rec(0, "a", Decision::Other)], 1),
            Err(NamingError::OtherMisnamed(0))
        );
        assert_eq!(
            resolve_names(&none, &[rec(0, "other", Decision::Wording)], 1),
            Err(NamingError::OtherWithoutDecision(0))
        );
        assert_eq!(
            resolve_names(&none, &[rec(0, " ", Decision::Wording)], 1),
            Err(NamingError::EmptyName(0))
        );
        assert_eq!(
            resolve_names(&none, &[rec(0, "a", Decision::Wording), rec(0, "a", Decision::Wording)], 1),
            Err(NamingError::DuplicateCluster(0))
        );
        let split: BTreeMap<usize, Vec<String>> =
            [(0, vec!["a".into(), "b".into(), "a".into()])].into_iter().collect();
        assert_eq!(
            resolve_names(&split, &[rec(0, "a", Decision::Unanimous)], 1),
            Err(NamingError::NotUnanimous(0))
        );
    }

    #[test]
    fn merge_and_aggregate() {
        let merge = merge_topics(&small_map(), &small_meta()).unwrap();
        let named = &merge.topics;
        assert_eq!(named.names(), &["family".to_string(), "money".to_string()][..]);
        assert_eq!(named.members(0), &[0, 2]);
        assert_eq!(named.other_clusters(), &[3]);
        assert_eq!(named.meta(1), MetaCategory::Things);
        assert_eq!(merge.unused_meta, vec!["weather".to_string()]);

        let agg = aggregate_posterior(&[0.2, 0.1, 0.3, 0.4], named).unwrap();
        assert_eq!(agg, vec![0.5, 0.1, 0.4]);
        let top = top_topics(&agg, named, 2).unwrap();
        assert_eq!(top.ranked, vec![(0, 0.5), (1, 0.1)]);
        assert!((top.gap.unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(topic_pair(&agg, named).unwrap(), TopicPair::new("money", "family").unwrap());
    }

    #[test]
    fn missing_meta_is_fatal() {
        let meta: BTreeMap<String, MetaCategory> =
            [("family".to_string(), MetaCategory::Identities)].into_iter().collect();
        assert_eq!(
            merge_topics(&small_map(), &meta),
            Err(NamingError::MissingMeta("money".to_string()))
        );
    }

    #[test]
    fn other_never_ranks() {
        let named = merge_topics(&small_map(), &small_meta()).unwrap().topics;
        let agg = [0.4, 0.35, 0.25];
        let top = top_topics(&agg, &named, 2).unwrap();
        assert_eq!(top.ranked.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0, 1]);
        let mostly_other = [0.05, 0.05, 0.9];
        assert_eq!(top_topics(&mostly_other, &named, 1).unwrap().ranked[0].0, 0);
        assert_eq!(topic_pair(&[0.0, 0.1, 0.9], &named), Err(NamingError::TooFewTopics));
    }

    #[test]
    fn pair_is_canonical() {
        let p = TopicPair::new("money", "family").unwrap();
        assert_eq!(p, TopicPair::new("family", "money").unwrap());
        assert_eq!((p.first(), p.second()), ("family", "money"));
        assert!(TopicPair::new("a", "a").is_none());
        assert!(TopicPair::new("a", OTHER).is_none());
    }
}
