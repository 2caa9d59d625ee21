//! Topic-validation survey banks, response checks and agreement rates.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::naming::{top_topics, NamedTopics, NamingError};
use crate::seed::{rng, rng_for, sub_seed};

/// The fixed fifth option; exclusive with every topic option.
pub const NONE_OF_THE_ABOVE: &str = "NONE_OF_THE_ABOVE";

/// Prompt shown above every validation question.
pub const PROMPT: &str = "What topics below best describe the theme of the following post? \
Do not let your ethical judgement of the author affect your choices here.";

pub const OPTIONS_PER_QUESTION: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurveyError {
    #[error(transparent)]
    Naming(#[from] NamingError),
    #[error("need at least {needed} named topics for this bank, have {have}")]
    TooFewTopics { needed: usize, have: usize },
    #[error("per_topic must be at least 1")]
    ZeroPerTopic,
    #[error("duplicate question id {0:?}")]
    DuplicateQuestion(String),
    #[error("response refers to unknown question {0:?}")]
    UnknownQuestion(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BankMode {
    /// The four most probable named topics.
    Top4,
    /// The two most probable plus two random distractors.
    Top2Rand2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    Top1,
    Top2,
    Top3,
    Top4,
    Random,
}

impl Provenance {
    fn rank(i: usize) -> Provenance {
        [Provenance::Top1, Provenance::Top2, Provenance::Top3, Provenance::Top4][i]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicOption {
    pub name: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationQuestion {
    pub question_id: String,
    pub post_id: String,
    pub title: String,
    pub body: String,
    /// Four distinct topic options in display order; [`NONE_OF_THE_ABOVE`]
    /// is implied as a fifth.
    pub options: Vec<TopicOption>,
    pub mode: BankMode,
}

impl ValidationQuestion {
    pub fn option(&self, provenance: Provenance) -> Option<&str> {
        self.options
            .iter()
            .find(|o| o.provenance == provenance)
            .map(|o| o.name.as_str())
    }

    pub fn has_option(&self, name: &str) -> bool {
        name == NONE_OF_THE_ABOVE || self.options.iter().any(|o| o.name == name)
    }

    /// Whether `name` is shown as this question's top-1 or top-2 topic.
    pub fn is_designated(&self, name: &str) -> bool {
        self.options
            .iter()
            .any(|o| o.name == name && matches!(o.provenance, Provenance::Top1 | Provenance::Top2))
    }
}

/// A post with its aggregated named-topic posterior ("other" last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPost {
    pub post_id: String,
    pub title: String,
    pub body: String,
    pub named_posterior: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bank {
    pub questions: Vec<ValidationQuestion>,
    /// Named topics that are no post's top-1 topic.
    pub skipped_topics: Vec<String>,
}

fn build_question(
    post: &ScoredPost,
    named: &NamedTopics,
    mode: BankMode,
    seed: u64,
) -> Result<ValidationQuestion, SurveyError> {
    let ranked = top_topics(&post.named_posterior, named, named.len())?.ranked;
    let mut options: Vec<TopicOption> = match mode {
        BankMode::Top4 => ranked
            .iter()
            .take(OPTIONS_PER_QUESTION)
            .enumerate()
            .map(|(i, &(t, _))| TopicOption {
                name: named.name(t).to_string(),
                provenance: Provenance::rank(i),
            })
            .collect(),
        BankMode::Top2Rand2 => {
            let mut opts: Vec<TopicOption> = ranked
                .iter()
                .take(2)
                .enumerate()
                .map(|(i, &(t, _))| TopicOption {
                    name: named.name(t).to_string(),
                    provenance: Provenance::rank(i),
                })
                .collect();
            let rest: Vec<usize> = ranked.iter().skip(2).map(|&(t, _)| t).collect();
            let mut r = rng_for(seed, &alloc::format!("distractors/{}", post.post_id));
            let mut picks: Vec<usize> = sample(&mut r, rest.len(), 2).into_vec();
            picks.sort_unstable();
            opts.extend(picks.into_iter().map(|i| TopicOption {
                name: named.name(rest[i]).to_string(),
                provenance: Provenance::Random,
            }));
            opts
        }
    };
    options.shuffle(&mut rng_for(seed, &post.post_id));
    Ok(ValidationQuestion {
        question_id: post.post_id.clone(),
        post_id: post.post_id.clone(),
        title: post.title.clone(),
        body: post.body.clone(),
        options,
        mode,
    })
}

/// Samples up to `per_topic` posts per named topic among the posts whose
/// top-1 topic it is, and builds one question each. Questions are grouped by
/// topic in name order, posts within a topic in input order.
pub fn validation_bank(
    posts: &[ScoredPost],
    named: &NamedTopics,
    mode: BankMode,
    per_topic: usize,
    seed: u64,
) -> Result<Bank, SurveyError> {
    if per_topic == 0 {
        return Err(SurveyError::ZeroPerTopic);
    }
    if named.len() < OPTIONS_PER_QUESTION {
        return Err(SurveyError::TooFewTopics {
            needed: OPTIONS_PER_QUESTION,
            have: named.len(),
        });
    }
    let mut by_topic: Vec<Vec<usize>> = (0..named.len()).map(|_| Vec::new()).collect();
    let mut seen = BTreeSet::new();
    for (i, p) in posts.iter().enumerate() {
        if !seen.insert(p.post_id.as_str()) {
            return Err(SurveyError::DuplicateQuestion(p.post_id.clone()));
        }
        let top = top_topics(&p.named_posterior, named, 1)?;
        if let Some(&(t, _)) = top.ranked.first() {
            by_topic[t].push(i);
        }
    }

    let mut questions = Vec::new();
    let mut skipped_topics = Vec::new();
    for (t, members) in by_topic.iter().enumerate() {
        if members.is_empty() {
            skipped_topics.push(named.name(t).to_string());
            continue;
        }
        let take = per_topic.min(members.len());
        let mut picks: Vec<usize> = sample(&mut rng(sub_seed(seed, t as u64)), members.len(), take)
            .into_iter()
            .map(|i| members[i])
            .collect();
        picks.sort_unstable();
        for i in picks {
            questions.push(build_question(&posts[i], named, mode, seed)?);
        }
    }
    Ok(Bank {
        questions,
        skipped_topics,
    })
}

/// Gate question answered before the substantive ones. Passing means
/// selecting exactly the top-1 and top-2 topics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Screening {
    pub question: ValidationQuestion,
    pub correct: BTreeSet<String>,
}

impl Screening {
    pub fn new(post: &ScoredPost, named: &NamedTopics, seed: u64) -> Result<Screening, SurveyError> {
        if named.len() < OPTIONS_PER_QUESTION {
            return Err(SurveyError::TooFewTopics {
                needed: OPTIONS_PER_QUESTION,
                have: named.len(),
            });
        }
        let question = build_question(post, named, BankMode::Top4, seed)?;
        let correct = [Provenance::Top1, Provenance::Top2]
            .into_iter()
            .filter_map(|p| question.option(p).map(String::from))
            .collect();
        Ok(Screening { question, correct })
    }

    pub fn passes(&self, selected: &BTreeSet<String>) -> bool {
        *selected == self.correct
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub question_id: String,
    pub participant_id: String,
    pub selected: BTreeSet<String>,
    /// Unix seconds.
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResponseError {
    #[error("no option selected")]
    NothingSelected,
    #[error("NONE_OF_THE_ABOVE cannot be combined with topic options")]
    NoneNotExclusive,
    #[error("{0:?} is not an option of this question")]
    UnknownOption(String),
    #[error("question {0:?} is not in the bank")]
    UnknownQuestion(String),
    #[error("participant {participant:?} already answered question {question:?}")]
    DuplicateParticipant { participant: String, question: String },
    #[error("question {0:?} already has its full number of answers")]
    QuestionFull(String),
}

/// Checks a selection against one question's options.
pub fn validate_selection(selected: &BTreeSet<String>, question: &ValidationQuestion) -> Result<(), ResponseError> {
    if selected.is_empty() {
        return Err(ResponseError::NothingSelected);
    }
    if selected.len() > 1 && selected.contains(NONE_OF_THE_ABOVE) {
        return Err(ResponseError::NoneNotExclusive);
    }
    if let Some(bad) = selected.iter().find(|s| !question.has_option(s)) {
        return Err(ResponseError::UnknownOption(bad.clone()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collection {
    pub accepted: Vec<SurveyResponse>,
    pub rejected: Vec<(SurveyResponse, ResponseError)>,
    pub answer_counts: BTreeMap<String, usize>,
    /// Questions whose accepted-answer count differs from the target.
    pub incomplete: Vec<String>,
}

/// Validates responses in order. Later duplicates from the same participant
/// on the same question are rejected; so are answers beyond `per_question`.
pub fn collect_responses(
    responses: impl IntoIterator<Item = SurveyResponse>,
    questions: &[ValidationQuestion],
    per_question: usize,
) -> Collection {
    let index: BTreeMap<&str, &ValidationQuestion> =
        questions.iter().map(|q| (q.question_id.as_str(), q)).collect();
    let mut answered: BTreeSet<(String, String)> = BTreeSet::new();
    let mut answer_counts: BTreeMap<String, usize> =
        questions.iter().map(|q| (q.question_id.clone(), 0)).collect();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for r in responses {
        let verdict = match index.get(r.question_id.as_str()) {
            None => Err(ResponseError::UnknownQuestion(r.question_id.clone())),
            Some(q) => validate_selection(&r.selected, q).and_then(|()| {
                if answered.contains(&(r.question_id.clone(), r.participant_id.clone())) {
                    Err(ResponseError::DuplicateParticipant {
                        participant: r.participant_id.clone(),
                        question: r.question_id.clone(),
                    })
                } else if answer_counts[&r.question_id] >= per_question {
                    Err(ResponseError::QuestionFull(r.question_id.clone()))
                } else {
                    Ok(())
                }
            }),
        };
        match verdict {
            Ok(()) => {
                answered.insert((r.question_id.clone(), r.participant_id.clone()));
                *answer_counts.get_mut(&r.question_id).expect("known question") += 1;
                accepted.push(r);
            }
            Err(e) => rejected.push((r, e)),
        }
    }
    let incomplete = answer_counts
        .iter()
        .filter(|&(_, &n)| n != per_question)
        .map(|(q, _)| q.clone())
        .collect();
    Collection {
        accepted,
        rejected,
        answer_counts,
        incomplete,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnswerType {
    Top1Only,
    Top2Only,
    Top3Only,
    Top4Only,
    RandomOnly,
    Top1Or2,
    Top1Or2Or3,
    NoneOfTheAbove,
}

impl AnswerType {
    pub fn label(self) -> &'static str {
        match self {
            AnswerType::Top1Only => "Top-1 only",
            AnswerType::Top2Only => "Top-2 only",
            AnswerType::Top3Only => "Top-3 only",
            AnswerType::Top4Only => "Top-4 only",
            AnswerType::RandomOnly => "Random only",
            AnswerType::Top1Or2 => "Top-1 or 2",
            AnswerType::Top1Or2Or3 => "Top-1 or 2 or 3",
            AnswerType::NoneOfTheAbove => "None of the above",
        }
    }

    fn designated(self) -> &'static [Provenance] {
        match self {
            AnswerType::Top1Only => &[Provenance::Top1],
            AnswerType::Top2Only => &[Provenance::Top2],
            AnswerType::Top3Only => &[Provenance::Top3],
            AnswerType::Top4Only => &[Provenance::Top4],
            AnswerType::RandomOnly => &[Provenance::Random],
            AnswerType::Top1Or2 => &[Provenance::Top1, Provenance::Top2],
            AnswerType::Top1Or2Or3 => &[Provenance::Top1, Provenance::Top2, Provenance::Top3],
            AnswerType::NoneOfTheAbove => &[],
        }
    }
}

impl fmt::Display for AnswerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub answer_type: AnswerType,
    /// Percentage of all responses.
    pub percent: f64,
    pub matching: usize,
}

fn matches_type(r: &SurveyResponse, q: &ValidationQuestion, t: AnswerType) -> bool {
    if t == AnswerType::NoneOfTheAbove {
        return r.selected.contains(NONE_OF_THE_ABOVE);
    }
    q.options
        .iter()
        .any(|o| t.designated().contains(&o.provenance) && r.selected.contains(&o.name))
}

/// Share of responses that pick at least one option of each answer type.
/// Top-3/Top-4 rows appear only when every question is a TOP4 question, the
/// random-distractor row only when every question is TOP2_RAND2.
pub fn post_level_agreement(
    responses: &[SurveyResponse],
    questions: &[ValidationQuestion],
) -> Result<Vec<AgreementRow>, SurveyError> {
    let index: BTreeMap<&str, &ValidationQuestion> =
        questions.iter().map(|q| (q.question_id.as_str(), q)).collect();
    let mut pairs = Vec::with_capacity(responses.len());
    for r in responses {
        let q = index
            .get(r.question_id.as_str())
            .ok_or_else(|| SurveyError::UnknownQuestion(r.question_id.clone()))?;
        pairs.push((r, *q));
    }
    let modes: BTreeSet<BankMode> = pairs.iter().map(|(_, q)| q.mode).collect();
    let all_top4 = modes.iter().all(|&m| m == BankMode::Top4);
    let all_rand = !modes.is_empty() && modes.iter().all(|&m| m == BankMode::Top2Rand2);

    let mut types = alloc::vec![AnswerType::Top1Only, AnswerType::Top2Only];
    if all_top4 {
        types.extend([AnswerType::Top3Only, AnswerType::Top4Only]);
    }
    if all_rand {
        types.push(AnswerType::RandomOnly);
    }
    types.push(AnswerType::Top1Or2);
    if all_top4 {
        types.push(AnswerType::Top1Or2Or3);
    }
    types.push(AnswerType::NoneOfTheAbove);

    let n = pairs.len();
    Ok(types
        .into_iter()
        .map(|t| {
            let matching = pairs.iter().filter(|(r, q)| matches_type(r, q, t)).count();
            AgreementRow {
                answer_type: t,
                percent: if n == 0 { 0.0 } else { 100.0 * matching as f64 / n as f64 },
                matching,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopicRate {
    pub selected: usize,
    pub presented: usize,
    /// `selected / presented`; `None` when never presented as top-1 or top-2.
    pub rate: Option<f64>,
}

/// Per topic: how often it is picked among responses to questions showing it
/// as top-1 or top-2. Every name in `topics` gets a row.
pub fn topic_agreement(
    responses: &[SurveyResponse],
    questions: &[ValidationQuestion],
    topics: &[String],
) -> Result<BTreeMap<String, TopicRate>, SurveyError> {
    let index: BTreeMap<&str, &ValidationQuestion> =
        questions.iter().map(|q| (q.question_id.as_str(), q)).collect();
    let mut acc: BTreeMap<String, (usize, usize)> = topics.iter().map(|t| (t.clone(), (0, 0))).collect();
    for r in responses {
        let q = index
            .get(r.question_id.as_str())
            .ok_or_else(|| SurveyError::UnknownQuestion(r.question_id.clone()))?;
        for o in q.options.iter().filter(|o| q.is_designated(&o.name)) {
            let e = acc.entry(o.name.clone()).or_insert((0, 0));
            e.1 += 1;
            e.0 += usize::from(r.selected.contains(&o.name));
        }
    }
    Ok(acc
        .into_iter()
        .map(|(t, (selected, presented))| {
            let rate = (presented > 0).then(|| selected as f64 / presented as f64);
            (t, TopicRate { selected, presented, rate })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthDistribution {
    /// Topics chosen per answer -> number of answers.
    pub histogram: BTreeMap<usize, usize>,
    pub mean: Option<f64>,
}

/// Number of topic options chosen per response; NONE_OF_THE_ABOVE counts as 0.
pub fn answer_length_distribution(responses: &[SurveyResponse]) -> LengthDistribution {
    let mut histogram = BTreeMap::new();
    let mut total = 0usize;
    for r in responses {
        let len = r.selected.iter().filter(|s| s.as_str() != NONE_OF_THE_ABOVE).count();
        *histogram.entry(len).or_insert(0) += 1;
        total += len;
    }
    let mean = (!responses.is_empty()).then(|| total as f64 / responses.len() as f64);
    LengthDistribution { histogram, mean }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::naming::{merge_topics, resolve_names, Decision, DecisionRecord, MetaCategory};
    use alloc::vec;

    fn topics(n: usize) -> NamedTopics {
        let records: Vec<DecisionRecord> = (0..n)
            .map(|c| DecisionRecord {
                cluster_id: c,
                name: if c == n - 1 { "other".into() } else { alloc::format!("t{c}") },
                decision: if c == n - 1 { Decision::Other } else { Decision::Wording },
            })
            .collect();
        let map = resolve_names(&BTreeMap::new(), &records, n).unwrap();
        let meta = (0..n - 1).map(|c| (alloc::format!("t{c}"), MetaCategory::Things)).collect();
        merge_topics(&map, &meta).unwrap().topics
    }

    fn post(id: &str, posterior: Vec<f64>) -> ScoredPost {
        ScoredPost {
            post_id: id.into(),
            title: "t".into(),
            body: "b".into(),
            named_posterior: posterior,
        }
    }

    fn sel(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn other_is_replaced_by_fifth() {
        let named = topics(6); // t0..t4 + other
        let p = post("p", vec![0.3, 0.2, 0.1, 0.05, 0.04, 0.31]);
        let q = build_question(&p, &named, BankMode::Top4, 1).unwrap();
        let names: BTreeSet<&str> = q.options.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names, ["t0", "t1", "t2", "t3"].into_iter().collect());
        assert_eq!(q.option(Provenance::Top1), Some("t0"));
        assert_eq!(q.option(Provenance::Top4), Some("t3"));

        let p = post("p", vec![0.3, 0.2, 0.1, 0.05, 0.31, 0.04]);
        let q = build_question(&p, &named, BankMode::Top4, 1).unwrap();
        assert_eq!(q.option(Provenance::Top1), Some("t4"));
        assert_eq!(q.option(Provenance::Top4), Some("t2"));
    }

    #[test]
    fn bank_sizes_and_skips() {
        let named = topics(6);
        let mut posts = Vec::new();
        for i in 0..30 {
            let mut v = [0.01; 6];
            v[i % 3] = 0.9;
            let s: f64 = v.iter().sum();
            posts.push(post(&alloc::format!("p{i}"), v.iter().map(|x| x / s).collect()));
        }
        let bank = validation_bank(&posts, &named, BankMode::Top4, 4, 9).unwrap();
        assert_eq!(bank.questions.len(), 12);
        assert_eq!(bank.skipped_topics, vec!["t3".to_string(), "t4".to_string()]);
        let again = validation_bank(&posts, &named, BankMode::Top4, 4, 9).unwrap();
        assert_eq!(bank.questions, again.questions);
        let all = validation_bank(&posts, &named, BankMode::Top4, 50, 9).unwrap();
        assert_eq!(all.questions.len(), 30);
    }

    #[test]
    fn selection_rules() {
        let named = topics(6);
        let q = build_question(&post("p", vec![0.3, 0.2, 0.1, 0.05, 0.04, 0.31]), &named, BankMode::Top4, 1).unwrap();
        assert_eq!(validate_selection(&sel(&["t0", "t1"]), &q), Ok(()));
        assert_eq!(validate_selection(&sel(&[NONE_OF_THE_ABOVE]), &q), Ok(()));
        assert_eq!(validate_selection(&sel(&[]), &q), Err(ResponseError::NothingSelected));
        assert_eq!(
            validate_selection(&sel(&[NONE_OF_THE_ABOVE, "t0"]), &q),
            Err(ResponseError::NoneNotExclusive)
        );
        assert_eq!(
            validate_selection(&sel(&["t4"]), &q),
            Err(ResponseError::UnknownOption("t4".into()))
        );
    }

    #[test]
    fn collection_rejects_duplicates() {
        let named = topics(6);
        let q = build_question(&post("q", vec![0.3, 0.2, 0.1, 0.05, 0.04, 0.31]), &named, BankMode::Top4, 1).unwrap();
        let r = |p: &str| SurveyResponse {
            question_id: "q".into(),
            participant_id: p.into(),
            selected: sel(&["t0"]),
            timestamp: 0,
        };
        let c = collect_responses(vec![r("a"), r("b"), r("a"), r("c")], core::slice::from_ref(&q), 3);
        assert_eq!(c.accepted.len(), 3);
        assert!(matches!(c.rejected[0].1, ResponseError::DuplicateParticipant { .. }));
        assert!(c.incomplete.is_empty());
        let c = collect_responses(vec![r("a")], &[q], 3);
        assert_eq!(c.incomplete, vec!["q".to_string()]);
    }

    #[test]
    fn lengths() {
        let r = |s: &[&str]| SurveyResponse {
            question_id: "q".into(),
            participant_id: "p".into(),
            selected: sel(s),
            timestamp: 0,
        };
        let d = answer_length_distribution(&[r(&["a"]), r(&["a", "b"]), r(&["a", "c"]), r(&["a", "b", "c"])]);
        assert_eq!(d.mean, Some(2.0));
        let d = answer_length_distribution(&[r(&[NONE_OF_THE_ABOVE])]);
        assert_eq!(d.mean, Some(0.0));
        assert_eq!(answer_length_distribution(&[]).mean, None);
    }
}
