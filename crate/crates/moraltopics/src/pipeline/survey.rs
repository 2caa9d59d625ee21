//! `survey-bank` and `agreement`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use moraltopics_core::survey::{
    answer_length_distribution, collect_responses, post_level_agreement, topic_agreement, validation_bank, BankMode,
    Screening, ScoredPost,
};
use serde::Serialize;

use super::topics::Scored;
use super::{f, opt, Ctx};
use crate::formats::{self, format_json, Table};
use crate::service::{parse_responses, BankFile};

/// Bank id, mode, and whether it samples the test split.
const BANKS: [(&str, BankMode, bool); 3] = [
    ("train", BankMode::Top4, false),
    ("test", BankMode::Top4, true),
    ("test_rand", BankMode::Top2Rand2, true),
];

fn scored_posts(scored: &Scored) -> Vec<ScoredPost> {
    scored
        .docs
        .iter()
        .map(|d| {
            let r = &scored.records[&d.post_id];
            ScoredPost {
                post_id: d.post_id.clone(),
                title: r.title.clone(),
                body: r.body.clone(),
                named_posterior: d.posterior.clone(),
            }
        })
        .collect()
}

/// The configured screening post, or else the training post with the
/// largest top-1 probability that no bank uses.
fn screening_post<'a>(ctx: &Ctx, train: &'a Scored, posts: &'a [ScoredPost], used: &BTreeSet<String>) -> Result<&'a ScoredPost> {
    if let Some(id) = &ctx.cfg.survey.screening_post {
        if used.contains(id) {
            bail!("[survey].screening_post {id:?} is also a bank question");
        }
        return posts
            .iter()
            .find(|p| &p.post_id == id)
            .with_context(|| format!("[survey].screening_post {id:?} is not a training post"));
    }
    train
        .docs
        .iter()
        .zip(posts)
        .filter(|(d, p)| d.top.is_some() && !used.contains(&p.post_id))
        .max_by(|(a, _), (b, _)| {
            let pa = a.posterior[a.top.expect("filtered").0];
            let pb = b.posterior[b.top.expect("filtered").0];
            // Reversed id order so ties pick the smaller id.
            pa.total_cmp(&pb).then_with(|| b.post_id.cmp(&a.post_id))
        })
        .map(|(_, p)| p)
        .context("no training post is usable as the screening question")
}

pub fn survey_bank(ctx: &Ctx) -> Result<String> {
    let train = ctx.scored("train")?;
    let test = ctx.scored("test")?;
    let named = &train.named;
    let train_posts = scored_posts(&train);
    let test_posts = scored_posts(&test);
    let survey = &ctx.cfg.survey;

    let mut built = Vec::new();
    for (id, mode, on_test) in BANKS {
        let (posts, per_topic, seed) = if on_test {
            // Both test banks draw the same posts; only the options differ.
            (&test_posts, survey.per_topic_test, ctx.seed("survey-bank/test"))
        } else {
            (&train_posts, survey.per_topic_train, ctx.seed("survey-bank/train"))
        };
        let bank = validation_bank(posts, named, mode, per_topic, seed)?;
        built.push((id, bank));
    }
    let used: BTreeSet<String> = built
        .iter()
        .flat_map(|(_, b)| b.questions.iter().map(|q| q.post_id.clone()))
        .collect();
    let post = screening_post(ctx, &train, &train_posts, &used)?;
    let mut screening = Screening::new(post, named, ctx.seed("survey-bank/screening"))?;
    screening.question.question_id = format!("screening-{}", post.post_id);

    let mut parts = Vec::new();
    for (id, bank) in built {
        if !bank.skipped_topics.is_empty() {
            eprintln!("warning: bank {id}: no posts for topics {:?}", bank.skipped_topics);
        }
        parts.push(format!("{id} {}", bank.questions.len()));
        let file = BankFile::Validation {
            bank_id: id.to_string(),
            screening: Some(screening.clone()),
            questions: bank.questions,
        };
        crate::service::bank::check_bank(&file)?;
        ctx.write(&format!("banks/{id}.json"), &format_json(&file))?;
    }
    Ok(format!(
        "questions per bank: {}; screening post {}",
        parts.join(", "),
        post.post_id
    ))
}

#[derive(Serialize)]
struct BankAgreement {
    bank_id: String,
    responses: usize,
    rejected: usize,
    /// Questions whose accepted answers differ from the configured count.
    incomplete_questions: usize,
    mean_topics_chosen: Option<f64>,
}

impl Ctx {
    fn bank_file(&self, id: &str) -> Result<BankFile> {
        let name = format!("{id}.json");
        let candidates: [PathBuf; 2] = [self.out(&format!("banks/{name}")), self.cfg.service.bank_dir.join(&name)];
        let Some(path) = candidates.iter().find(|p| p.exists()) else {
            bail!("no bank {id:?} in {} or {}; produce it with `survey-bank` first", candidates[0].display(), candidates[1].display());
        };
        Ok(formats::read_json(path)?)
    }
}

pub fn agreement(ctx: &Ctx) -> Result<String> {
    let survey = &ctx.cfg.survey;
    if survey.responses.is_empty() {
        bail!("[survey].responses lists no response exports");
    }
    let per_question = ctx.cfg.service.answers_per_question;
    let mut summary = Vec::new();
    for (id, path) in &survey.responses {
        let bank = ctx.bank_file(id)?;
        let BankFile::Validation { questions, .. } = &bank else {
            bail!("bank {id:?} is a naming bank; agreement applies to validation banks");
        };
        let text = formats::read_text(path)?;
        let (responses, bad) = parse_responses(&text);
        for (line, msg) in &bad {
            eprintln!("{}:{line}: {msg}", path.display());
        }
        let collection = collect_responses(responses, questions, per_question);
        for (r, e) in collection.rejected.iter().take(5) {
            eprintln!("rejected answer by {:?} to {:?}: {e}", r.participant_id, r.question_id);
        }
        let accepted = &collection.accepted;

        let mut t = Table::new(["answer_type", "percent", "matching", "responses"]);
        for row in post_level_agreement(accepted, questions)? {
            t.push([row.answer_type.label().to_string(), f(row.percent), row.matching.to_string(), accepted.len().to_string()]);
        }
        ctx.write(&format!("agreement_{id}.csv"), &t.to_csv())?;

        let topics: Vec<String> = questions
            .iter()
            .flat_map(|q| q.options.iter().map(|o| o.name.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut t = Table::new(["topic", "selected", "presented", "rate"]);
        for (topic, rate) in topic_agreement(accepted, questions, &topics)? {
            t.push_cells(vec![
                Some(topic),
                Some(rate.selected.to_string()),
                Some(rate.presented.to_string()),
                opt(rate.rate),
            ]);
        }
        ctx.write(&format!("topic_agreement_{id}.csv"), &t.to_csv())?;

        let lengths = answer_length_distribution(accepted);
        let mut t = Table::new(["topics_chosen", "answers"]);
        for (k, n) in &lengths.histogram {
            t.push([k.to_string(), n.to_string()]);
        }
        ctx.write(&format!("answer_lengths_{id}.csv"), &t.to_csv())?;

        summary.push(BankAgreement {
            bank_id: id.clone(),
            responses: accepted.len(),
            rejected: collection.rejected.len() + bad.len(),
            incomplete_questions: collection.incomplete.len(),
            mean_topics_chosen: lengths.mean,
        });
    }
    ctx.write("agreement_summary.json", &format_json(&summary))?;
    let by_bank: BTreeMap<&str, usize> = summary.iter().map(|s| (s.bank_id.as_str(), s.responses)).collect();
    Ok(format!("accepted responses per bank: {by_bank:?}"))
}
