//! `naming-bank` and `merge`, plus the per-document named assignments that
//! later stages share.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use moraltopics_core::naming::{
    aggregate_posterior, mean_top_gap, naming_bank as build_naming_bank, top_two, NamedTopics, NamingError,
    PostText,
};
use moraltopics_core::Valence;
use serde::Serialize;

use super::{f, Ctx, TEST, TRAIN};
use crate::formats::{format_json, Table};
use crate::records::ThreadRecord;
use crate::service::BankFile;

pub const NAMING_BANK: &str = "banks/naming.json";

/// One document's aggregated named-topic posterior ("other" last).
#[derive(Debug, Clone)]
pub struct Assigned {
    pub post_id: String,
    pub valence: Valence,
    pub posterior: Vec<f64>,
    /// Top-1 and top-2 named topics; `None` when fewer than two have mass.
    pub top: Option<(usize, usize)>,
}

impl Assigned {
    pub fn top1(&self) -> Option<usize> {
        self.top.map(|t| t.0)
    }
}

/// Named topics and the assignments of one split.
pub struct Scored {
    pub named: NamedTopics,
    pub docs: Vec<Assigned>,
    /// Thread records of the split by post id.
    pub records: BTreeMap<String, ThreadRecord>,
}

impl Ctx {
    /// Aggregated posteriors of the `train` or `test` split. Train documents
    /// use the model's stored posteriors, test documents their fold-in ones.
    pub fn scored(&self, split: &str) -> Result<Scored> {
        let model = self.model()?;
        let named = self.named_topics(model.num_topics())?;
        let (file, rows): (&str, Vec<(String, Vec<f64>)>) = match split {
            "train" => (
                TRAIN,
                (0..model.num_docs())
                    .map(|d| (model.doc_ids()[d].clone(), model.theta(d).to_vec()))
                    .collect(),
            ),
            "test" => (TEST, self.theta_test()?),
            other => bail!("unknown split {other:?}"),
        };
        let records: BTreeMap<String, ThreadRecord> = self
            .records(file, "split")?
            .into_iter()
            .map(|r| (r.post_id.clone(), r))
            .collect();
        let mut docs = Vec::with_capacity(rows.len());
        for (post_id, theta) in rows {
            let Some(rec) = records.get(&post_id) else {
                bail!("document {post_id:?} is not in the {split} split; rerun `prep` and `train`");
            };
            let posterior = aggregate_posterior(&theta, &named)?;
            let top = match top_two(&posterior, &named) {
                Ok(t) => Some(t),
                Err(NamingError::TooFewTopics) => None,
                Err(e) => return Err(e.into()),
            };
            docs.push(Assigned {
                post_id,
                valence: rec.valence,
                posterior,
                top,
            });
        }
        Ok(Scored { named, docs, records })
    }
}

pub fn naming_bank(ctx: &Ctx) -> Result<String> {
    let model = ctx.model()?;
    let vocab = ctx.vocabulary_for(&model)?;
    let posts: Vec<PostText> = ctx
        .records(TRAIN, "split")?
        .into_iter()
        .map(|r| PostText {
            post_id: r.post_id,
            title: r.title,
            body: r.body,
        })
        .collect();
    let questions = build_naming_bank(
        &model,
        &vocab,
        &posts,
        ctx.cfg.naming.random_source,
        ctx.seed("naming-bank"),
    )?;
    let flagged: Vec<usize> = questions.iter().filter(|q| q.flagged).map(|q| q.cluster_id).collect();
    let bank = BankFile::Naming {
        bank_id: "naming".into(),
        questions,
    };
    ctx.write(NAMING_BANK, &format_json(&bank))?;
    let mut msg = format!("{} naming questions", bank.question_ids().len());
    if !flagged.is_empty() {
        msg.push_str(&format!("; clusters with fewer than six posts: {flagged:?}"));
    }
    Ok(msg)
}

#[derive(Serialize)]
struct MergeSummary {
    clusters: usize,
    named_topics: usize,
    other_clusters: Vec<usize>,
    /// Mean top-1 minus top-2 probability over training documents.
    mean_top_gap: Option<f64>,
    /// Documents with fewer than two named topics of positive mass.
    unpaired_train: usize,
    unpaired_test: usize,
}

fn assignment_table(scored: &Scored) -> Table {
    let named = &scored.named;
    let mut t = Table::new(["post_id", "valence", "top1", "top2", "p_top1", "p_top2", "p_other"]);
    for d in &scored.docs {
        let other = d.posterior[named.other_index()];
        let cells = match d.top {
            Some((a, b)) => vec![
                Some(d.post_id.clone()),
                Some(d.valence.as_str().to_string()),
                Some(named.name(a).to_string()),
                Some(named.name(b).to_string()),
                Some(f(d.posterior[a])),
                Some(f(d.posterior[b])),
                Some(f(other)),
            ],
            None => vec![
                Some(d.post_id.clone()),
                Some(d.valence.as_str().to_string()),
                None,
                None,
                None,
                None,
                Some(f(other)),
            ],
        };
        t.push_cells(cells);
    }
    t
}

pub fn merge(ctx: &Ctx) -> Result<String> {
    let train = ctx.scored("train")?;
    let test = ctx.scored("test")?;
    let named = &train.named;

    let mut top1 = vec![0usize; named.len()];
    for d in &train.docs {
        if let Some(t) = d.top1() {
            top1[t] += 1;
        }
    }
    let n = train.docs.len() as f64;
    let mut topics = Table::new(["topic", "meta_category", "clusters", "train_posts", "train_share"]);
    for (t, &count) in top1.iter().enumerate() {
        let members: Vec<String> = named.members(t).iter().map(usize::to_string).collect();
        topics.push([
            named.name(t).to_string(),
            named.meta(t).as_str().to_string(),
            members.join(" "),
            count.to_string(),
            f(count as f64 / n),
        ]);
    }
    ctx.write("topics.csv", &topics.to_csv())?;
    ctx.write("assign_train.csv", &assignment_table(&train).to_csv())?;
    ctx.write("assign_test.csv", &assignment_table(&test).to_csv())?;

    let summary = MergeSummary {
        clusters: named.num_clusters(),
        named_topics: named.len(),
        other_clusters: named.other_clusters().to_vec(),
        mean_top_gap: mean_top_gap(train.docs.iter().map(|d| d.posterior.as_slice()), named),
        unpaired_train: train.docs.iter().filter(|d| d.top.is_none()).count(),
        unpaired_test: test.docs.iter().filter(|d| d.top.is_none()).count(),
    };
    ctx.write("merge_summary.json", &format_json(&summary))?;
    Ok(format!(
        "{} clusters merged into {} named topics plus {} ({} clusters)",
        summary.clusters,
        summary.named_topics,
        moraltopics_core::naming::OTHER,
        summary.other_clusters.len()
    ))
}
