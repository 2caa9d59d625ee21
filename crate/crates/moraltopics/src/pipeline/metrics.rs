//! `pairs`, `pmi`, `coherence` and `ami`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use moraltopics_core::lda::{argmax, top_word_indices, top_words};
use moraltopics_core::metrics::{
    ami as ami_score, pair_size_ccdf, pair_size_summary, pmi_matrix, prevalence, umass_coherence, CoherenceCounts,
    PairStats,
};
use moraltopics_core::naming::{top_topics, NamedTopics, OTHER};
use moraltopics_core::Valence;
use serde::Serialize;

use super::topics::{Assigned, Scored};
use super::{f, opt, Ctx, BOWS_TRAIN};
use crate::config::CoherenceScope;
use crate::formats::{self, format_json, Table};

/// Train, test and both combined, in that order.
pub(crate) struct AllSplits {
    pub named: NamedTopics,
    pub splits: Vec<(&'static str, Vec<Assigned>)>,
}

impl Ctx {
    pub(crate) fn all_splits(&self) -> Result<AllSplits> {
        let Scored { named, docs: train, .. } = self.scored("train")?;
        let test = self.scored("test")?.docs;
        let all: Vec<Assigned> = train.iter().chain(&test).cloned().collect();
        Ok(AllSplits {
            named,
            splits: vec![("train", train), ("test", test), ("all", all)],
        })
    }
}

pub(crate) fn top_pairs(docs: &[Assigned]) -> Vec<(usize, usize)> {
    docs.iter().filter_map(|d| d.top).collect()
}

pub(crate) fn pair_stats(named: &NamedTopics, docs: &[Assigned]) -> Result<PairStats> {
    Ok(PairStats::from_assignments(named.names().to_vec(), &top_pairs(docs))?)
}

/// Topic indices ordered by meta-category, then name.
pub(crate) fn meta_order(named: &NamedTopics) -> Vec<usize> {
    let mut order: Vec<usize> = (0..named.len()).collect();
    order.sort_by_key(|&t| (named.meta(t), named.name(t).to_string()));
    order
}

fn ya_share(docs: &[&Assigned]) -> f64 {
    let ya = docs.iter().filter(|d| d.valence == Valence::Ya).count();
    ya as f64 / docs.len() as f64
}

pub(crate) fn treemap_table(named: &NamedTopics, docs: &[Assigned]) -> Table {
    let mut blocks: BTreeMap<(usize, usize), Vec<&Assigned>> = BTreeMap::new();
    for d in docs {
        if let Some(t) = d.top {
            blocks.entry(t).or_default().push(d);
        }
    }
    let mut outer: BTreeMap<usize, Vec<&Assigned>> = BTreeMap::new();
    for (&(t1, _), ds) in &blocks {
        outer.entry(t1).or_default().extend(ds.iter().copied());
    }
    let mut t = Table::new(["top1", "top2", "posts", "ya_share"]);
    for (&t1, ds) in &outer {
        t.push_cells(vec![
            Some(named.name(t1).to_string()),
            None,
            Some(ds.len().to_string()),
            Some(f(ya_share(ds))),
        ]);
        for (&(_, t2), inner) in blocks.range((t1, 0)..=(t1, usize::MAX)) {
            t.push([
                named.name(t1).to_string(),
                named.name(t2).to_string(),
                inner.len().to_string(),
                f(ya_share(inner)),
            ]);
        }
    }
    t
}

pub(crate) fn prevalence_table(named: &NamedTopics, docs: &[Assigned]) -> Result<Table> {
    let prev = prevalence(&top_pairs(docs), named.len())?;
    let mut t = Table::new(["topic", "meta_category", "top1_pct", "top1_or_2_pct"]);
    for (i, p) in prev.iter().enumerate() {
        t.push([
            named.name(i).to_string(),
            named.meta(i).as_str().to_string(),
            f(p.top1_pct),
            f(p.top12_pct),
        ]);
    }
    Ok(t)
}

pub(crate) fn ccdf_table(stats: &PairStats) -> Table {
    let mut t = Table::new(["size", "ccdf"]);
    for (size, frac) in pair_size_ccdf(stats) {
        t.push([size.to_string(), f(frac)]);
    }
    t
}

pub(crate) fn pmi_table(named: &NamedTopics, stats: &PairStats) -> Result<Table> {
    let m = pmi_matrix(stats)?;
    let order = meta_order(named);
    let mut header = vec!["topic".to_string()];
    header.extend(order.iter().map(|&t| named.name(t).to_string()));
    let mut table = Table::new(header);
    for &i in &order {
        let mut cells = vec![Some(named.name(i).to_string())];
        cells.extend(order.iter().map(|&j| opt(m.get(i, j))));
        table.push_cells(cells);
    }
    Ok(table)
}

#[derive(Serialize)]
struct PairSummaryRow {
    split: &'static str,
    documents: usize,
    paired_documents: u64,
    pairs: usize,
    empty_share: f64,
    at_least_50_share: f64,
    at_least_100_share: f64,
}

pub fn pairs(ctx: &Ctx) -> Result<String> {
    let AllSplits { named, splits } = ctx.all_splits()?;
    let stats: Vec<PairStats> = splits
        .iter()
        .map(|(_, docs)| pair_stats(&named, docs))
        .collect::<Result<_>>()?;

    let mut header = vec!["topic_a".to_string(), "topic_b".to_string()];
    header.extend(splits.iter().map(|(s, _)| s.to_string()));
    let mut counts = Table::new(header);
    for ((i, j), _) in stats[0].all_pairs() {
        let mut row = vec![named.name(i).to_string(), named.name(j).to_string()];
        row.extend(stats.iter().map(|s| s.count(i, j).to_string()));
        counts.push(row);
    }
    ctx.write("pair_counts.csv", &counts.to_csv())?;

    let mut summary = Vec::new();
    for ((split, docs), st) in splits.iter().zip(&stats) {
        ctx.write(&format!("prevalence_{split}.csv"), &prevalence_table(&named, docs)?.to_csv())?;
        ctx.write(&format!("pair_ccdf_{split}.csv"), &ccdf_table(st).to_csv())?;
        let s = pair_size_summary(st);
        summary.push(PairSummaryRow {
            split,
            documents: docs.len(),
            paired_documents: st.total(),
            pairs: s.pairs,
            empty_share: s.empty,
            at_least_50_share: s.at_least_50,
            at_least_100_share: s.at_least_100,
        });
    }
    let all = &splits[2].1;
    ctx.write("treemap.csv", &treemap_table(&named, all).to_csv())?;
    ctx.write("pairs_summary.json", &format_json(&summary))?;
    let s = &summary[2];
    Ok(format!(
        "{} topic pairs over {} documents: {:.1}% empty, {:.1}% with at least 50 posts, {:.1}% with at least 100",
        s.pairs,
        s.paired_documents,
        100.0 * s.empty_share,
        100.0 * s.at_least_50_share,
        100.0 * s.at_least_100_share
    ))
}

pub fn pmi(ctx: &Ctx) -> Result<String> {
    let AllSplits { named, splits } = ctx.all_splits()?;
    let stats = pair_stats(&named, &splits[2].1)?;
    let table = pmi_table(&named, &stats)?;
    ctx.write("pmi.csv", &table.to_csv())?;
    let defined = stats.nonzero_pairs().count();
    Ok(format!("PMI over {} topics; {defined} pairs defined", named.len()))
}

pub fn coherence(ctx: &Ctx) -> Result<String> {
    let model = ctx.model()?;
    let vocab = ctx.vocabulary_for(&model)?;
    let bows = ctx.bows(BOWS_TRAIN)?;
    let by_id: BTreeMap<&str, usize> = bows.iter().enumerate().map(|(i, b)| (b.doc_id.as_str(), i)).collect();
    let n_words = ctx.cfg.lda.top_words.min(vocab.len());
    let scope = ctx.cfg.lda.coherence_scope;

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); model.num_topics()];
    for d in 0..model.num_docs() {
        let id = &model.doc_ids()[d];
        let &b = by_id
            .get(id.as_str())
            .with_context(|| format!("model document {id:?} has no bow; rerun `train` after `prep`"))?;
        members[argmax(model.theta(d))].push(b);
    }

    let mut table = Table::new(["cluster", "size", "coherence", "top_words"]);
    let mut scores = Vec::new();
    for (k, docs) in members.iter().enumerate() {
        let top: Vec<u32> = top_word_indices(&model, k, n_words)?.into_iter().map(|i| i as u32).collect();
        let terms: BTreeSet<u32> = top.iter().copied().collect();
        let counts = match scope {
            CoherenceScope::Cluster => {
                CoherenceCounts::from_documents(docs.iter().map(|&b| bows[b].counts.iter().map(|&(i, _)| i)), &terms)
            }
            CoherenceScope::Corpus => {
                CoherenceCounts::from_documents(bows.iter().map(|b| b.counts.iter().map(|&(i, _)| i)), &terms)
            }
        };
        // A top word absent from every counted document leaves the score
        // undefined; the cell is left blank.
        let score = umass_coherence(&top, &counts).ok();
        if let Some(s) = score {
            scores.push(s);
        }
        table.push_cells(vec![
            Some(k.to_string()),
            Some(docs.len().to_string()),
            opt(score),
            Some(top_words(&model, &vocab, k, n_words)?.join(" ")),
        ]);
    }
    ctx.write("coherence.csv", &table.to_csv())?;
    let mean = scores.iter().sum::<f64>() / scores.len().max(1) as f64;
    Ok(format!(
        "coherence of {} clusters ({} defined), mean {mean:.3}",
        model.num_topics(),
        scores.len()
    ))
}

/// Hard clusterings of the training documents compared pairwise. Built in:
/// the LDA top-1 cluster and, when a name map is configured, the top-1
/// named topic ("other" included). `extra` adds `post_id,label` CSV files.
pub fn ami(ctx: &Ctx, extra: &[(String, PathBuf)]) -> Result<String> {
    let model = ctx.model()?;
    let ids = model.doc_ids();
    let mut clusterings: Vec<(String, Vec<String>)> = Vec::new();
    clusterings.push((
        "lda".into(),
        (0..model.num_docs()).map(|d| argmax(model.theta(d)).to_string()).collect(),
    ));
    if ctx.cfg.naming.name_map.is_some() {
        let named = ctx.named_topics(model.num_topics())?;
        let labels = (0..model.num_docs())
            .map(|d| {
                let agg = moraltopics_core::naming::aggregate_posterior(model.theta(d), &named)?;
                let other = agg[named.other_index()];
                let top = top_topics(&agg, &named, 1)?;
                Ok(match top.ranked.first() {
                    Some(&(t, p)) if p >= other => named.name(t).to_string(),
                    _ => OTHER.to_string(),
                })
            })
            .collect::<Result<Vec<String>>>()?;
        clusterings.push(("named".into(), labels));
    }
    for (name, path) in extra {
        let (_, rows) = formats::read_csv(path)?;
        let map: BTreeMap<&str, &str> = rows
            .iter()
            .filter(|r| r.len() >= 2)
            .map(|r| (r[0].as_str(), r[1].as_str()))
            .collect();
        let labels = ids
            .iter()
            .map(|id| {
                map.get(id.as_str())
                    .map(|s| s.to_string())
                    .with_context(|| format!("{} has no label for document {id:?}", path.display()))
            })
            .collect::<Result<Vec<String>>>()?;
        if clusterings.iter().any(|(n, _)| n == name) {
            bail!("clustering name {name:?} is used twice");
        }
        clusterings.push((name.clone(), labels));
    }

    let mut header = vec!["clustering".to_string()];
    header.extend(clusterings.iter().map(|(n, _)| n.clone()));
    let mut table = Table::new(header);
    for (a, la) in &clusterings {
        let mut row = vec![a.clone()];
        for (_, lb) in &clusterings {
            row.push(f(ami_score(la, lb)?));
        }
        table.push(row);
    }
    ctx.write("ami.csv", &table.to_csv())?;
    Ok(format!("AMI between {} clusterings of {} documents", clusterings.len(), ids.len()))
}
