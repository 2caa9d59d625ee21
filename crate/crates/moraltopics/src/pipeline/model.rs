//! `prep`, `train` and `sweep`.

use std::collections::BTreeSet;

use anyhow::{bail, Context, Result};
use moraltopics_core::lda::{
    cluster_sizes, infer, k_sweep, split_train_validation, top_words, train_lda, TopicModel,
};
use moraltopics_core::seed::sub_seed;
use moraltopics_core::textprep::{build_vocabulary, vectorize, DocBow, Vocabulary};
use serde::Serialize;

use super::{f, Ctx, BOWS_TEST, BOWS_TRAIN, MODEL, TEST, THETA_TEST, TRAIN, VOCAB};
use crate::formats::{self, format_json, format_jsonl, format_model, format_vocabulary, Table};

#[derive(Serialize)]
struct PrepSummary {
    vocabulary_size: usize,
    min_df: u32,
    train_docs: usize,
    test_docs: usize,
    /// Documents left with no in-vocabulary token; excluded from the bows.
    empty_train: Vec<String>,
    empty_test: Vec<String>,
}

pub fn prep(ctx: &Ctx) -> Result<String> {
    let train = ctx.records(TRAIN, "split")?;
    let test = ctx.records(TEST, "split")?;
    let lemmas = ctx.lemma_table()?;
    let stopwords = match &ctx.cfg.textprep.stopwords {
        Some(p) => formats::read_stopwords(p)?,
        None => BTreeSet::new(),
    };

    let train_tokens: Vec<Vec<String>> = train.iter().map(|r| ctx.tokens(&r.body, Some(&lemmas))).collect();
    let vocab = build_vocabulary(&train_tokens, &stopwords, ctx.cfg.textprep.min_df)
        .context("building the vocabulary from the training split")?;

    let (bows_train, empty_train) = partition_empty(
        train.iter().zip(&train_tokens).map(|(r, t)| vectorize(r.post_id.clone(), t, &vocab)),
    );
    let (bows_test, empty_test) = partition_empty(
        test.iter()
            .map(|r| vectorize(r.post_id.clone(), &ctx.tokens(&r.body, Some(&lemmas)), &vocab)),
    );

    ctx.write(VOCAB, &format_vocabulary(&vocab))?;
    ctx.write(BOWS_TRAIN, &format_jsonl(&bows_train))?;
    ctx.write(BOWS_TEST, &format_jsonl(&bows_test))?;
    let summary = PrepSummary {
        vocabulary_size: vocab.len(),
        min_df: ctx.cfg.textprep.min_df,
        train_docs: bows_train.len(),
        test_docs: bows_test.len(),
        empty_train,
        empty_test,
    };
    ctx.write("prep_summary.json", &format_json(&summary))?;
    Ok(format!(
        "vocabulary of {} terms; {} train and {} test documents ({} and {} empty)",
        vocab.len(),
        summary.train_docs,
        summary.test_docs,
        summary.empty_train.len(),
        summary.empty_test.len()
    ))
}

fn partition_empty(bows: impl Iterator<Item = DocBow>) -> (Vec<DocBow>, Vec<String>) {
    let mut kept = Vec::new();
    let mut empty = Vec::new();
    for b in bows {
        if b.is_empty() {
            empty.push(b.doc_id);
        } else {
            kept.push(b);
        }
    }
    (kept, empty)
}

impl Ctx {
    pub fn vocabulary(&self) -> Result<Vocabulary> {
        Ok(formats::read_vocabulary(&self.input(VOCAB, "prep")?)?)
    }

    pub fn bows(&self, name: &str) -> Result<Vec<DocBow>> {
        Ok(formats::read_jsonl(&self.input(name, "prep")?)?)
    }

    /// The vocabulary the model was trained on.
    pub fn vocabulary_for(&self, model: &TopicModel) -> Result<Vocabulary> {
        let vocab = self.vocabulary()?;
        if vocab.fingerprint() != model.vocab_fingerprint() {
            bail!(
                "{} does not match the vocabulary of {}; rerun `train` after `prep`",
                self.out(VOCAB).display(),
                self.out(MODEL).display()
            );
        }
        Ok(vocab)
    }

    /// Fold-in posteriors of the test documents, in bow order.
    pub fn theta_test(&self) -> Result<Vec<(String, Vec<f64>)>> {
        let path = self.input(THETA_TEST, "train")?;
        let (_, rows) = formats::read_csv(&path)?;
        rows.into_iter()
            .enumerate()
            .map(|(i, row)| {
                let (id, vals) = row.split_first().context("empty row")?;
                let vals = vals
                    .iter()
                    .map(|v| v.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .with_context(|| format!("{}: row {}", path.display(), i + 2))?;
                Ok((id.clone(), vals))
            })
            .collect()
    }
}

pub fn train(ctx: &Ctx) -> Result<String> {
    let vocab = ctx.vocabulary()?;
    let bows = ctx.bows(BOWS_TRAIN)?;
    let lda = &ctx.cfg.lda;
    let model = train_lda(&bows, vocab.len(), &lda.lda_config(ctx.seed("train")))?
        .with_vocab_fingerprint(vocab.fingerprint());
    ctx.write(MODEL, &format_model(&model))?;

    let sizes = cluster_sizes(&model);
    let n = model.num_docs() as f64;
    let mut clusters = Table::new(["cluster", "size", "share", "top_words"]);
    for (k, &size) in sizes.iter().enumerate() {
        let words = top_words(&model, &vocab, k, lda.top_words.min(vocab.len()))?;
        clusters.push([k.to_string(), size.to_string(), f(size as f64 / n), words.join(" ")]);
    }
    ctx.write("clusters.csv", &clusters.to_csv())?;

    let test = ctx.bows(BOWS_TEST)?;
    let seed = ctx.seed("infer");
    let mut header = vec!["doc_id".to_string()];
    header.extend((0..model.num_topics()).map(|k| format!("c{k}")));
    let mut theta = Table::new(header);
    for (i, bow) in test.iter().enumerate() {
        let row = infer(&model, bow, lda.infer_sweeps, sub_seed(seed, i as u64))?;
        let mut cells = vec![bow.doc_id.clone()];
        // Shortest round-trip form so later stages read the exact values.
        cells.extend(row.iter().map(|p| format!("{p}")));
        theta.push(cells);
    }
    ctx.write(THETA_TEST, &theta.to_csv())?;

    let largest = sizes.iter().copied().max().unwrap_or(0);
    Ok(format!(
        "K={} over {} documents; largest cluster holds {:.1}% of them; {} test documents folded in",
        model.num_topics(),
        model.num_docs(),
        100.0 * largest as f64 / n,
        test.len()
    ))
}

pub fn sweep(ctx: &Ctx) -> Result<String> {
    let vocab = ctx.vocabulary()?;
    let bows = ctx.bows(BOWS_TRAIN)?;
    let lda = &ctx.cfg.lda;
    let (fit, validation) = split_train_validation(bows, lda.train_fraction, ctx.seed("sweep/split"));
    if fit.is_empty() || validation.is_empty() {
        bail!("[lda].train_fraction {} leaves one side of the sweep split empty", lda.train_fraction);
    }
    let result = k_sweep(
        &fit,
        &validation,
        vocab.len(),
        &lda.sweep_ks,
        &lda.lda_config(ctx.seed("sweep")),
        lda.infer_sweeps,
    )?;
    let mut table = Table::new(["K", "perplexity"]);
    for (k, p) in &result.rows {
        table.push([k.to_string(), f(*p)]);
    }
    ctx.write("sweep.csv", &table.to_csv())?;
    Ok(format!("minimum held-out perplexity at K={}", result.best_k))
}
