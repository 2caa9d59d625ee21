//! `report`: plot-ready tables gathered under `<out>/report/`.
//!
//! Files (all CSV unless noted):
//!
//! - `corpus_by_year`: posts and comments in the archive, verdicted posts
//!   and their mean comment count, per calendar year.
//! - `corpus_by_year_judgment`: verdicted posts per year and judgment with
//!   the judgment's share of the year.
//! - `corpus_by_judgment`: posts, share, mean comments and mean body words
//!   per judgment.
//! - `treemap`, `prevalence`, `pair_ccdf`, `pmi`: topic structure over all
//!   documents (needs `train` and a name map).
//! - `radar`, `correlation`: copied from the output directory when the
//!   lexicon stages have run.
//! - `report.json`: manifest of the files above with row counts.

use std::collections::BTreeMap;

use anyhow::Result;
use moraltopics_core::Judgment;
use serde::Serialize;

use super::corpus::{year_of, IngestSummary};
use super::metrics::{ccdf_table, pair_stats, pmi_table, prevalence_table, treemap_table, AllSplits};
use super::{f, Ctx, INGEST_SUMMARY, MODEL, VERDICTED};
use crate::formats::{self, format_json, Table};
use crate::records::ThreadRecord;

#[derive(Serialize)]
struct Entry {
    file: String,
    rows: usize,
}

#[derive(Serialize)]
struct Manifest {
    seed: u64,
    verdicted_posts: usize,
    files: Vec<Entry>,
    /// Tables skipped because their inputs are missing, with the reason.
    skipped: BTreeMap<String, String>,
}

struct Bundle<'a> {
    ctx: &'a Ctx,
    files: Vec<Entry>,
}

impl Bundle<'_> {
    fn put(&mut self, name: &str, body: &str) -> Result<()> {
        self.ctx.write(&format!("report/{name}"), body)?;
        self.files.push(Entry {
            file: name.to_string(),
            rows: body.lines().count().saturating_sub(1),
        });
        Ok(())
    }
}

fn mean(sum: f64, n: usize) -> Option<String> {
    (n > 0).then(|| f(sum / n as f64))
}

fn corpus_tables(records: &[ThreadRecord], ingest: &IngestSummary) -> (Table, Table, Table) {
    // year -> (posts, comment sum)
    let mut verdicted: BTreeMap<i32, (usize, u64)> = BTreeMap::new();
    let mut by_year_judgment: BTreeMap<(i32, Judgment), usize> = BTreeMap::new();
    // judgment -> (posts, comment sum, word sum)
    let mut by_judgment: BTreeMap<Judgment, (usize, u64, u64)> = BTreeMap::new();
    for r in records {
        let y = year_of(r.created_utc);
        let e = verdicted.entry(y).or_default();
        e.0 += 1;
        e.1 += u64::from(r.comment_count);
        *by_year_judgment.entry((y, r.verdict)).or_default() += 1;
        let j = by_judgment.entry(r.verdict).or_default();
        j.0 += 1;
        j.1 += u64::from(r.comment_count);
        j.2 += r.body.split_whitespace().count() as u64;
    }

    let mut years: Vec<i32> = ingest.posts_by_year.keys().copied().collect();
    years.extend(ingest.comments_by_year.keys());
    years.extend(verdicted.keys());
    years.sort_unstable();
    years.dedup();
    let mut by_year = Table::new(["year", "posts", "comments", "verdicted_posts", "mean_comments_per_post"]);
    for y in years {
        let (n, c) = verdicted.get(&y).copied().unwrap_or_default();
        by_year.push_cells(vec![
            Some(y.to_string()),
            Some(ingest.posts_by_year.get(&y).copied().unwrap_or(0).to_string()),
            Some(ingest.comments_by_year.get(&y).copied().unwrap_or(0).to_string()),
            Some(n.to_string()),
            mean(c as f64, n),
        ]);
    }

    let mut yj = Table::new(["year", "judgment", "posts", "share"]);
    for (&(y, j), &n) in &by_year_judgment {
        yj.push([y.to_string(), j.as_str().to_string(), n.to_string(), f(n as f64 / verdicted[&y].0 as f64)]);
    }

    let total = records.len();
    let mut bj = Table::new(["judgment", "posts", "share", "mean_comments", "mean_body_words"]);
    for j in Judgment::ALL {
        let (n, c, w) = by_judgment.get(&j).copied().unwrap_or_default();
        bj.push_cells(vec![
            Some(j.as_str().to_string()),
            Some(n.to_string()),
            mean(n as f64, total),
            mean(c as f64, n),
            mean(w as f64, n),
        ]);
    }
    (by_year, yj, bj)
}

pub fn report(ctx: &Ctx) -> Result<String> {
    let records = ctx.records(VERDICTED, "ingest")?;
    let ingest: IngestSummary = formats::read_json(&ctx.input(INGEST_SUMMARY, "ingest")?)?;
    let mut bundle = Bundle { ctx, files: Vec::new() };
    let mut skipped = BTreeMap::new();

    let (by_year, yj, bj) = corpus_tables(&records, &ingest);
    bundle.put("corpus_by_year.csv", &by_year.to_csv())?;
    bundle.put("corpus_by_year_judgment.csv", &yj.to_csv())?;
    bundle.put("corpus_by_judgment.csv", &bj.to_csv())?;

    let topic_tables = if !ctx.out(MODEL).exists() {
        Err("no trained model; run `train`".to_string())
    } else if ctx.cfg.naming.name_map.is_none() {
        Err("[naming].name_map is not set".to_string())
    } else {
        Ok(ctx.all_splits()?)
    };
    match topic_tables {
        Ok(AllSplits { named, splits }) => {
            let all = &splits[2].1;
            let stats = pair_stats(&named, all)?;
            bundle.put("treemap.csv", &treemap_table(&named, all).to_csv())?;
            bundle.put("prevalence.csv", &prevalence_table(&named, all)?.to_csv())?;
            bundle.put("pair_ccdf.csv", &ccdf_table(&stats).to_csv())?;
            bundle.put("pmi.csv", &pmi_table(&named, &stats)?.to_csv())?;
        }
        Err(why) => {
            for t in ["treemap.csv", "prevalence.csv", "pair_ccdf.csv", "pmi.csv"] {
                skipped.insert(t.to_string(), why.clone());
            }
        }
    }

    for (name, producer) in [("radar.csv", "radar"), ("correlation.csv", "correlate")] {
        let src = ctx.out(name);
        if src.exists() {
            bundle.put(name, &formats::read_text(&src)?)?;
        } else {
            skipped.insert(name.to_string(), format!("run `{producer}` first"));
        }
    }

    let manifest = Manifest {
        seed: ctx.cfg.seed,
        verdicted_posts: records.len(),
        files: bundle.files,
        skipped,
    };
    ctx.write("report/report.json", &format_json(&manifest))?;
    Ok(format!(
        "{} report tables written to {}; {} skipped",
        manifest.files.len(),
        ctx.out("report").display(),
        manifest.skipped.len()
    ))
}
