//! `ingest`, `filter` and `split`.

use std::collections::BTreeMap;

use anyhow::Result;
use moraltopics_core::corpus::{
    filter_threads, reconstruct_verdict, split_by_date, Comment, Thread, VerdictSource, VerdictedThread,
};
use serde::{Deserialize, Serialize};
use time::OffsetDateTime;

use super::{need, tally, Ctx, FILTERED, INGEST_SUMMARY, TEST, TRAIN, VERDICTED};
use crate::archive::{read_comments, read_posts, Skip};
use crate::formats::{format_json, format_jsonl};
use crate::records::ThreadRecord;

/// Calendar year (UTC) of a Unix timestamp; out-of-range values clamp.
pub fn year_of(ts: i64) -> i32 {
    OffsetDateTime::from_unix_timestamp(ts)
        .map(|t| t.year())
        .unwrap_or(if ts < 0 { -9999 } else { 9999 })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub posts_read: usize,
    pub post_lines_skipped: usize,
    pub comments_read: usize,
    pub comment_lines_skipped: usize,
    /// Comments whose post is not in the archive.
    pub orphan_comments: usize,
    /// Comments dropped while assembling threads (bad parents, repeats).
    pub dropped_comments: usize,
    pub verdict_from_flair: usize,
    pub verdict_from_top_comment: usize,
    pub no_verdict: usize,
    pub posts_by_year: BTreeMap<i32, usize>,
    pub comments_by_year: BTreeMap<i32, usize>,
}

fn report_skips(what: &str, skips: &[Skip]) {
    for s in skips.iter().take(5) {
        eprintln!("skipped {what} line {}: {}", s.line, s.reason);
    }
    if skips.len() > 5 {
        eprintln!("... {} more skipped {what} lines", skips.len() - 5);
    }
}

pub fn ingest(ctx: &Ctx) -> Result<String> {
    let corpus = &ctx.cfg.corpus;
    need(&corpus.posts, "a posts archive at [corpus].posts")?;
    let posts = read_posts(&corpus.posts)?;
    report_skips("post", &posts.skips);

    let mut summary = IngestSummary {
        posts_read: posts.records.len(),
        post_lines_skipped: posts.skips.len(),
        posts_by_year: tally(posts.records.iter().map(|p| year_of(p.created_at))),
        ..Default::default()
    };

    let mut by_post: BTreeMap<String, Vec<Comment>> = BTreeMap::new();
    let with_comments = corpus.comments.is_some();
    if let Some(path) = &corpus.comments {
        need(path, "a comments archive at [corpus].comments")?;
        let comments = read_comments(path)?;
        report_skips("comment", &comments.skips);
        summary.comments_read = comments.records.len();
        summary.comment_lines_skipped = comments.skips.len();
        summary.comments_by_year = tally(comments.records.iter().map(|c| year_of(c.created_at)));
        for c in comments.records {
            by_post.entry(c.post_id.clone()).or_default().push(c);
        }
    }

    let flair_map = corpus.flair_map();
    let mut out = Vec::new();
    for post in posts.records {
        let thread = if with_comments {
            let comments = by_post.remove(&post.id).unwrap_or_default();
            let (thread, dropped) = Thread::assemble(post, comments);
            summary.dropped_comments += dropped;
            thread
        } else {
            Thread::post_only(post)
        };
        match reconstruct_verdict(thread, &flair_map) {
            Some(v) => {
                match v.verdict_source {
                    VerdictSource::Flair => summary.verdict_from_flair += 1,
                    VerdictSource::TopComment => summary.verdict_from_top_comment += 1,
                }
                out.push(ThreadRecord::from(&v));
            }
            None => summary.no_verdict += 1,
        }
    }
    summary.orphan_comments = by_post.values().map(Vec::len).sum();

    ctx.write(VERDICTED, &format_jsonl(&out))?;
    ctx.write(INGEST_SUMMARY, &format_json(&summary))?;
    Ok(format!(
        "{} posts read, {} verdicted ({} flair, {} top comment), {} without verdict",
        summary.posts_read,
        out.len(),
        summary.verdict_from_flair,
        summary.verdict_from_top_comment,
        summary.no_verdict
    ))
}

/// Maps an order-preserving subsequence of core threads back onto the
/// records it came from.
fn subsequence(records: &[ThreadRecord], kept: &[VerdictedThread]) -> Vec<ThreadRecord> {
    let mut out = Vec::with_capacity(kept.len());
    let mut it = records.iter();
    for t in kept {
        let id = &t.thread.post().id;
        if let Some(r) = it.by_ref().find(|r| &r.post_id == id) {
            out.push(r.clone());
        }
    }
    out
}

pub fn filter(ctx: &Ctx) -> Result<String> {
    let records = ctx.records(VERDICTED, "ingest")?;
    let kept = filter_threads(records.iter().map(ThreadRecord::to_thread), &ctx.cfg.corpus.filter);
    let kept = subsequence(&records, &kept);
    ctx.write(FILTERED, &format_jsonl(&kept))?;
    Ok(format!("{} of {} threads kept", kept.len(), records.len()))
}

pub fn split(ctx: &Ctx) -> Result<String> {
    let records = ctx.records(FILTERED, "filter")?;
    let (train, test) = split_by_date(records.iter().map(ThreadRecord::to_thread), ctx.cfg.corpus.split_cutoff);
    let (train, test) = (subsequence(&records, &train), subsequence(&records, &test));
    ctx.write(TRAIN, &format_jsonl(&train))?;
    ctx.write(TEST, &format_jsonl(&test))?;
    Ok(format!("{} train, {} test threads", train.len(), test.len()))
}
