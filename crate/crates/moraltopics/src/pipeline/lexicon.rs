//! `lexicon-score`, `correlate` and `radar`. All three work on the training
//! split.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use moraltopics_core::lexicon::{
    category_fractions, coverage_by_group, coverage_missing_rate, foundation_presence, foundation_prevalence,
    top_by_variance, Foundation, FoundationVector,
};
use moraltopics_core::naming::TopicPair;
use moraltopics_core::Valence;

use super::topics::Scored;
use super::{f, opt, Ctx, TRAIN};
use crate::config::TokenStream;
use crate::formats::{self, load_lexicon, Table};
use crate::stats::{correlate_ya, StatsError};

const EMPATH_POSTS: &str = "empath_posts.csv";
const MFD_POSTS: &str = "mfd_posts.csv";
/// Leading non-category columns of the empath table.
const EMPATH_META: usize = 3;

fn flag_cells(v: Option<FoundationVector>) -> Vec<Option<String>> {
    (0..5)
        .map(|i| v.map(|v| if v.0[i] { "1".to_string() } else { "0".to_string() }))
        .collect()
}

pub fn lexicon_score(ctx: &Ctx) -> Result<String> {
    let lx = &ctx.cfg.lexicons;
    if lx.empath.is_none() && lx.mfd.is_none() {
        bail!("neither [lexicons].empath nor [lexicons].mfd is set");
    }
    let records = ctx.records(TRAIN, "split")?;
    let lemmas = ctx.lemma_table()?;
    let tokens_of = |text: &str| match lx.tokens {
        TokenStream::Lemmatized => ctx.tokens(text, Some(&lemmas)),
        TokenStream::Raw => ctx.tokens(text, None),
    };
    let post_tokens: Vec<Vec<String>> = records.iter().map(|r| tokens_of(&r.body)).collect();
    let mut msgs = Vec::new();

    if let Some(path) = &lx.empath {
        let lexicon = load_lexicon(path, lx.empath_mode)?;
        let mut header = vec!["post_id".to_string(), "tokens".into(), "empty".into()];
        header.extend(lexicon.category_names().map(String::from));
        let mut t = Table::new(header);
        for (r, toks) in records.iter().zip(&post_tokens) {
            let fr = category_fractions(toks, &lexicon);
            let mut row = vec![r.post_id.clone(), toks.len().to_string(), u8::from(fr.empty_document).to_string()];
            // Shortest round-trip form; `correlate` reads these back.
            row.extend(fr.values.iter().map(|v| format!("{v}")));
            t.push(row);
        }
        ctx.write(EMPATH_POSTS, &t.to_csv())?;
        msgs.push(format!("{} categories scored", lexicon.len()));
    }

    if let Some(path) = &lx.mfd {
        let mfd = load_lexicon(path, lx.mfd_mode)?;
        let mut header = vec!["post_id".to_string(), "valence".into()];
        for scope in ["post", "verdict"] {
            header.extend(Foundation::ALL.iter().map(|fd| format!("{scope}_{}", fd.as_str())));
        }
        let mut t = Table::new(header);
        let mut posts = Vec::new();
        let mut verdicts = Vec::new();
        for (r, toks) in records.iter().zip(&post_tokens) {
            let pv = foundation_presence(toks, &mfd)?;
            let vv = match &r.verdict_text {
                Some(text) => Some(foundation_presence(&tokens_of(text), &mfd)?),
                None => None,
            };
            posts.push((r.post_id.clone(), pv));
            if let Some(v) = vv {
                verdicts.push((r.post_id.clone(), v));
            }
            let mut row = vec![Some(r.post_id.clone()), Some(r.valence.as_str().to_string())];
            row.extend(flag_cells(Some(pv)));
            row.extend(flag_cells(vv));
            t.push_cells(row);
        }
        ctx.write(MFD_POSTS, &t.to_csv())?;
        ctx.write("coverage.csv", &coverage_table(ctx, &posts, &verdicts)?.to_csv())?;
        let rate = coverage_missing_rate(&posts.iter().map(|p| p.1).collect::<Vec<_>>())?;
        msgs.push(format!(
            "{:.1}% of posts without any foundation; {} verdicts scored",
            100.0 * rate,
            verdicts.len()
        ));
    }
    Ok(msgs.join("; "))
}

/// Missing-foundation rates overall and, when topics are named, per top-1
/// topic.
fn coverage_table(
    ctx: &Ctx,
    posts: &[(String, FoundationVector)],
    verdicts: &[(String, FoundationVector)],
) -> Result<Table> {
    let topic_of: Option<BTreeMap<String, String>> = if ctx.cfg.naming.name_map.is_some() {
        let scored = ctx.scored("train")?;
        Some(
            scored
                .docs
                .iter()
                .filter_map(|d| d.top1().map(|t| (d.post_id.clone(), scored.named.name(t).to_string())))
                .collect(),
        )
    } else {
        None
    };
    let mut t = Table::new(["scope", "group", "missing_rate", "n"]);
    for (scope, items) in [("post", posts), ("verdict", verdicts)] {
        let vectors: Vec<FoundationVector> = items.iter().map(|i| i.1).collect();
        match coverage_missing_rate(&vectors) {
            Ok(rate) => t.push([scope.to_string(), "all".into(), f(rate), vectors.len().to_string()]),
            Err(_) => t.push_cells(vec![Some(scope.into()), Some("all".into()), None, Some("0".into())]),
        }
        if let Some(topic_of) = &topic_of {
            let grouped: Vec<(String, FoundationVector)> = items
                .iter()
                .filter_map(|(id, v)| topic_of.get(id).map(|g| (g.clone(), *v)))
                .collect();
            for (g, (rate, n)) in coverage_by_group(&grouped) {
                t.push([scope.to_string(), g, f(rate), n.to_string()]);
            }
        }
    }
    Ok(t)
}

/// Training documents grouped by topic pair, largest group first; ties in
/// pair order.
fn pair_groups(scored: &Scored) -> Vec<(TopicPair, Vec<&str>)> {
    let mut groups: BTreeMap<TopicPair, Vec<&str>> = BTreeMap::new();
    for d in &scored.docs {
        if let Some((a, b)) = d.top {
            if let Some(p) = TopicPair::new(scored.named.name(a), scored.named.name(b)) {
                groups.entry(p).or_default().push(d.post_id.as_str());
            }
        }
    }
    let mut out: Vec<(TopicPair, Vec<&str>)> = groups.into_iter().collect();
    out.sort_by_key(|g| std::cmp::Reverse(g.1.len()));
    out
}

pub fn correlate(ctx: &Ctx) -> Result<String> {
    let path = ctx.input(EMPATH_POSTS, "lexicon-score")?;
    let (header, rows) = formats::read_csv(&path)?;
    if header.len() <= EMPATH_META {
        bail!("{} has no category columns", path.display());
    }
    let categories = &header[EMPATH_META..];
    let mut features: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        let vals = row[EMPATH_META..]
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("{}: row {}", path.display(), i + 2))?;
        features.insert(row[0].as_str(), vals);
    }
    let scored = ctx.scored("train")?;
    let valence: BTreeMap<&str, Valence> = scored.docs.iter().map(|d| (d.post_id.as_str(), d.valence)).collect();

    let all_ids: Vec<&str> = scored.docs.iter().map(|d| d.post_id.as_str()).collect();
    let all_rows: Vec<Vec<f64>> = all_ids.iter().filter_map(|id| features.get(id).cloned()).collect();
    let lx = &ctx.cfg.lexicons;
    let columns = top_by_variance(&all_rows, lx.top_categories);

    let mut groups: Vec<(String, Vec<&str>)> = vec![("all".into(), all_ids)];
    groups.extend(
        pair_groups(&scored)
            .into_iter()
            .filter(|(_, ids)| ids.len() >= lx.min_group_size)
            .map(|(p, ids)| (p.to_string(), ids)),
    );

    let mut t = Table::new(["topic_pair", "category", "r", "p", "significant"]);
    let mut skipped = Vec::new();
    for (name, ids) in &groups {
        let (rows, flags): (Vec<Vec<f64>>, Vec<bool>) = ids
            .iter()
            .filter_map(|id| {
                let x = features.get(id)?;
                Some((columns.iter().map(|&c| x[c]).collect(), valence[id] == Valence::Ya))
            })
            .unzip();
        match correlate_ya(&rows, &flags, lx.alpha) {
            Ok(cs) => {
                for (&c, corr) in columns.iter().zip(cs) {
                    t.push_cells(vec![
                        Some(name.clone()),
                        Some(categories[c].clone()),
                        opt(corr.r),
                        opt(corr.p),
                        Some(corr.significant.to_string()),
                    ]);
                }
            }
            Err(StatsError::ConstantFlags | StatsError::TooFewDocuments(_)) => skipped.push(name.clone()),
            Err(e) => return Err(e.into()),
        }
    }
    ctx.write("correlation.csv", &t.to_csv())?;
    let mut msg = format!(
        "{} categories correlated in {} groups",
        columns.len(),
        groups.len() - skipped.len()
    );
    if !skipped.is_empty() {
        msg.push_str(&format!("; skipped for constant YA flags or size: {}", skipped.join(", ")));
    }
    Ok(msg)
}

fn parse_flags(cells: &[String]) -> Option<FoundationVector> {
    let mut v = FoundationVector::default();
    for (slot, c) in v.0.iter_mut().zip(cells) {
        *slot = match c.as_str() {
            "1" => true,
            "0" => false,
            _ => return None,
        };
    }
    Some(v)
}

pub fn radar(ctx: &Ctx) -> Result<String> {
    let path = ctx.input(MFD_POSTS, "lexicon-score")?;
    let (_, rows) = formats::read_csv(&path)?;
    let mut post_flags: BTreeMap<&str, FoundationVector> = BTreeMap::new();
    let mut verdict_flags: BTreeMap<&str, FoundationVector> = BTreeMap::new();
    for row in &rows {
        if row.len() < 12 {
            bail!("{}: short row for {:?}", path.display(), row.first());
        }
        if let Some(v) = parse_flags(&row[2..7]) {
            post_flags.insert(row[0].as_str(), v);
        }
        if let Some(v) = parse_flags(&row[7..12]) {
            verdict_flags.insert(row[0].as_str(), v);
        }
    }
    let scored = ctx.scored("train")?;
    let named = &scored.named;
    let valence: BTreeMap<&str, Valence> = scored.docs.iter().map(|d| (d.post_id.as_str(), d.valence)).collect();

    let mut groups: Vec<(&str, String, Vec<&str>)> = Vec::new();
    let mut by_topic: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for d in &scored.docs {
        if let Some(t) = d.top1() {
            by_topic.entry(t).or_default().push(d.post_id.as_str());
        }
    }
    groups.extend(by_topic.into_iter().map(|(t, ids)| ("topic", named.name(t).to_string(), ids)));
    groups.extend(pair_groups(&scored).into_iter().map(|(p, ids)| ("pair", p.to_string(), ids)));

    let min = ctx.cfg.lexicons.min_group_size;
    let mut header = vec!["scope".to_string(), "topic_or_pair".into(), "valence".into()];
    header.extend(Foundation::ALL.iter().map(|f| f.as_str().to_string()));
    header.push("n".into());
    let mut t = Table::new(header);
    let mut emitted = 0usize;
    for (source, flags) in [("posts", &post_flags), ("verdicts", &verdict_flags)] {
        for (kind, name, ids) in &groups {
            let items: Vec<(FoundationVector, Valence)> = ids
                .iter()
                .filter_map(|id| flags.get(id).map(|v| (*v, valence[id])))
                .collect();
            if items.len() < min {
                continue;
            }
            let Ok(prev) = foundation_prevalence(&items) else {
                continue;
            };
            for (label, profile) in [("YA", prev.ya), ("NA", prev.na)] {
                let Some(p) = profile else { continue };
                let mut row = vec![format!("{source}_{kind}"), name.clone(), label.to_string()];
                row.extend(p.shares.iter().map(|&s| f(s)));
                row.push(p.n.to_string());
                t.push(row);
                emitted += 1;
            }
        }
    }
    ctx.write("radar.csv", &t.to_csv())?;
    Ok(format!("{emitted} radar rows"))
}
