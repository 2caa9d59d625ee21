//! The command-line stages. Each stage reads its inputs from the output
//! directory (or the configured sources), writes its artifacts atomically,
//! and returns a short human-readable summary.

mod corpus;
mod lexicon;
mod metrics;
mod model;
mod report;
mod survey;
mod topics;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use moraltopics_core::lda::TopicModel;
use moraltopics_core::naming::{merge_topics, resolve_names, NamedTopics};
use moraltopics_core::textprep::{lemmatize, tokenize, LemmaTable};

use crate::config::Config;
use crate::formats::{self, write_atomic};
use crate::records::ThreadRecord;
use crate::scrub::scrub;

pub use corpus::{ingest, filter, split};
pub use lexicon::{correlate, lexicon_score, radar};
pub use metrics::{ami, coherence, pairs, pmi};
pub use model::{prep, sweep, train};
pub use report::report;
pub use survey::{agreement, survey_bank};
pub use topics::{merge, naming_bank};

pub const VERDICTED: &str = "verdicted.jsonl";
pub const INGEST_SUMMARY: &str = "ingest_summary.json";
pub const FILTERED: &str = "filtered.jsonl";
pub const TRAIN: &str = "train.jsonl";
pub const TEST: &str = "test.jsonl";
pub const VOCAB: &str = "vocab.tsv";
pub const BOWS_TRAIN: &str = "bows_train.jsonl";
pub const BOWS_TEST: &str = "bows_test.jsonl";
pub const MODEL: &str = "model.txt";
pub const THETA_TEST: &str = "theta_test.csv";

/// Stages by split name: `train` or `test`.
pub const SPLITS: [&str; 2] = ["train", "test"];

pub struct Ctx {
    pub cfg: Config,
}

impl Ctx {
    pub fn new(cfg: Config) -> Self {
        Ctx { cfg }
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.cfg.out(name)
    }

    /// Path of a stage input under the output directory, failing with a hint
    /// at the producing command when it is missing.
    pub fn input(&self, name: &str, producer: &str) -> Result<PathBuf> {
        let p = self.out(name);
        need(&p, producer)?;
        Ok(p)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.out(name), contents.as_bytes())?;
        Ok(())
    }

    pub fn seed(&self, stage: &str) -> u64 {
        self.cfg.stage_seed(stage)
    }

    pub fn records(&self, name: &str, producer: &str) -> Result<Vec<ThreadRecord>> {
        Ok(formats::read_jsonl(&self.input(name, producer)?)?)
    }

    pub fn lemma_table(&self) -> Result<LemmaTable> {
        match &self.cfg.textprep.lemma_table {
            Some(p) => Ok(formats::read_lemma_table(p)?),
            None => Ok(LemmaTable::new()),
        }
    }

    /// Body tokens as fed to the vocabulary; the title is never used.
    pub fn tokens(&self, body: &str, lemmas: Option<&LemmaTable>) -> Vec<String> {
        let tokens = if self.cfg.textprep.scrub {
            tokenize(&scrub(body))
        } else {
            tokenize(body)
        };
        match lemmas {
            Some(t) => lemmatize(tokens, t),
            None => tokens,
        }
    }

    pub fn model(&self) -> Result<TopicModel> {
        Ok(formats::read_model(&self.input(MODEL, "train")?)?)
    }

    /// Named topics from the configured name map and meta files.
    pub fn named_topics(&self, num_clusters: usize) -> Result<NamedTopics> {
        let naming = &self.cfg.naming;
        let Some(map_path) = &naming.name_map else {
            bail!("[naming].name_map is not set; it is needed to name topics");
        };
        let Some(meta_path) = &naming.meta else {
            bail!("[naming].meta is not set; it is needed to name topics");
        };
        need(map_path, "the naming adjudication")?;
        need(meta_path, "the meta-category assignment")?;
        let records = formats::read_name_map(map_path)?;
        let meta = formats::read_meta(meta_path)?;
        let answers = match &naming.answers {
            Some(p) => naming_answers(p)?,
            None => BTreeMap::new(),
        };
        let map = resolve_names(&answers, &records, num_clusters)
            .with_context(|| format!("resolving names from {}", map_path.display()))?;
        let merged = merge_topics(&map, &meta)?;
        for unused in &merged.unused_meta {
            eprintln!("warning: meta file names topic {unused:?}, which no cluster uses");
        }
        Ok(merged.topics)
    }
}

fn need(path: &Path, producer: &str) -> Result<()> {
    if !path.exists() {
        bail!("missing input {}; produce it with `{producer}` first", path.display());
    }
    Ok(())
}

/// Naming-survey export: one name per response, question id = cluster id.
fn naming_answers(path: &Path) -> Result<BTreeMap<usize, Vec<String>>> {
    let text = formats::read_text(path)?;
    let (responses, bad) = crate::service::parse_responses(&text);
    if let Some((line, msg)) = bad.first() {
        bail!("{}:{line}: {msg}", path.display());
    }
    let mut out: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for r in responses {
        let cluster: usize = r
            .question_id
            .parse()
            .with_context(|| format!("{}: question id {:?} is not a cluster id", path.display(), r.question_id))?;
        out.entry(cluster).or_default().extend(r.selected);
    }
    Ok(out)
}

/// Sorted, deduplicated count table of anything orderable.
pub(crate) fn tally<K: Ord>(items: impl IntoIterator<Item = K>) -> BTreeMap<K, usize> {
    let mut m = BTreeMap::new();
    for k in items {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

pub(crate) fn f(v: f64) -> String {
    formats::fmt6(v)
}

pub(crate) fn opt(v: Option<f64>) -> Option<String> {
    v.map(f)
}
