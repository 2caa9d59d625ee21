//! A self-contained demo workspace: synthetic post and comment archives
//! drawn from known topics, stand-in lexicons, a lemma table, stopwords,
//! the bundled 70-cluster name map and a config tying them together.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::formats::{write_atomic, FormatError};
use crate::synth::{generate, SynthConfig};

/// The adjudicated 70-cluster name map shipped with the crate.
pub const NAME_MAP: &str = include_str!("../fixtures/clusters70/name_map.tsv");
pub const META: &str = include_str!("../fixtures/clusters70/meta.tsv");

const SYLLABLES: [&str; 20] = [
    "ba", "ke", "di", "mo", "lu", "ra", "se", "ti", "po", "gu", "na", "fe", "hi", "ko", "zu", "va", "le", "ri", "so", "pu",
];

const STOPWORDS: [&str; 16] = [
    "the", "and", "to", "my", "of", "was", "it", "that", "in", "for", "me", "but", "so", "with", "he", "she",
];

const FLAIRS: [(&str, &str); 5] = [
    ("YTA", "Asshole"),
    ("NTA", "Not the A-hole"),
    ("ESH", "Everyone Sucks"),
    ("NAH", "No A-holes here"),
    ("INFO", "Not enough info"),
];

/// Unique three-syllable letter word for a vocabulary index (< 8000).
pub fn pseudo_word(i: usize) -> String {
    let n = SYLLABLES.len();
    format!("{}{}{}", SYLLABLES[i % n], SYLLABLES[(i / n) % n], SYLLABLES[(i / (n * n)) % n])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoConfig {
    pub posts: usize,
    pub vocab_size: usize,
    pub body_words: usize,
    /// Generating topics; the name map expects 70.
    pub topics: usize,
    pub lda_iterations: u32,
    pub seed: u64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            posts: 2400,
            vocab_size: 1500,
            body_words: 80,
            topics: 70,
            lda_iterations: 100,
            seed: 1,
        }
    }
}

fn pick_judgment(rng: &mut ChaCha8Rng, dominant: usize) -> usize {
    // Index into FLAIRS. YA share rises with the dominant topic index mod 7.
    let ya_share = 0.1 + 0.1 * (dominant % 7) as f64;
    let u: f64 = rng.random();
    if u < 0.03 {
        4
    } else if rng.random::<f64>() < ya_share {
        if rng.random::<f64>() < 0.8 { 0 } else { 2 }
    } else if rng.random::<f64>() < 0.85 {
        1
    } else {
        3
    }
}

fn filler(rng: &mut ChaCha8Rng, words: &[String], n: usize) -> String {
    (0..n)
        .map(|_| {
            if rng.random::<f64>() < 0.4 {
                STOPWORDS[rng.random_range(0..STOPWORDS.len())].to_string()
            } else {
                words[rng.random_range(0..words.len())].clone()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

struct Archives {
    posts: String,
    comments: String,
}

fn archives(cfg: &DemoConfig, words: &[String]) -> Archives {
    let truth = generate(&SynthConfig {
        num_topics: cfg.topics,
        num_docs: cfg.posts,
        doc_len: cfg.body_words,
        vocab_size: cfg.vocab_size,
        topic_concentration: 0.02,
        doc_concentration: 0.05,
        seed: cfg.seed,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    // 2013-01-01 .. 2021-01-01
    let (start, end) = (1_356_998_400_i64, 1_609_459_200_i64);
    let mut posts = String::new();
    let mut comments = String::new();
    for (d, bow) in truth.bows.iter().enumerate() {
        let id = format!("p{d:05}");
        let dominant = truth.theta[d]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(k, _)| k);
        let mut body: Vec<String> = Vec::new();
        for w in bow.tokens() {
            let w = &words[w as usize];
            body.push(if rng.random::<f64>() < 0.2 { format!("{w}s") } else { w.clone() });
            if rng.random::<f64>() < 0.3 {
                body.push(STOPWORDS[rng.random_range(0..STOPWORDS.len())].to_string());
            }
        }
        body.shuffle(&mut rng);

        // Roughly one post in seven fails a filter rule.
        let mut title = format!("AITA for {} {}?", words[rng.random_range(0..words.len())], words[rng.random_range(0..words.len())]);
        let mut score = rng.random_range(1..500_i64);
        let mut n_comments = rng.random_range(10..16_usize);
        match rng.random_range(0..28) {
            0 => title = format!("META: {title}"),
            1 => body.truncate(30),
            2 => n_comments = rng.random_range(0..10),
            3 => score = 0,
            4 => title = title.replacen("AITA", "WIBTA", 1),
            _ => {}
        }

        let judgment = pick_judgment(&mut rng, dominant);
        let route: f64 = rng.random();
        // Flair on most posts; the rest rely on the top tagged comment, and
        // a few carry no verdict at all.
        let flair = (route < 0.85).then(|| FLAIRS[judgment].1);
        let tagged = route < 0.97;
        let created = rng.random_range(start..end);

        let top = rng.random_range(0..n_comments.max(1));
        for c in 0..n_comments {
            let cid = format!("c{d:05}x{c:02}");
            let parent = if c > 0 && rng.random::<f64>() < 0.3 {
                format!("t1_c{d:05}x{:02}", rng.random_range(0..c))
            } else {
                format!("t3_{id}")
            };
            let len = rng.random_range(5..20);
            let text = filler(&mut rng, words, len);
            let (score, text) = if c == top && tagged {
                (1000 + rng.random_range(0..100_i64), format!("{} {text}", FLAIRS[judgment].0))
            } else if tagged && rng.random::<f64>() < 0.3 {
                let other = FLAIRS[rng.random_range(0..FLAIRS.len())].0;
                (rng.random_range(0..900_i64), format!("{other}, {text}"))
            } else {
                (rng.random_range(-5..900_i64), text)
            };
            let line = json!({
                "id": format!("t1_{cid}"),
                "parent_id": parent,
                "link_id": format!("t3_{id}"),
                "author": format!("user{}", rng.random_range(0..5000)),
                "created_utc": created + 60 * (c as i64 + 1),
                "score": score,
                "body": text,
            });
            writeln!(comments, "{line}").expect("string write");
        }
        let line = json!({
            "id": id,
            "title": title,
            "author": format!("user{}", rng.random_range(0..5000)),
            "created_utc": created,
            "selftext": body.join(" "),
            "link_flair_text": flair,
            "score": score,
            "num_comments": n_comments,
        });
        writeln!(posts, "{line}").expect("string write");
    }
    Archives { posts, comments }
}

fn lexicon(name: &str, categories: &[String], words: &[String], per_category: usize, rng: &mut ChaCha8Rng) -> String {
    let mut out = format!("#lexicon {name} EXACT\n");
    for c in categories {
        let mut picked: Vec<&str> = (0..per_category).map(|_| words[rng.random_range(0..words.len())].as_str()).collect();
        picked.sort_unstable();
        picked.dedup();
        writeln!(out, "{c}\t{}", picked.join(" ")).expect("string write");
    }
    out
}

fn config_toml(cfg: &DemoConfig) -> String {
    format!(
        r#"seed = {seed}

[corpus]
posts = "posts.jsonl"
comments = "comments.jsonl"
split_cutoff = 1577836799

[textprep]
lemma_table = "lemmas.tsv"
stopwords = "stopwords.txt"
min_df = 5

[lda]
num_topics = 70
iterations = {iters}
sweep_ks = [10, 40, 70]

[naming]
name_map = "name_map.tsv"
meta = "meta.tsv"

[survey]
per_topic_train = 5
per_topic_test = 3

[service]
bank_dir = "out/banks"
store_dir = "out/store"

[lexicons]
empath = "empath.tsv"
mfd = "mfd.tsv"
top_categories = 20
min_group_size = 5

[output]
dir = "out"
"#,
        seed = cfg.seed,
        iters = cfg.lda_iterations,
    )
}

/// Writes the demo files into `dir` and returns the config path.
pub fn write_demo(dir: &Path, cfg: &DemoConfig) -> Result<PathBuf, FormatError> {
    let words: Vec<String> = (0..cfg.vocab_size).map(pseudo_word).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1e71c0);
    let a = archives(cfg, &words);

    let categories: Vec<String> = (0..40).map(|i| format!("category_{i:02}")).collect();
    let foundations: Vec<String> = moraltopics_core::lexicon::Foundation::ALL
        .iter()
        .map(|f| f.as_str().to_string())
        .collect();
    let lemmas: String = words.iter().map(|w| format!("{w}s\t{w}\n")).collect();
    let stopwords: String = STOPWORDS.iter().map(|w| format!("{w}\n")).collect();

    let files: [(&str, String); 9] = [
        ("posts.jsonl", a.posts),
        ("comments.jsonl", a.comments),
        ("lemmas.tsv", lemmas),
        ("stopwords.txt", stopwords),
        ("empath.tsv", lexicon("empath", &categories, &words, 30, &mut rng)),
        ("mfd.tsv", lexicon("mfd", &foundations, &words, 40, &mut rng)),
        ("name_map.tsv", NAME_MAP.to_string()),
        ("meta.tsv", META.to_string()),
        ("moraltopics.toml", config_toml(cfg)),
    ];
    for (name, body) in &files {
        write_atomic(&dir.join(name), body.as_bytes())?;
    }
    Ok(dir.join("moraltopics.toml"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn pseudo_words_are_unique_tokens() {
        let words: BTreeSet<String> = (0..8000).map(pseudo_word).collect();
        assert_eq!(words.len(), 8000);
        for w in words.iter().take(50) {
            assert_eq!(moraltopics_core::textprep::tokenize(w), vec![w.clone()]);
        }
    }

    #[test]
    fn demo_config_parses() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = DemoConfig { posts: 50, ..Default::default() };
        let path = write_demo(dir.path(), &cfg).unwrap();
        let loaded = crate::config::Config::load(&path).unwrap();
        assert_eq!(loaded.lda.num_topics, 70);
        assert_eq!(std::fs::read_to_string(dir.path().join("posts.jsonl")).unwrap().lines().count(), 50);
    }
}
