//! Pipeline configuration, read from a single TOML file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use moraltopics_core::corpus::{FilterRules, FlairMap, Judgment};
use moraltopics_core::lda::{LdaConfig, DEFAULT_INFER_SWEEPS};
use moraltopics_core::lexicon::MatchMode;
use moraltopics_core::naming::RandomSource;
use moraltopics_core::seed::derive_seed;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed; every stage derives its own seed from it.
    pub seed: u64,
    pub corpus: CorpusSection,
    pub textprep: TextprepSection,
    pub lda: LdaSection,
    pub naming: NamingSection,
    pub survey: SurveySection,
    pub service: ServiceSection,
    pub lexicons: LexiconSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub posts: PathBuf,
    /// Comment archive; without it verdicts come from flairs only.
    pub comments: Option<PathBuf>,
    /// Threads created at or before this Unix time form the training split.
    pub split_cutoff: i64,
    /// Flair text to judgment, compared case-insensitively.
    pub flair_map: BTreeMap<String, Judgment>,
    pub filter: FilterRules,
}

impl Default for CorpusSection {
    fn default() -> Self {
        let flair_map = [
            ("Asshole", Judgment::Yta),
            ("Not the A-hole", Judgment::Nta),
            ("Everyone Sucks", Judgment::Esh),
            ("No A-holes here", Judgment::Nah),
            ("Not enough info", Judgment::Info),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        CorpusSection {
            posts: PathBuf::from("posts.jsonl"),
            comments: None,
            split_cutoff: 1_577_836_799,
            flair_map,
            filter: FilterRules::default(),
        }
    }
}

impl CorpusSection {
    pub fn flair_map(&self) -> FlairMap {
        self.flair_map.iter().map(|(k, &v)| (k.as_str(), v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextprepSection {
    pub lemma_table: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub min_df: u32,
    /// Redact user mentions and URLs before tokenizing.
    pub scrub: bool,
}

impl Default for TextprepSection {
    fn default() -> Self {
        TextprepSection {
            lemma_table: None,
            stopwords: None,
            min_df: 20,
            scrub: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceScope {
    /// Document frequencies over the documents assigned to the cluster.
    #[default]
    Cluster,
    /// Document frequencies over the whole training corpus.
    Corpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSection {
    pub num_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: u32,
    /// Gibbs sweeps when folding in unseen documents.
    pub infer_sweeps: u32,
    pub sweep_ks: Vec<usize>,
    /// Share of training documents used to fit sweep models; the rest
    /// score perplexity.
    pub train_fraction: f64,
    pub top_words: usize,
    pub coherence_scope: CoherenceScope,
}

impl Default for LdaSection {
    fn default() -> Self {
        let base = LdaConfig::default();
        LdaSection {
            num_topics: base.num_topics,
            alpha: base.alpha,
            beta: base.beta,
            iterations: base.iterations,
            infer_sweeps: DEFAULT_INFER_SWEEPS,
            sweep_ks: (1..=10).map(|i| i * 10).collect(),
            train_fraction: 0.8,
            top_words: 10,
            coherence_scope: CoherenceScope::Cluster,
        }
    }
}

impl LdaSection {
    pub fn lda_config(&self, seed: u64) -> LdaConfig {
        LdaConfig {
            num_topics: self.num_topics,
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NamingSection {
    pub random_source: RandomSource,
    /// Adjudicated `cluster_id⇥name⇥decision` file.
    pub name_map: Option<PathBuf>,
    /// `name⇥meta_category` file.
    pub meta: Option<PathBuf>,
    /// Naming-survey export, checked against the name map when present.
    pub answers: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurveySection {
    pub per_topic_train: usize,
    pub per_topic_test: usize,
    /// Post used as the screening question; defaults to the training post
    /// with the most confident top topic.
    pub screening_post: Option<String>,
    /// Response exports per bank id, for `agreement`.
    pub responses: BTreeMap<String, PathBuf>,
}

impl Default for SurveySection {
    fn default() -> Self {
        SurveySection {
            per_topic_train: 20,
            per_topic_test: 10,
            screening_post: None,
            responses: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceSection {
    pub bind: String,
    pub bank_dir: PathBuf,
    pub store_dir: PathBuf,
    pub answers_per_question: usize,
    pub questions_per_session: usize,
    pub idle_timeout_secs: u64,
    /// Built client assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceSection {
    fn default() -> Self {
        ServiceSection {
            bind: "127.0.0.1:8080".into(),
            bank_dir: PathBuf::from("banks"),
            store_dir: PathBuf::from("store"),
            answers_per_question: 3,
            questions_per_session: 20,
            idle_timeout_secs: 3600,
            static_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenStream {
    #[default]
    Lemmatized,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconSection {
    /// Many-category lexicon scored as match fractions.
    pub empath: Option<PathBuf>,
    pub empath_mode: Option<MatchMode>,
    /// Five-foundation lexicon scored as presence flags.
    pub mfd: Option<PathBuf>,
    pub mfd_mode: Option<MatchMode>,
    pub tokens: TokenStream,
    pub alpha: f64,
    pub top_categories: usize,
    /// Smallest topic or pair group reported in radar and correlation rows.
    pub min_group_size: usize,
}

impl Default for LexiconSection {
    fn default() -> Self {
        LexiconSection {
            empath: None,
            empath_mode: None,
            mfd: None,
            mfd_mode: None,
            tokens: TokenStream::Lemmatized,
            alpha: 0.05,
            top_categories: 50,
            min_group_size: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
        }
    }
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Result<Config, String> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path`, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Config::parse(&text, base).map_err(|message| ConfigError::Invalid {
            path: path.to_path_buf(),
            message,
        })
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let fix_opt = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                fix(p);
            }
        };
        fix(&mut self.corpus.posts);
        fix_opt(&mut self.corpus.comments);
        fix_opt(&mut self.textprep.lemma_table);
        fix_opt(&mut self.textprep.stopwords);
        fix_opt(&mut self.naming.name_map);
        fix_opt(&mut self.naming.meta);
        fix_opt(&mut self.naming.answers);
        self.survey.responses.values_mut().for_each(fix);
        fix(&mut self.service.bank_dir);
        fix(&mut self.service.store_dir);
        fix_opt(&mut self.service.static_dir);
        fix_opt(&mut self.lexicons.empath);
        fix_opt(&mut self.lexicons.mfd);
        fix(&mut self.output.dir);
    }

    fn validate(&self) -> Result<(), String> {
        let lda = &self.lda;
        if !(lda.train_fraction > 0.0 && lda.train_fraction < 1.0) {
            return Err(format!("lda.train_fraction must be in (0, 1), got {}", lda.train_fraction));
        }
        if lda.sweep_ks.iter().any(|&k| k < 2) {
            return Err("lda.sweep_ks entries must be at least 2".into());
        }
        if self.service.answers_per_question == 0 || self.service.questions_per_session == 0 {
            return Err("service.answers_per_question and questions_per_session must be positive".into());
        }
        if self.survey.per_topic_train == 0 || self.survey.per_topic_test == 0 {
            return Err("survey.per_topic_* must be positive".into());
        }
        if !(self.lexicons.alpha > 0.0 && self.lexicons.alpha < 1.0) {
            return Err("lexicons.alpha must be in (0, 1)".into());
        }
        Ok(())
    }

    pub fn stage_seed(&self, stage: &str) -> u64 {
        derive_seed(self.seed, stage)
    }

    pub fn out(&self, file: &str) -> PathBuf {
        self.output.dir.join(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_relative_paths() {
        let cfg = Config::parse(
            "seed = 7\n[corpus]\nposts = \"data/p.jsonl\"\n[lda]\nnum_topics = 5\n[output]\ndir = \"/abs/out\"\n",
            Path::new("/cfg"),
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.corpus.posts, PathBuf::from("/cfg/data/p.jsonl"));
        assert_eq!(cfg.output.dir, PathBuf::from("/abs/out"));
        assert_eq!(cfg.lda.num_topics, 5);
        assert_eq!(cfg.lda.alpha, 0.1);
        assert_eq!(cfg.textprep.min_df, 20);
        assert_eq!(cfg.corpus.filter.min_body_words, 50);
        assert_eq!(cfg.service.answers_per_question, 3);
        assert_eq!(cfg.corpus.flair_map().get("asshole"), Some(Judgment::Yta));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::parse("[lda]\nnum_topic = 5\n", Path::new(".")).is_err());
        assert!(Config::parse("[nope]\n", Path::new(".")).is_err());
        assert!(Config::parse("[corpus.filter]\nmin_words = 3\n", Path::new(".")).is_err());
    }

    #[test]
    fn stage_seeds_differ() {
        let cfg = Config::default();
        assert_ne!(cfg.stage_seed("train"), cfg.stage_seed("sweep"));
        assert_eq!(cfg.stage_seed("train"), Config::default().stage_seed("train"));
    }
}
