//! On-disk formats: tab-separated tables, lexicons, models, JSON lines and
//! CSV exports. Every writer goes through [`write_atomic`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use moraltopics_core::lda::TopicModel;
use moraltopics_core::lexicon::{Lexicon, MatchMode};
use moraltopics_core::naming::{Decision, DecisionRecord, MetaCategory};
use moraltopics_core::textprep::{LemmaTable, Vocabulary};
use serde::de::DeserializeOwned;
use serde::Serialize;

const MODEL_MAGIC: &str = "#moraltopics-model 1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Writes to a temporary file beside `path`, then renames it into place, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| FormatError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Non-blank lines that do not start with `#`, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn fields<'a>(path: &Path, line: usize, text: &'a str, n: usize) -> Result<Vec<&'a str>, FormatError> {
    let parts: Vec<&str> = text.split('\t').collect();
    if parts.len() != n {
        return Err(parse_err(path, line, format!("expected {n} tab-separated fields, found {}", parts.len())));
    }
    Ok(parts)
}

pub fn read_lemma_table(path: &Path) -> Result<LemmaTable, FormatError> {
    let text = read_text(path)?;
    let mut table = LemmaTable::new();
    for (line, l) in content_lines(&text) {
        let f = fields(path, line, l, 2)?;
        table.insert(f[0].trim().to_lowercase(), f[1].trim().to_lowercase());
    }
    Ok(table)
}

pub fn read_stopwords(path: &Path) -> Result<BTreeSet<String>, FormatError> {
    let text = read_text(path)?;
    Ok(content_lines(&text).map(|(_, l)| l.trim().to_lowercase()).collect())
}

pub fn format_vocabulary(vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for (term, df) in vocab.iter() {
        let _ = writeln!(out, "{term}\t{df}");
    }
    out
}

pub fn read_vocabulary(path: &Path) -> Result<Vocabulary, FormatError> {
    let text = read_text(path)?;
    let mut terms = Vec::new();
    let mut dfs = Vec::new();
    for (line, l) in content_lines(&text) {
        let f = fields(path, line, l, 2)?;
        terms.push(f[0].to_string());
        dfs.push(f[1].parse::<u32>().map_err(|e| parse_err(path, line, e.to_string()))?);
    }
    Vocabulary::from_parts(terms, dfs).map_err(|e| parse_err(path, 0, e.to_string()))
}

/// `cluster_id⇥name⇥decision` lines.
pub fn read_name_map(path: &Path) -> Result<Vec<DecisionRecord>, FormatError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (line, l) in content_lines(&text) {
        let f = fields(path, line, l, 3)?;
        if line == 1 && f[0] == "cluster_id" {
            continue;
        }
        let cluster_id = f[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad cluster id {:?}", f[0])))?;
        let decision = Decision::from_name(f[2].trim())
            .ok_or_else(|| parse_err(path, line, format!("unknown decision {:?}", f[2])))?;
        out.push(DecisionRecord {
            cluster_id,
            name: f[1].to_string(),
            decision,
        });
    }
    Ok(out)
}

pub fn format_name_map(records: &[DecisionRecord]) -> String {
    let mut out = String::from("cluster_id\tname\tdecision\n");
    for r in records {
        let _ = writeln!(out, "{}\t{}\t{}", r.cluster_id, r.name, r.decision.as_str());
    }
    out
}

/// `name⇥meta_category` lines.
pub fn read_meta(path: &Path) -> Result<BTreeMap<String, MetaCategory>, FormatError> {
    let text = read_text(path)?;
    let mut out = BTreeMap::new();
    for (line, l) in content_lines(&text) {
        let f = fields(path, line, l, 2)?;
        if line == 1 && f[0] == "name" {
            continue;
        }
        let meta = MetaCategory::from_name(f[1].trim())
            .ok_or_else(|| parse_err(path, line, format!("unknown meta-category {:?}", f[1])))?;
        if out.insert(f[0].trim().to_string(), meta).is_some() {
            return Err(parse_err(path, line, format!("duplicate topic {:?}", f[0])));
        }
    }
    Ok(out)
}

/// Reads a lexicon file: a `#lexicon <name> <mode>` header, then
/// `category⇥word word ...` lines. `mode` overrides the header's mode.
pub fn load_lexicon(path: &Path, mode: Option<MatchMode>) -> Result<Lexicon, FormatError> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (_, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(path, 1, "empty lexicon file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let [tag, name, declared] = head[..] else {
        return Err(parse_err(path, 1, "expected header `#lexicon <name> <mode>`"));
    };
    if tag != "#lexicon" {
        return Err(parse_err(path, 1, "expected header `#lexicon <name> <mode>`"));
    }
    let declared: MatchMode = declared.parse().map_err(|e| parse_err(path, 1, format!("{e}")))?;
    let mut categories = Vec::new();
    for (line, l) in lines {
        if l.trim().is_empty() || l.starts_with('#') {
            continue;
        }
        let f = fields(path, line, l, 2)?;
        let words: Vec<String> = f[1].split_whitespace().map(str::to_lowercase).collect();
        categories.push((f[0].trim().to_string(), words));
    }
    Lexicon::new(name, mode.unwrap_or(declared), categories)
        .map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn format_model(model: &TopicModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC}");
    let _ = writeln!(out, "num_topics\t{}", model.num_topics());
    let _ = writeln!(out, "vocab_size\t{}", model.vocab_size());
    let _ = writeln!(out, "alpha\t{}", model.alpha());
    let _ = writeln!(out, "beta\t{}", model.beta());
    let _ = writeln!(out, "seed\t{}", model.seed());
    let _ = writeln!(out, "iterations\t{}", model.iterations());
    let _ = writeln!(out, "vocab_fingerprint\t{:016x}", model.vocab_fingerprint());
    let _ = writeln!(out, "num_docs\t{}", model.num_docs());
    out.push_str("phi\n");
    for k in 0..model.num_topics() {
        push_row(&mut out, model.phi(k));
    }
    out.push_str("theta\n");
    for (d, id) in model.doc_ids().iter().enumerate() {
        out.push_str(id);
        out.push('\t');
        push_row(&mut out, model.theta(d));
    }
    out
}

fn push_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

pub fn read_model(path: &Path) -> Result<TopicModel, FormatError> {
    let text = read_text(path)?;
    parse_model(&text).map_err(|(line, message)| parse_err(path, line, message))
}

struct Cursor<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

type ModelParse<T> = Result<T, (usize, String)>;

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> ModelParse<(usize, &'a str)> {
        self.lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or((0, format!("unexpected end of file, expected {what}")))
    }

    fn header<T: std::str::FromStr>(&mut self, key: &str) -> ModelParse<T> {
        let (n, l) = self.next(key)?;
        match l.split_once('\t') {
            Some((k, v)) if k == key => v.parse().map_err(|_| (n, format!("bad value {v:?}"))),
            _ => Err((n, format!("expected `{key}`"))),
        }
    }

    fn section(&mut self, name: &str) -> ModelParse<()> {
        let (n, l) = self.next(name)?;
        if l == name {
            Ok(())
        } else {
            Err((n, format!("expected `{name}`")))
        }
    }

    fn row(&mut self, width: usize, out: &mut Vec<f64>) -> ModelParse<()> {
        let (n, l) = self.next("matrix row")?;
        self.values(n, l, width, out)
    }

    fn values(&self, n: usize, body: &str, width: usize, out: &mut Vec<f64>) -> ModelParse<()> {
        let before = out.len();
        for tok in body.split(' ') {
            out.push(tok.parse::<f64>().map_err(|_| (n, format!("bad number {tok:?}")))?);
        }
        if out.len() - before != width {
            return Err((n, format!("expected {width} values")));
        }
        Ok(())
    }
}

fn parse_model(text: &str) -> ModelParse<TopicModel> {
    let mut c = Cursor { lines: text.lines().enumerate() };
    let (_, magic) = c.next("header")?;
    if magic != MODEL_MAGIC {
        return Err((1, "not a model file".into()));
    }
    let k: usize = c.header("num_topics")?;
    let m: usize = c.header("vocab_size")?;
    let alpha: f64 = c.header("alpha")?;
    let beta: f64 = c.header("beta")?;
    let seed: u64 = c.header("seed")?;
    let iterations: u32 = c.header("iterations")?;
    let fp: String = c.header("vocab_fingerprint")?;
    let fingerprint = u64::from_str_radix(&fp, 16).map_err(|_| (0, format!("bad fingerprint {fp:?}")))?;
    let d: usize = c.header("num_docs")?;
    c.section("phi")?;
    let mut phi = Vec::with_capacity(k * m);
    for _ in 0..k {
        c.row(m, &mut phi)?;
    }
    c.section("theta")?;
    let mut theta = Vec::with_capacity(d * k);
    let mut ids = Vec::with_capacity(d);
    for _ in 0..d {
        let (n, l) = c.next("theta row")?;
        let (id, rest) = l.split_once('\t').ok_or((n, "missing document id".to_string()))?;
        ids.push(id.to_string());
        c.values(n, rest, k, &mut theta)?;
    }
    TopicModel::from_parts(k, m, phi, theta, ids, alpha, beta, seed, iterations, fingerprint)
        .map_err(|e| (0, e.to_string()))
}

pub fn format_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, FormatError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (line, l) in text.lines().enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(l).map_err(|e| parse_err(path, line + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn format_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e.to_string()))
}

/// A CSV table held as strings; `None` cells are written empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(|s| Some(s.into())).collect());
    }

    pub fn push_cells(&mut self, row: Vec<Option<String>>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.as_deref().unwrap_or(""))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

/// Parses CSV text into a header and rows of strings.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), FormatError> {
    let text = read_text(path)?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(path, i + 2, e.to_string()))?;
        rows.push(rec.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

/// Fixed six-decimal rendering used in exported tables.
pub fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use moraltopics_core::lda::{train_lda, LdaConfig};
    use moraltopics_core::textprep::DocBow;

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "second");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn lexicon_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lex.txt");
        fs::write(&p, "#lexicon mini PREFIX_WILDCARD\nloyalty\tloyal* team team\nmoney\tcash money\n").unwrap();
        let lex = load_lexicon(&p, None).unwrap();
        assert_eq!(lex.name(), "mini");
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.words(0).len(), 2);
        assert!(lex.matches(0, "loyalty"));
        let exact = load_lexicon(&p, Some(MatchMode::Exact)).unwrap();
        assert!(!exact.matches(0, "loyalty"));

        fs::write(&p, "#lexicon mini FUZZY\na\tb\n").unwrap();
        assert!(load_lexicon(&p, None).is_err());
        fs::write(&p, "#lexicon mini EXACT\na\t \n").unwrap();
        assert!(load_lexicon(&p, None).is_err());
    }

    #[test]
    fn model_round_trip_is_exact() {
        let bows: Vec<DocBow> = (0..12)
            .map(|d| DocBow::from_counts(format!("d{d}"), [(d % 6, 2), ((d + 1) % 6, 1)]))
            .collect();
        let cfg = LdaConfig {
            num_topics: 3,
            iterations: 20,
            seed: 9,
            ..LdaConfig::default()
        };
        let model = train_lda(&bows, 6, &cfg).unwrap().with_vocab_fingerprint(0xabc);
        let text = format_model(&model);
        let back = parse_model(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(format_model(&back), text);
    }

    #[test]
    fn table_blank_cells() {
        let mut t = Table::new(["a", "b"]);
        t.push_cells(vec![Some("x,y".into()), None]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",\n");
    }

    #[test]
    fn name_map_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("names.tsv");
        let recs = vec![
            DecisionRecord { cluster_id: 0, name: "family".into(), decision: Decision::Unanimous },
            DecisionRecord { cluster_id: 1, name: "other".into(), decision: Decision::Other },
        ];
        write_atomic(&p, format_name_map(&recs).as_bytes()).unwrap();
        assert_eq!(read_name_map(&p).unwrap(), recs);
    }
}
