//! Line-delimited post and comment archives.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use moraltopics_core::corpus::{Comment, Post};
use moraltopics_core::seed::fnv1a64;
use serde::{Deserialize, Deserializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Posts,
    Comments,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Post(Post),
    Comment(Comment),
}

/// A line that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skip {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
#[error("cannot read archive {path}: {source}")]
pub struct ArchiveError {
    pub path: String,
    #[source]
    pub source: io::Error,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Timestamp {
    Int(i64),
    Float(f64),
    Text(String),
}

fn unix_seconds<'de, D: Deserializer<'de>>(d: D) -> Result<i64, D::Error> {
    match Timestamp::deserialize(d)? {
        Timestamp::Int(v) => Ok(v),
        Timestamp::Float(v) if v.is_finite() => Ok(v.floor() as i64),
        Timestamp::Text(s) => {
            let s = s.trim();
            s.parse::<i64>()
                .or_else(|_| s.parse::<f64>().map(|v| v.floor() as i64))
                .map_err(|_| serde::de::Error::custom(format!("bad timestamp {s:?}")))
        }
        Timestamp::Float(_) => Err(serde::de::Error::custom("non-finite timestamp")),
    }
}

#[derive(Deserialize)]
struct RawPost {
    id: String,
    title: String,
    author: String,
    #[serde(deserialize_with = "unix_seconds")]
    created_utc: i64,
    selftext: String,
    #[serde(default)]
    link_flair_text: Option<String>,
    score: i64,
    num_comments: u32,
}

#[derive(Deserialize)]
struct RawComment {
    id: String,
    parent_id: String,
    link_id: String,
    author: String,
    #[serde(deserialize_with = "unix_seconds")]
    created_utc: i64,
    score: i64,
    body: String,
}

/// Opaque author identifier; the raw name is never stored.
pub fn author_hash(author: &str) -> String {
    format!("{:016x}", fnv1a64(author.as_bytes()))
}

/// Removes a `t1_`/`t3_` style kind prefix from a fullname.
pub fn strip_kind(id: &str) -> &str {
    match id.as_bytes() {
        [b't', d, b'_', ..] if d.is_ascii_digit() => &id[3..],
        _ => id,
    }
}

fn parse_line(line: &str, format: RecordFormat) -> Result<Record, String> {
    match format {
        RecordFormat::Posts => {
            let raw: RawPost = serde_json::from_str(line).map_err(|e| e.to_string())?;
            Ok(Record::Post(Post {
                id: strip_kind(&raw.id).to_string(),
                title: raw.title,
                author_hash: author_hash(&raw.author),
                created_at: raw.created_utc,
                body: raw.selftext,
                flair_text: raw.link_flair_text.filter(|f| !f.trim().is_empty()),
                score: raw.score,
                comment_count: raw.num_comments,
            }))
        }
        RecordFormat::Comments => {
            let raw: RawComment = serde_json::from_str(line).map_err(|e| e.to_string())?;
            let mut c = Comment::new(
                strip_kind(&raw.id),
                strip_kind(&raw.parent_id),
                strip_kind(&raw.link_id),
                raw.created_utc,
                raw.score,
                raw.body,
            );
            c.author_hash = author_hash(&raw.author);
            Ok(Record::Comment(c))
        }
    }
}

/// Streams records in file order. Blank lines are ignored; malformed lines
/// come out as `Err(Skip)`. IO failures mid-stream end the stream with an
/// `Err(Skip)` naming the error.
pub fn parse_reader<R: BufRead>(
    reader: R,
    format: RecordFormat,
) -> impl Iterator<Item = Result<Record, Skip>> {
    let mut failed = false;
    reader
        .lines()
        .enumerate()
        .map_while(move |(i, line)| {
            if failed {
                return None;
            }
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    failed = true;
                    return Some(Some(Err(Skip {
                        line: i + 1,
                        reason: format!("read error: {e}"),
                    })));
                }
            };
            if line.trim().is_empty() {
                return Some(None);
            }
            Some(Some(parse_line(&line, format).map_err(|reason| Skip {
                line: i + 1,
                reason,
            })))
        })
        .flatten()
}

pub fn parse_archive(
    path: &Path,
    format: RecordFormat,
) -> Result<impl Iterator<Item = Result<Record, Skip>>, ArchiveError> {
    let file = File::open(path).map_err(|source| ArchiveError {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_reader(BufReader::new(file), format))
}

#[derive(Debug)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub skips: Vec<Skip>,
}

impl<T> Default for Loaded<T> {
    fn default() -> Self {
        Loaded {
            records: Vec::new(),
            skips: Vec::new(),
        }
    }
}

pub fn read_posts(path: &Path) -> Result<Loaded<Post>, ArchiveError> {
    let mut out = Loaded::default();
    for r in parse_archive(path, RecordFormat::Posts)? {
        match r {
            Ok(Record::Post(p)) => out.records.push(p),
            Ok(Record::Comment(_)) => unreachable!(),
            Err(s) => out.skips.push(s),
        }
    }
    Ok(out)
}

pub fn read_comments(path: &Path) -> Result<Loaded<Comment>, ArchiveError> {
    let mut out = Loaded::default();
    for r in parse_archive(path, RecordFormat::Comments)? {
        match r {
            Ok(Record::Comment(c)) => out.records.push(c),
            Ok(Record::Post(_)) => unreachable!(),
            Err(s) => out.skips.push(s),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post_line(id: &str) -> String {
        format!(
            r#"{{"id":"{id}","title":"AITA for x","author":"a","created_utc":1500000000,"selftext":"body","link_flair_text":"Asshole","score":3,"num_comments":2}}"#
        )
    }

    fn collect(text: &str, format: RecordFormat) -> (Vec<Record>, Vec<Skip>) {
        let mut ok = Vec::new();
        let mut bad = Vec::new();
        for r in parse_reader(text.as_bytes(), format) {
            match r {
                Ok(v) => ok.push(v),
                Err(s) => bad.push(s),
            }
        }
        (ok, bad)
    }

    #[test]
    fn three_valid_posts() {
        let text = [post_line("a"), post_line("b"), post_line("c")].join("\n");
        let (ok, bad) = collect(&text, RecordFormat::Posts);
        assert_eq!(ok.len(), 3);
        assert!(bad.is_empty());
        let Record::Post(p) = &ok[1] else { panic!() };
        assert_eq!(p.id, "b");
        assert_eq!(p.flair_text.as_deref(), Some("Asshole"));
        assert_ne!(p.author_hash, "a");
    }

    #[test]
    fn truncated_line_is_skipped() {
        let mut lines: Vec<String> = (0..5).map(|i| post_line(&format!("p{i}"))).collect();
        lines[2].truncate(40);
        let (ok, bad) = collect(&lines.join("\n"), RecordFormat::Posts);
        assert_eq!(ok.len(), 4);
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].line, 3);
    }

    #[test]
    fn empty_input() {
        let (ok, bad) = collect("", RecordFormat::Posts);
        assert!(ok.is_empty() && bad.is_empty());
    }

    #[test]
    fn missing_field_skips() {
        let (ok, bad) = collect(r#"{"id":"x","title":"t"}"#, RecordFormat::Posts);
        assert!(ok.is_empty());
        assert!(bad[0].reason.contains("missing field"), "{}", bad[0].reason);
    }

    #[test]
    fn comment_ids_and_timestamps() {
        let text = r#"{"id":"c1","parent_id":"t3_p1","link_id":"t3_p1","author":"u","created_utc":"1500000000","score":-2,"body":"NTA obviously"}
{"id":"t1_c2","parent_id":"t1_c1","link_id":"t3_p1","author":"u","created_utc":1500000001.7,"score":1,"body":"agree"}"#;
        let (ok, bad) = collect(text, RecordFormat::Comments);
        assert!(bad.is_empty(), "{bad:?}");
        let Record::Comment(a) = &ok[0] else { panic!() };
        let Record::Comment(b) = &ok[1] else { panic!() };
        assert_eq!((a.parent_id.as_str(), a.post_id.as_str()), ("p1", "p1"));
        assert_eq!(a.created_at, 1_500_000_000);
        assert_eq!(a.judgment, Some(moraltopics_core::Judgment::Nta));
        assert_eq!((b.id.as_str(), b.parent_id.as_str()), ("c2", "c1"));
        assert_eq!(b.created_at, 1_500_000_001);
    }

    #[test]
    fn unreadable_file_is_fatal() {
        assert!(parse_archive(Path::new("/nonexistent/x.jsonl"), RecordFormat::Posts).is_err());
    }
}
