use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::judgment::{extract_judgment, Judgment, Valence};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("comment id {0:?} appears more than once in thread")]
    DuplicateComment(String),
    #[error("comment {comment:?} has parent {parent:?} which is not in the thread")]
    DanglingParent { comment: String, parent: String },
    #[error("comment {0:?} is part of a reply cycle")]
    Cycle(String),
    #[error("comment {comment:?} belongs to post {found:?}, not {expected:?}")]
    WrongPost {
        comment: String,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub title: String,
    pub author_hash: String,
    pub created_at: i64,
    pub body: String,
    pub flair_text: Option<String>,
    pub score: i64,
    pub comment_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub parent_id: String,
    pub post_id: String,
    pub author_hash: String,
    pub created_at: i64,
    pub score: i64,
    pub text: String,
    /// Cached [`extract_judgment`] of `text`.
    pub judgment: Option<Judgment>,
}

impl Comment {
    /// A comment with its judgment extracted from `text`; author left empty.
    pub fn new(
        id: impl Into<String>,
        parent_id: impl Into<String>,
        post_id: impl Into<String>,
        created_at: i64,
        score: i64,
        text: impl Into<String>,
    ) -> Self {
        let text = text.into();
        Comment {
            id: id.into(),
            parent_id: parent_id.into(),
            post_id: post_id.into(),
            author_hash: String::new(),
            created_at,
            score,
            judgment: extract_judgment(&text),
            text,
        }
    }
}

/// A post and the forest of comments beneath it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thread {
    post: Post,
    comments: Vec<Comment>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Reach {
    Unknown,
    Visiting,
    Rooted,
    Broken,
}

impl Thread {
    /// Builds a thread, rejecting comments that do not form a forest rooted
    /// at the post. `comment_count` is set to the number of comments.
    pub fn new(mut post: Post, comments: Vec<Comment>) -> Result<Thread, CorpusError> {
        let mut seen = BTreeSet::new();
        for c in &comments {
            if c.post_id != post.id {
                return Err(CorpusError::WrongPost {
                    comment: c.id.clone(),
                    expected: post.id.clone(),
                    found: c.post_id.clone(),
                });
            }
            if !seen.insert(c.id.as_str()) {
                return Err(CorpusError::DuplicateComment(c.id.clone()));
            }
        }
        let reach = rooted(&post.id, &comments);
        for (c, r) in comments.iter().zip(&reach) {
            if *r != Reach::Rooted {
                let parent_known =
                    c.parent_id == post.id || seen.contains(c.parent_id.as_str());
                return Err(if parent_known {
                    CorpusError::Cycle(c.id.clone())
                } else {
                    CorpusError::DanglingParent {
                        comment: c.id.clone(),
                        parent: c.parent_id.clone(),
                    }
                });
            }
        }
        post.comment_count = comments.len() as u32;
        Ok(Thread { post, comments })
    }

    /// Lenient construction for raw archives: comments for other posts,
    /// repeated ids, orphans and cycles are dropped. Returns the thread and
    /// the number of dropped comments.
    pub fn assemble(mut post: Post, comments: Vec<Comment>) -> (Thread, usize) {
        let offered = comments.len();
        let mut seen = BTreeSet::new();
        let mut kept: Vec<Comment> = comments
            .into_iter()
            .filter(|c| c.post_id == post.id && seen.insert(c.id.clone()))
            .collect();
        let reach = rooted(&post.id, &kept);
        let mut flags = reach.into_iter();
        kept.retain(|_| flags.next() == Some(Reach::Rooted));
        post.comment_count = kept.len() as u32;
        let dropped = offered - kept.len();
        (
            Thread {
                post,
                comments: kept,
            },
            dropped,
        )
    }

    /// A thread ingested without comment records. The post's declared
    /// `comment_count` is kept as is.
    pub fn post_only(post: Post) -> Thread {
        Thread {
            post,
            comments: Vec::new(),
        }
    }

    pub fn post(&self) -> &Post {
        &self.post
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn into_parts(self) -> (Post, Vec<Comment>) {
        (self.post, self.comments)
    }
}

/// For each comment, whether following parent links reaches the post.
fn rooted(post_id: &str, comments: &[Comment]) -> Vec<Reach> {
    let index: BTreeMap<&str, usize> = comments
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.as_str(), i))
        .collect();
    let mut state = alloc::vec![Reach::Unknown; comments.len()];
    let mut path = Vec::new();
    for start in 0..comments.len() {
        let mut cur = start;
        let outcome = loop {
            match state[cur] {
                Reach::Rooted => break Reach::Rooted,
                Reach::Broken | Reach::Visiting => break Reach::Broken,
                Reach::Unknown => {}
            }
            state[cur] = Reach::Visiting;
            path.push(cur);
            let parent = comments[cur].parent_id.as_str();
            if parent == post_id {
                break Reach::Rooted;
            }
            match index.get(parent) {
                Some(&p) => cur = p,
                None => break Reach::Broken,
            }
        };
        for i in path.drain(..) {
            state[i] = outcome;
        }
    }
    state
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictSource {
    Flair,
    TopComment,
}

impl VerdictSource {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictSource::Flair => "FLAIR",
            VerdictSource::TopComment => "TOP_COMMENT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictedThread {
    pub thread: Thread,
    pub verdict: Judgment,
    pub verdict_source: VerdictSource,
    pub valence: Valence,
}

impl VerdictedThread {
    pub fn created_at(&self) -> i64 {
        self.thread.post.created_at
    }

    /// The comment whose text stands for the verdict: the top-ranked tagged
    /// comment carrying the verdict's judgment, or failing that the
    /// top-ranked tagged comment of any judgment.
    pub fn verdict_comment(&self) -> Option<&Comment> {
        let comments = self.thread.comments();
        top_tagged(comments.iter().filter(|c| c.judgment == Some(self.verdict)))
            .or_else(|| top_tagged(comments.iter()))
    }
}

/// Flair text to judgment lookup. Keys are compared trimmed and
/// case-insensitively.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlairMap {
    entries: BTreeMap<String, Judgment>,
}

impl FlairMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, flair: &str, judgment: Judgment) {
        self.entries.insert(normalize_flair(flair), judgment);
    }

    pub fn get(&self, flair: &str) -> Option<Judgment> {
        self.entries.get(&normalize_flair(flair)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<'a> FromIterator<(&'a str, Judgment)> for FlairMap {
    fn from_iter<I: IntoIterator<Item = (&'a str, Judgment)>>(iter: I) -> Self {
        let mut map = FlairMap::new();
        for (flair, j) in iter {
            map.insert(flair, j);
        }
        map
    }
}

fn normalize_flair(flair: &str) -> String {
    flair.trim().to_lowercase()
}

/// Highest score first, then earliest timestamp, then smallest id.
fn rank(a: &Comment, b: &Comment) -> Ordering {
    b.score
        .cmp(&a.score)
        .then(a.created_at.cmp(&b.created_at))
        .then_with(|| a.id.cmp(&b.id))
}

fn top_tagged<'a>(comments: impl Iterator<Item = &'a Comment>) -> Option<&'a Comment> {
    comments
        .filter(|c| c.judgment.is_some())
        .min_by(|a, b| rank(a, b))
}

/// Assigns the thread's community verdict.
///
/// A flair that maps to a judgment wins. Otherwise the highest-scoring
/// comment carrying a judgment tag decides (ties: earliest, then smallest
/// id). Threads with neither get no verdict.
pub fn reconstruct_verdict(thread: Thread, flair_map: &FlairMap) -> Option<VerdictedThread> {
    let from_flair = thread
        .post
        .flair_text
        .as_deref()
        .and_then(|f| flair_map.get(f));
    let (verdict, verdict_source) = match from_flair {
        Some(j) => (j, VerdictSource::Flair),
        None => (
            top_tagged(thread.comments.iter())?.judgment?,
            VerdictSource::TopComment,
        ),
    };
    Some(VerdictedThread {
        thread,
        verdict,
        verdict_source,
        valence: verdict.valence(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn post(id: &str, flair: Option<&str>) -> Post {
        Post {
            id: id.to_string(),
            title: "AITA for testing?".to_string(),
            author_hash: "h0".to_string(),
            created_at: 1_500_000_000,
            body: String::new(),
            flair_text: flair.map(str::to_string),
            score: 5,
            comment_count: 0,
        }
    }

    fn flairs() -> FlairMap {
        [
            ("Not the A-hole", Judgment::Nta),
            ("Asshole", Judgment::Yta),
            ("Everyone Sucks", Judgment::Esh),
            ("No A-holes here", Judgment::Nah),
            ("Not enough info", Judgment::Info),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn flair_verdict() {
        let t = Thread::new(post("p", Some("Not the A-hole")), vec![]).unwrap();
        let v = reconstruct_verdict(t, &flairs()).unwrap();
        assert_eq!(v.verdict, Judgment::Nta);
        assert_eq!(v.verdict_source, VerdictSource::Flair);
        assert_eq!(v.valence, Valence::Na);
    }

    #[test]
    fn top_comment_verdict() {
        let t = Thread::new(
            post("p", None),
            vec![
                Comment::new("a", "p", "p", 10, 7, "NTA"),
                Comment::new("b", "p", "p", 11, 12, "YTA clearly"),
            ],
        )
        .unwrap();
        let v = reconstruct_verdict(t, &flairs()).unwrap();
        assert_eq!(v.verdict, Judgment::Yta);
        assert_eq!(v.verdict_source, VerdictSource::TopComment);
        assert_eq!(v.valence, Valence::Ya);
        assert_eq!(v.verdict_comment().unwrap().id, "b");
    }

    #[test]
    fn unmappable_flair_falls_back_to_comments() {
        let t = Thread::new(
            post("p", Some("META")),
            vec![Comment::new("a", "p", "p", 10, 3, "ESH honestly")],
        )
        .unwrap();
        let v = reconstruct_verdict(t, &flairs()).unwrap();
        assert_eq!(v.verdict, Judgment::Esh);
        assert_eq!(v.verdict_source, VerdictSource::TopComment);
    }

    #[test]
    fn no_flair_no_tags() {
        let t = Thread::new(
            post("p", None),
            vec![Comment::new("a", "p", "p", 10, 50, "wow what a story")],
        )
        .unwrap();
        assert!(reconstruct_verdict(t, &flairs()).is_none());
    }

    #[test]
    fn score_ties_break_on_time_then_id() {
        let t = Thread::new(
            post("p", None),
            vec![
                Comment::new("z", "p", "p", 20, 9, "YTA"),
                Comment::new("y", "p", "p", 10, 9, "NTA"),
                Comment::new("x", "p", "p", 10, 9, "NAH"),
                Comment::new("w", "x", "p", 5, 100, "no tag here"),
            ],
        )
        .unwrap();
        let v = reconstruct_verdict(t, &flairs()).unwrap();
        assert_eq!(v.verdict, Judgment::Nah);
    }

    #[test]
    fn flair_verdict_comment_prefers_matching_judgment() {
        let t = Thread::new(
            post("p", Some("Asshole")),
            vec![
                Comment::new("a", "p", "p", 1, 40, "NTA"),
                Comment::new("b", "p", "p", 2, 30, "YTA, obviously"),
            ],
        )
        .unwrap();
        let v = reconstruct_verdict(t, &flairs()).unwrap();
        assert_eq!(v.verdict_comment().unwrap().id, "b");
    }

    #[test]
    fn forest_validation() {
        let dangling = Thread::new(
            post("p", None),
            vec![Comment::new("a", "missing", "p", 0, 0, "")],
        );
        assert!(matches!(dangling, Err(CorpusError::DanglingParent { .. })));

        let cycle = Thread::new(
            post("p", None),
            vec![
                Comment::new("a", "b", "p", 0, 0, ""),
                Comment::new("b", "a", "p", 0, 0, ""),
            ],
        );
        assert!(matches!(cycle, Err(CorpusError::Cycle(_))));

        let dup = Thread::new(
            post("p", None),
            vec![
                Comment::new("a", "p", "p", 0, 0, ""),
                Comment::new("a", "p", "p", 0, 0, ""),
            ],
        );
        assert!(matches!(dup, Err(CorpusError::DuplicateComment(_))));

        let nested = Thread::new(
            post("p", None),
            vec![
                Comment::new("c", "b", "p", 0, 0, ""),
                Comment::new("b", "a", "p", 0, 0, ""),
                Comment::new("a", "p", "p", 0, 0, ""),
            ],
        )
        .unwrap();
        assert_eq!(nested.post().comment_count, 3);
    }

    #[test]
    fn assemble_drops_broken_comments() {
        let (t, dropped) = Thread::assemble(
            post("p", None),
            vec![
                Comment::new("a", "p", "p", 0, 0, ""),
                Comment::new("b", "a", "p", 0, 0, ""),
                Comment::new("c", "gone", "p", 0, 0, ""),
                Comment::new("d", "c", "p", 0, 0, ""),
                Comment::new("e", "f", "p", 0, 0, ""),
                Comment::new("f", "e", "p", 0, 0, ""),
                Comment::new("a", "p", "p", 0, 0, "dup"),
                Comment::new("g", "p", "other", 0, 0, ""),
            ],
        );
        assert_eq!(dropped, 6);
        assert_eq!(t.post().comment_count, 2);
        let ids: Vec<_> = t.comments().iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
    }
}
