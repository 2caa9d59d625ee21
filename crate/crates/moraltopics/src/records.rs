//! The verdicted-corpus file: one JSON record per thread.

use moraltopics_core::corpus::{Judgment, Post, Thread, Valence, VerdictSource, VerdictedThread};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreadRecord {
    pub post_id: String,
    pub created_utc: i64,
    pub title: String,
    pub body: String,
    pub verdict: Judgment,
    pub verdict_source: VerdictSource,
    pub valence: Valence,
    pub score: i64,
    pub comment_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flair_text: Option<String>,
    /// Full text of the comment standing for the verdict, when comments
    /// were ingested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict_text: Option<String>,
}

impl From<&VerdictedThread> for ThreadRecord {
    fn from(t: &VerdictedThread) -> Self {
        let post = t.thread.post();
        ThreadRecord {
            post_id: post.id.clone(),
            created_utc: post.created_at,
            title: post.title.clone(),
            body: post.body.clone(),
            verdict: t.verdict,
            verdict_source: t.verdict_source,
            valence: t.valence,
            score: post.score,
            comment_count: post.comment_count,
            flair_text: post.flair_text.clone(),
            verdict_text: t.verdict_comment().map(|c| c.text.clone()),
        }
    }
}

impl ThreadRecord {
    /// Rebuilds a comment-less thread; `comment_count` is kept from the
    /// record.
    pub fn to_thread(&self) -> VerdictedThread {
        let post = Post {
            id: self.post_id.clone(),
            title: self.title.clone(),
            author_hash: String::new(),
            created_at: self.created_utc,
            body: self.body.clone(),
            flair_text: self.flair_text.clone(),
            score: self.score,
            comment_count: self.comment_count,
        };
        VerdictedThread {
            thread: Thread::post_only(post),
            verdict: self.verdict,
            verdict_source: self.verdict_source,
            valence: self.valence,
        }
    }
}
