use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::thread::VerdictedThread;

/// Thresholds a thread must meet to stay in the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterRules {
    /// Accepted title prefixes, compared case-insensitively.
    pub title_prefixes: Vec<String>,
    /// Minimum whitespace-delimited words in the raw body.
    pub min_body_words: usize,
    pub min_comments: u32,
    /// Minimum post score; the only vote signal available offline.
    pub min_score: i64,
    /// Threads without a verdict never become [`VerdictedThread`]s, so this
    /// is enforced upstream by dropping unverdicted threads.
    pub require_verdict: bool,
}

impl Default for FilterRules {
    fn default() -> Self {
        FilterRules {
            title_prefixes: vec!["AITA".to_string(), "WIBTA".to_string()],
            min_body_words: 50,
            min_comments: 10,
            min_score: 1,
            require_verdict: true,
        }
    }
}

impl FilterRules {
    pub fn title_ok(&self, title: &str) -> bool {
        let title = title.trim_start();
        self.title_prefixes.iter().any(|p| {
            title
                .get(..p.len())
                .is_some_and(|head| head.eq_ignore_ascii_case(p))
        })
    }

    pub fn passes(&self, thread: &VerdictedThread) -> bool {
        let post = thread.thread.post();
        self.title_ok(&post.title)
            && post.body.split_whitespace().count() >= self.min_body_words
            && post.comment_count >= self.min_comments
            && post.score >= self.min_score
    }
}

/// Keeps the threads passing every rule, in input order.
pub fn filter_threads(
    threads: impl IntoIterator<Item = VerdictedThread>,
    rules: &FilterRules,
) -> Vec<VerdictedThread> {
    threads.into_iter().filter(|t| rules.passes(t)).collect()
}

/// Splits at `cutoff` (Unix seconds): `created_at <= cutoff` goes to train.
pub fn split_by_date(
    threads: impl IntoIterator<Item = VerdictedThread>,
    cutoff: i64,
) -> (Vec<VerdictedThread>, Vec<VerdictedThread>) {
    threads.into_iter().partition(|t| t.created_at() <= cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Judgment, Post, Thread, Valence, VerdictSource};
    use alloc::format;

    fn vt(title: &str, words: usize, comments: u32, score: i64, created: i64) -> VerdictedThread {
        let body = vec!["word"; words].join(" ");
        let post = Post {
            id: format!("{title}-{created}"),
            title: title.to_string(),
            author_hash: String::new(),
            created_at: created,
            body,
            flair_text: None,
            score,
            comment_count: comments,
        };
        VerdictedThread {
            thread: Thread::post_only(post),
            verdict: Judgment::Nta,
            verdict_source: VerdictSource::Flair,
            valence: Valence::Na,
        }
    }

    #[test]
    fn all_rules_pass() {
        let t = vt("AITA for leaving?", 60, 12, 3, 0);
        assert!(FilterRules::default().passes(&t));
    }

    #[test]
    fn meta_posts_dropped() {
        let t = vt("META: update on rules", 60, 12, 3, 0);
        assert!(!FilterRules::default().passes(&t));
    }

    #[test]
    fn title_prefix_case_insensitive() {
        let rules = FilterRules::default();
        assert!(rules.title_ok("aita for eating cake"));
        assert!(rules.title_ok("WiBtA if I left"));
        assert!(!rules.title_ok("Am I the jerk"));
        assert!(!rules.title_ok("é"));
    }

    #[test]
    fn boundaries() {
        let rules = FilterRules::default();
        assert!(rules.passes(&vt("AITA", 50, 10, 1, 0)));
        assert!(!rules.passes(&vt("AITA", 49, 10, 1, 0)));
        assert!(!rules.passes(&vt("AITA", 50, 9, 1, 0)));
        assert!(!rules.passes(&vt("AITA", 50, 10, 0, 0)));
    }

    #[test]
    fn split_is_inclusive_at_cutoff() {
        let cutoff = 1_577_836_799; // 2019-12-31T23:59:59Z
        let a = vt("AITA a", 60, 12, 3, 1_556_668_800); // 2019-05-01
        let b = vt("AITA b", 60, 12, 3, 1_577_923_200); // 2020-01-02
        let c = vt("AITA c", 60, 12, 3, cutoff);
        let (train, test) = split_by_date(vec![a.clone(), b.clone(), c.clone()], cutoff);
        assert_eq!(train, vec![a, c]);
        assert_eq!(test, vec![b]);
        let (train, test) = split_by_date(Vec::new(), cutoff);
        assert!(train.is_empty() && test.is_empty());
    }
}
