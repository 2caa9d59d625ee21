//! Threads, community verdicts and corpus-level filtering.

mod filter;
mod judgment;
mod thread;

pub use filter::{filter_threads, split_by_date, FilterRules};
pub use judgment::{extract_judgment, Judgment, ParseJudgmentError, Valence};
pub use thread::{
    reconstruct_verdict, Comment, CorpusError, FlairMap, Post, Thread, VerdictSource,
    VerdictedThread,
};
