//! Co-occurrence, coherence, clustering-agreement and distribution statistics.

mod ami;
mod ccdf;
mod coherence;
mod pmi;
mod prevalence;

pub use ami::{ami, ami_breakdown, AmiBreakdown};
pub use ccdf::{ccdf_at, pair_size_ccdf, pair_size_ccdf_from_counts, pair_size_summary, PairSizeSummary};
pub use coherence::{umass_coherence, CoherenceCounts};
pub use pmi::{pmi, pmi_matrix, PairStats, PmiMatrix};
pub use prevalence::{prevalence, Prevalence};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("input is empty")]
    Empty,
    #[error("inputs have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("topic index {index} out of range for {num_topics} topics")]
    TopicOutOfRange { index: usize, num_topics: usize },
    #[error("document's top-1 and top-2 topic are both {0}")]
    SameTopic(usize),
    #[error("pair counts sum to {pairs} but total is {total}")]
    PairsExceedTotal { pairs: u64, total: u64 },
    #[error("marginals sum to {marginals} but total is {total}")]
    MarginalMismatch { marginals: u64, total: u64 },
    #[error("coherence needs at least 2 terms, got {0}")]
    TooFewTerms(usize),
    #[error("term at position {0} has zero document frequency")]
    ZeroDocFreq(usize),
}
