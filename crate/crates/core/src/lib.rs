//! Algorithms for mapping online moral-dilemma threads onto named topics.
//!
//! The crate is `no_std` and needs only `alloc`. Everything here is a pure
//! function of its inputs and an explicit seed; file formats, archive
//! ingestion, the survey HTTP service and the command-line driver live in the
//! `moraltopics` crate.
//!
//! Pipeline order, roughly:
//!
//! 1. [`corpus`]: threads, verdict reconstruction, filtering, date splits.
//! 2. [`textprep`]: tokenize, lemmatize, vocabulary, bag-of-words.
//! 3. [`lda`]: collapsed Gibbs LDA, fold-in inference, held-out perplexity.
//! 4. [`naming`]: naming-survey bank, name maps, merged topics, topic pairs.
//! 5. [`metrics`]: PMI, UMass coherence, AMI, prevalence, pair-size CCDF.
//! 6. [`lexicon`]: category fractions and moral-foundation presence.
//! 7. [`survey`]: validation banks, response checks, agreement rates.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod lda;
pub mod lexicon;
pub mod metrics;
pub mod naming;
pub mod seed;
pub mod survey;
pub mod textprep;

pub use corpus::{Judgment, Valence};
pub use naming::TopicPair;
