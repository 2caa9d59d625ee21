//! Collapsed Gibbs LDA, fold-in inference and held-out perplexity.
//!
//! Topics are 0-based throughout. Everything is a pure function of its
//! inputs and seed: identical calls produce bit-identical output.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::seed::{rng, sub_seed};
use crate::textprep::{DocBow, Vocabulary};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LdaError {
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("document {0} has no tokens")]
    EmptyDocument(usize),
    #[error("need at least 2 topics, got {0}")]
    TooFewTopics(usize),
    #[error("{name} must be positive and finite, got {value}")]
    InvalidHyperparameter { name: &'static str, value: f64 },
    #[error("iterations must be at least 1")]
    ZeroIterations,
    #[error("vocabulary size must be at least 1")]
    EmptyVocabulary,
    #[error("document {doc} uses term index {index} but the vocabulary has {vocab_size} terms")]
    TermOutOfRange { doc: usize, index: u32, vocab_size: usize },
    #[error("no held-out tokens to score")]
    NoHeldOutTokens,
    #[error("{what}: expected {expected} values, got {found}")]
    Shape { what: &'static str, expected: usize, found: usize },
    #[error("{what} row {row} sums to {sum}, not 1")]
    NotStochastic { what: &'static str, row: usize, sum: f64 },
    #[error("topic {topic} out of range for a {num_topics}-topic model")]
    TopicOutOfRange { topic: usize, num_topics: usize },
    #[error("no candidate K values given")]
    NoCandidates,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaConfig {
    pub num_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: u32,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            num_topics: 70,
            alpha: 0.1,
            beta: 0.01,
            iterations: 500,
            seed: 0,
        }
    }
}

impl LdaConfig {
    fn validate(&self) -> Result<(), LdaError> {
        if self.num_topics < 2 {
            return Err(LdaError::TooFewTopics(self.num_topics));
        }
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(LdaError::InvalidHyperparameter { name, value });
            }
        }
        if self.iterations == 0 {
            return Err(LdaError::ZeroIterations);
        }
        Ok(())
    }
}

/// Default number of fold-in sweeps for [`infer`] and [`heldout_perplexity`].
pub const DEFAULT_INFER_SWEEPS: u32 = 50;

/// A trained model: K topic-word rows and one topic row per training document.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    num_topics: usize,
    vocab_size: usize,
    /// Row-major K x M.
    phi: Vec<f64>,
    /// Row-major D x K.
    theta: Vec<f64>,
    doc_ids: Vec<alloc::string::String>,
    alpha: f64,
    beta: f64,
    seed: u64,
    iterations: u32,
    vocab_fingerprint: u64,
}

const STOCHASTIC_TOL: f64 = 1e-9;

impl TopicModel {
    /// Reassembles a model, checking shapes and row sums.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        num_topics: usize,
        vocab_size: usize,
        phi: Vec<f64>,
        theta: Vec<f64>,
        doc_ids: Vec<alloc::string::String>,
        alpha: f64,
        beta: f64,
        seed: u64,
        iterations: u32,
        vocab_fingerprint: u64,
    ) -> Result<Self, LdaError> {
        if num_topics < 2 {
            return Err(LdaError::TooFewTopics(num_topics));
        }
        if vocab_size == 0 {
            return Err(LdaError::EmptyVocabulary);
        }
        if phi.len() != num_topics * vocab_size {
            return Err(LdaError::Shape {
                what: "phi",
                expected: num_topics * vocab_size,
                found: phi.len(),
            });
        }
        if theta.len() != doc_ids.len() * num_topics {
            return Err(LdaError::Shape {
                what: "theta",
                expected: doc_ids.len() * num_topics,
                found: theta.len(),
            });
        }
        check_rows("phi", &phi, vocab_size)?;
        check_rows("theta", &theta, num_topics)?;
        Ok(TopicModel {
            num_topics,
            vocab_size,
            phi,
            theta,
            doc_ids,
            alpha,
            beta,
            seed,
            iterations,
            vocab_fingerprint,
        })
    }

    pub fn with_vocab_fingerprint(mut self, fingerprint: u64) -> Self {
        self.vocab_fingerprint = fingerprint;
        self
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn phi(&self, topic: usize) -> &[f64] {
        &self.phi[topic * self.vocab_size..(topic + 1) * self.vocab_size]
    }

    pub fn phi_flat(&self) -> &[f64] {
        &self.phi
    }

    pub fn theta(&self, doc: usize) -> &[f64] {
        &self.theta[doc * self.num_topics..(doc + 1) * self.num_topics]
    }

    pub fn theta_flat(&self) -> &[f64] {
        &self.theta
    }

    pub fn doc_ids(&self) -> &[alloc::string::String] {
        &self.doc_ids
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    pub fn vocab_fingerprint(&self) -> u64 {
        self.vocab_fingerprint
    }
}

fn check_rows(what: &'static str, flat: &[f64], width: usize) -> Result<(), LdaError> {
    for (row, chunk) in flat.chunks(width).enumerate() {
        let sum: f64 = chunk.iter().sum();
        if chunk.iter().any(|&x| x.is_nan() || x < 0.0) || (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(LdaError::NotStochastic { what, row, sum });
        }
    }
    Ok(())
}

fn check_bows(bows: &[DocBow], vocab_size: usize) -> Result<(), LdaError> {
    for (d, bow) in bows.iter().enumerate() {
        if bow.is_empty() {
            return Err(LdaError::EmptyDocument(d));
        }
        if let Some(index) = bow.max_index().filter(|&i| i as usize >= vocab_size) {
            return Err(LdaError::TermOutOfRange {
                doc: d,
                index,
                vocab_size,
            });
        }
    }
    Ok(())
}

/// Normalizes `v` in place so it sums to one.
fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
}

/// Draws an index from unnormalized cumulative weights.
fn draw(cumulative: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = cumulative[cumulative.len() - 1];
    let u = rng.random::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

/// Trains LDA by collapsed Gibbs sampling.
pub fn train_lda(bows: &[DocBow], vocab_size: usize, config: &LdaConfig) -> Result<TopicModel, LdaError> {
    config.validate()?;
    if bows.is_empty() {
        return Err(LdaError::EmptyCorpus);
    }
    if vocab_size == 0 {
        return Err(LdaError::EmptyVocabulary);
    }
    check_bows(bows, vocab_size)?;

    let k_topics = config.num_topics;
    let m = vocab_size;
    let (alpha, beta) = (config.alpha, config.beta);
    let m_beta = m as f64 * beta;

    let mut offsets = Vec::with_capacity(bows.len() + 1);
    offsets.push(0usize);
    let mut words: Vec<u32> = Vec::new();
    for bow in bows {
        words.extend(bow.tokens());
        offsets.push(words.len());
    }

    let mut rng = rng(config.seed);
    let mut z: Vec<u32> = Vec::with_capacity(words.len());
    let mut n_dk = vec![0u32; bows.len() * k_topics];
    // Word-major so one token's K counts are contiguous.
    let mut n_wk = vec![0u32; m * k_topics];
    let mut n_k = vec![0u32; k_topics];
    for d in 0..bows.len() {
        for &w in &words[offsets[d]..offsets[d + 1]] {
            let k = rng.random_range(0..k_topics);
            z.push(k as u32);
            n_dk[d * k_topics + k] += 1;
            n_wk[w as usize * k_topics + k] += 1;
            n_k[k] += 1;
        }
    }

    let mut cumulative = vec![0.0f64; k_topics];
    for _ in 0..config.iterations {
        for d in 0..bows.len() {
            let doc = &mut n_dk[d * k_topics..(d + 1) * k_topics];
            for t in offsets[d]..offsets[d + 1] {
                let w = words[t] as usize;
                let wk = &mut n_wk[w * k_topics..(w + 1) * k_topics];
                let old = z[t] as usize;
                doc[old] -= 1;
                wk[old] -= 1;
                n_k[old] -= 1;

                let mut acc = 0.0;
                for k in 0..k_topics {
                    acc += (f64::from(doc[k]) + alpha) * (f64::from(wk[k]) + beta)
                        / (f64::from(n_k[k]) + m_beta);
                    cumulative[k] = acc;
                }
                let new = draw(&cumulative, &mut rng);

                z[t] = new as u32;
                doc[new] += 1;
                wk[new] += 1;
                n_k[new] += 1;
            }
        }
    }

    let mut phi = vec![0.0f64; k_topics * m];
    for k in 0..k_topics {
        let row = &mut phi[k * m..(k + 1) * m];
        for (w, x) in row.iter_mut().enumerate() {
            *x = f64::from(n_wk[w * k_topics + k]) + beta;
        }
        normalize(row);
    }
    let mut theta: Vec<f64> = n_dk.iter().map(|&n| f64::from(n) + alpha).collect();
    for row in theta.chunks_mut(k_topics) {
        normalize(row);
    }

    Ok(TopicModel {
        num_topics: k_topics,
        vocab_size: m,
        phi,
        theta,
        doc_ids: bows.iter().map(|b| b.doc_id.clone()).collect(),
        alpha,
        beta,
        seed: config.seed,
        iterations: config.iterations,
        vocab_fingerprint: 0,
    })
}

/// Fold-in Gibbs over `words` with phi fixed. The estimate averages the
/// smoothed topic counts over the second half of the sweeps.
fn fold_in(model: &TopicModel, words: &[u32], sweeps: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k_topics = model.num_topics;
    let alpha = model.alpha;
    let mut n_k = vec![0u32; k_topics];
    let mut z: Vec<u32> = words
        .iter()
        .map(|_| {
            let k = rng.random_range(0..k_topics);
            n_k[k] += 1;
            k as u32
        })
        .collect();

    let sweeps = sweeps.max(1);
    let burn_in = sweeps / 2;
    let mut acc_theta = vec![0.0f64; k_topics];
    let mut cumulative = vec![0.0f64; k_topics];
    for sweep in 0..sweeps {
        for (t, &w) in words.iter().enumerate() {
            let old = z[t] as usize;
            n_k[old] -= 1;
            let mut acc = 0.0;
            for k in 0..k_topics {
                acc += (f64::from(n_k[k]) + alpha) * model.phi[k * model.vocab_size + w as usize];
                cumulative[k] = acc;
            }
            let new = draw(&cumulative, rng);
            z[t] = new as u32;
            n_k[new] += 1;
        }
        if sweep >= burn_in {
            for k in 0..k_topics {
                acc_theta[k] += f64::from(n_k[k]) + alpha;
            }
        }
    }
    normalize(&mut acc_theta);
    acc_theta
}

/// Topic posterior of an unseen document.
pub fn infer(model: &TopicModel, bow: &DocBow, sweeps: u32, seed: u64) -> Result<Vec<f64>, LdaError> {
    check_bows(core::slice::from_ref(bow), model.vocab_size).map_err(|e| match e {
        LdaError::EmptyDocument(_) => LdaError::EmptyDocument(0),
        other => other,
    })?;
    let words: Vec<u32> = bow.tokens().collect();
    Ok(fold_in(model, &words, sweeps, &mut rng(seed)))
}

/// Document-completion perplexity: each document's tokens are shuffled with
/// a per-document seed, even positions estimate theta, odd positions are
/// scored.
pub fn heldout_perplexity(model: &TopicModel, bows: &[DocBow], sweeps: u32, seed: u64) -> Result<f64, LdaError> {
    if bows.is_empty() {
        return Err(LdaError::EmptyCorpus);
    }
    check_bows(bows, model.vocab_size)?;
    let mut log_lik = 0.0;
    let mut held_out = 0u64;
    for (d, bow) in bows.iter().enumerate() {
        let mut rng = rng(sub_seed(seed, d as u64));
        let mut tokens: Vec<u32> = bow.tokens().collect();
        tokens.shuffle(&mut rng);
        let observed: Vec<u32> = tokens.iter().step_by(2).copied().collect();
        let scored: Vec<u32> = tokens.iter().skip(1).step_by(2).copied().collect();
        if scored.is_empty() {
            continue;
        }
        let theta = fold_in(model, &observed, sweeps, &mut rng);
        for &w in &scored {
            let p: f64 = (0..model.num_topics)
                .map(|k| theta[k] * model.phi[k * model.vocab_size + w as usize])
                .sum();
            log_lik += libm::log(p);
        }
        held_out += scored.len() as u64;
    }
    if held_out == 0 {
        return Err(LdaError::NoHeldOutTokens);
    }
    Ok(libm::exp(-log_lik / held_out as f64))
}

/// Perplexity per candidate K plus the minimizing K.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<(usize, f64)>,
    pub best_k: usize,
}

/// Trains one model per candidate K, each with a seed derived from the base
/// seed and the candidate's position, and scores it on `validation`.
pub fn k_sweep(
    train: &[DocBow],
    validation: &[DocBow],
    vocab_size: usize,
    ks: &[usize],
    base: &LdaConfig,
    infer_sweeps: u32,
) -> Result<SweepResult, LdaError> {
    if ks.is_empty() {
        return Err(LdaError::NoCandidates);
    }
    let mut rows = Vec::with_capacity(ks.len());
    for (i, &k) in ks.iter().enumerate() {
        let seed = sub_seed(base.seed, i as u64);
        let config = LdaConfig {
            num_topics: k,
            seed,
            ..*base
        };
        let model = train_lda(train, vocab_size, &config)?;
        let perplexity = heldout_perplexity(&model, validation, infer_sweeps, sub_seed(seed, u64::MAX))?;
        rows.push((k, perplexity));
    }
    let best_k = rows
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(k, _)| k)
        .unwrap_or(ks[0]);
    Ok(SweepResult { rows, best_k })
}

/// Seeded random split; both halves keep input order.
pub fn split_train_validation<T>(items: Vec<T>, train_fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    let n = items.len();
    let n_train = libm::round(n as f64 * train_fraction.clamp(0.0, 1.0)) as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(seed));
    let mut in_train = vec![false; n];
    for &i in &order[..n_train] {
        in_train[i] = true;
    }
    let mut train = Vec::with_capacity(n_train);
    let mut validation = Vec::with_capacity(n - n_train);
    for (item, keep) in items.into_iter().zip(in_train) {
        if keep {
            train.push(item);
        } else {
            validation.push(item);
        }
    }
    (train, validation)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate() {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Training documents per topic under top-1 assignment.
pub fn cluster_sizes(model: &TopicModel) -> Vec<usize> {
    let mut sizes = vec![0usize; model.num_topics];
    for row in model.theta.chunks(model.num_topics) {
        sizes[argmax(row)] += 1;
    }
    sizes
}

/// Term indices of topic `topic` by descending probability; ties keep
/// vocabulary order.
pub fn top_word_indices(model: &TopicModel, topic: usize, n: usize) -> Result<Vec<usize>, LdaError> {
    if topic >= model.num_topics {
        return Err(LdaError::TopicOutOfRange {
            topic,
            num_topics: model.num_topics,
        });
    }
    let row = model.phi(topic);
    let mut idx: Vec<usize> = (0..model.vocab_size).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
    idx.truncate(n);
    Ok(idx)
}

pub fn top_words<'v>(
    model: &TopicModel,
    vocab: &'v Vocabulary,
    topic: usize,
    n: usize,
) -> Result<Vec<&'v str>, LdaError> {
    if vocab.len() != model.vocab_size {
        return Err(LdaError::Shape {
            what: "vocabulary",
            expected: model.vocab_size,
            found: vocab.len(),
        });
    }
    Ok(top_word_indices(model, topic, n)?
        .into_iter()
        .map(|i| vocab.term(i))
        .collect())
}
