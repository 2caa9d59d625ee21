//! Synthetic corpora with known generative topics, for recovery checks and
//! demos.

use moraltopics_core::textprep::DocBow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub num_topics: usize,
    pub num_docs: usize,
    pub doc_len: usize,
    pub vocab_size: usize,
    /// Symmetric Dirichlet concentration of each topic's word distribution.
    pub topic_concentration: f64,
    /// Symmetric Dirichlet concentration of each document's topic mix.
    pub doc_concentration: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_topics: 5,
            num_docs: 2000,
            doc_len: 100,
            vocab_size: 500,
            topic_concentration: 0.05,
            doc_concentration: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub bows: Vec<DocBow>,
}

fn dirichlet(rng: &mut ChaCha8Rng, dim: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
        let s: f64 = v.iter().sum();
        // Tiny concentrations can underflow every draw to zero.
        if s > 0.0 && s.is_finite() {
            v.iter_mut().for_each(|x| *x /= s);
            return v;
        }
    }
}

fn categorical(rng: &mut ChaCha8Rng, p: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let phi: Vec<Vec<f64>> = (0..config.num_topics)
        .map(|_| dirichlet(&mut rng, config.vocab_size, config.topic_concentration))
        .collect();
    let mut theta = Vec::with_capacity(config.num_docs);
    let mut bows = Vec::with_capacity(config.num_docs);
    for d in 0..config.num_docs {
        let t = dirichlet(&mut rng, config.num_topics, config.doc_concentration);
        let words = (0..config.doc_len).map(|_| {
            let k = categorical(&mut rng, &t);
            (categorical(&mut rng, &phi[k]) as u32, 1)
        });
        bows.push(DocBow::from_counts(format!("synth{d:05}"), words.collect::<Vec<_>>()));
        theta.push(t);
    }
    SynthCorpus { phi, theta, bows }
}

/// Total-variation distance between two distributions.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Greedy one-to-one matching of learned rows to true rows by smallest TV
/// distance; returns the mean matched distance.
pub fn matched_tv(truth: &[Vec<f64>], learned: &[&[f64]]) -> f64 {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, t) in truth.iter().enumerate() {
        for (j, l) in learned.iter().enumerate() {
            pairs.push((total_variation(t, l), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_t = vec![false; truth.len()];
    let mut used_l = vec![false; learned.len()];
    let mut sum = 0.0;
    let mut n = 0;
    for (d, i, j) in pairs {
        if !used_t[i] && !used_l[j] {
            used_t[i] = true;
            used_l[j] = true;
            sum += d;
            n += 1;
        }
    }
    sum / n as f64
}
