//! Brute-force reference implementations, written from the definitions and
//! sharing no code with the crates under test.

#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

/// PMI between topics `i` and `j` by rescanning the assignments.
pub fn pmi(num_topics: usize, assignments: &[(usize, usize)]) -> Vec<Vec<Option<f64>>> {
    let n = assignments.len() as f64;
    let top1 = |t: usize| assignments.iter().filter(|a| a.0 == t).count() as f64;
    let mut out = vec![vec![None; num_topics]; num_topics];
    for i in 0..num_topics {
        for j in 0..num_topics {
            if i == j {
                continue;
            }
            let joint = assignments
                .iter()
                .filter(|&&(a, b)| (a == i && b == j) || (a == j && b == i))
                .count() as f64;
            let (mi, mj) = (top1(i), top1(j));
            if joint > 0.0 && mi > 0.0 && mj > 0.0 {
                out[i][j] = Some(joint.log2() + n.log2() - mi.log2() - mj.log2());
            }
        }
    }
    out
}

pub fn umass(top: &[u32], docs: &[Vec<u32>]) -> f64 {
    let df = |w: u32| docs.iter().filter(|d| d.contains(&w)).count() as f64;
    let co = |a: u32, b: u32| docs.iter().filter(|d| d.contains(&a) && d.contains(&b)).count() as f64;
    let mut total = 0.0;
    let mut pairs = 0.0;
    for m in 1..top.len() {
        for l in 0..m {
            total += ((co(top[m], top[l]) + 1.0) / df(top[m])).ln();
            pairs += 1.0;
        }
    }
    total / pairs
}

fn mutual_info(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let la: BTreeSet<usize> = a.iter().copied().collect();
    let lb: BTreeSet<usize> = b.iter().copied().collect();
    let mut mi = 0.0;
    for &x in &la {
        let nx = a.iter().filter(|&&v| v == x).count() as f64;
        for &y in &lb {
            let ny = b.iter().filter(|&&v| v == y).count() as f64;
            let nxy = a.iter().zip(b).filter(|&(&p, &q)| p == x && q == y).count() as f64;
            if nxy > 0.0 {
                mi += nxy / n * (n * nxy / (nx * ny)).ln();
            }
        }
    }
    mi
}

fn entropy(a: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for &x in a {
        *counts.entry(x).or_default() += 1.0;
    }
    counts.values().map(|&c| -(c / n) * (c / n).ln()).sum()
}

fn adjusted(a: &[usize], b: &[usize], emi: f64) -> f64 {
    (mutual_info(a, b) - emi) / (0.5 * (entropy(a) + entropy(b)) - emi)
}

/// AMI with the expectation taken over every permutation of `b`
/// (Heap's algorithm). Feasible for n <= 8.
pub fn ami_by_permutation(a: &[usize], b: &[usize]) -> f64 {
    let n = b.len();
    let mut perm = b.to_vec();
    let mut c = vec![0usize; n];
    let mut sum = mutual_info(a, &perm);
    let mut count = 1.0;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sum += mutual_info(a, &perm);
            count += 1.0;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    adjusted(a, b, sum / count)
}

/// AMI with the expectation summed over hypergeometric cell counts, the pmf
/// taken from `statrs`.
pub fn ami_by_hypergeometric(a: &[usize], b: &[usize]) -> f64 {
    use statrs::distribution::{Discrete, Hypergeometric};
    let n = a.len() as u64;
    let sizes = |v: &[usize]| {
        let mut m: BTreeMap<usize, u64> = BTreeMap::new();
        for &x in v {
            *m.entry(x).or_default() += 1;
        }
        m.into_values().collect::<Vec<u64>>()
    };
    let nf = n as f64;
    let mut emi = 0.0;
    for &ai in &sizes(a) {
        for &bj in &sizes(b) {
            let h = Hypergeometric::new(n, ai, bj).unwrap();
            for x in 1..=ai.min(bj) {
                let p = h.pmf(x);
                if p > 0.0 {
                    let xf = x as f64;
                    emi += p * xf / nf * (nf * xf / (ai as f64 * bj as f64)).ln();
                }
            }
        }
    }
    adjusted(a, b, emi)
}

/// `(top-1 %, top-1-or-2 %)` per topic.
pub fn prevalence(num_topics: usize, assignments: &[(usize, usize)]) -> Vec<(f64, f64)> {
    let n = assignments.len() as f64;
    (0..num_topics)
        .map(|t| {
            let one = assignments.iter().filter(|a| a.0 == t).count() as f64;
            let either = assignments.iter().filter(|a| a.0 == t || a.1 == t).count() as f64;
            (100.0 * one / n, 100.0 * either / n)
        })
        .collect()
}

/// CCDF of unordered pair counts, empty pairs included.
pub fn pair_ccdf(num_topics: usize, assignments: &[(usize, usize)]) -> Vec<(u64, f64)> {
    let mut counts = Vec::new();
    for i in 0..num_topics {
        for j in i + 1..num_topics {
            let c = assignments
                .iter()
                .filter(|&&(a, b)| (a == i && b == j) || (a == j && b == i))
                .count() as u64;
            counts.push(c);
        }
    }
    let sizes: BTreeSet<u64> = counts.iter().copied().collect();
    sizes
        .into_iter()
        .map(|s| (s, counts.iter().filter(|&&c| c >= s).count() as f64 / counts.len() as f64))
        .collect()
}

/// A response reduced to what the agreement oracles need: the options shown
/// as `(name, provenance label)` and the names picked.
pub struct Answer {
    pub shown: Vec<(String, &'static str)>,
    pub picked: BTreeSet<String>,
    pub picked_none: bool,
}

/// `(row label, matching count)` for the given labels; each label names the
/// provenances it accepts, `None` stands for "none of the above".
pub fn agreement(answers: &[Answer], rows: &[(&str, Option<&[&str]>)]) -> Vec<(String, usize, f64)> {
    rows.iter()
        .map(|&(label, provs)| {
            let matching = answers
                .iter()
                .filter(|a| match provs {
                    None => a.picked_none,
                    Some(ps) => a.shown.iter().any(|(name, p)| ps.contains(p) && a.picked.contains(name)),
                })
                .count();
            (label.to_string(), matching, 100.0 * matching as f64 / answers.len() as f64)
        })
        .collect()
}

/// `(selected, presented)` for a topic over responses whose question shows
/// it as top-1 or top-2.
pub fn topic_rate(answers: &[Answer], topic: &str) -> (usize, usize) {
    let shown: Vec<&Answer> = answers
        .iter()
        .filter(|a| a.shown.iter().any(|(n, p)| n == topic && (*p == "top1" || *p == "top2")))
        .collect();
    (shown.iter().filter(|a| a.picked.contains(topic)).count(), shown.len())
}

fn word_matches(word: &str, token: &str, wildcard: bool) -> bool {
    match word.strip_suffix('*') {
        Some(stem) if wildcard => token.starts_with(stem),
        _ => token == word,
    }
}

pub fn fractions(tokens: &[String], categories: &[Vec<String>], wildcard: bool) -> Vec<f64> {
    categories
        .iter()
        .map(|words| {
            if tokens.is_empty() {
                return 0.0;
            }
            let hits = tokens
                .iter()
                .filter(|t| words.iter().any(|w| word_matches(w, t, wildcard)))
                .count();
            hits as f64 / tokens.len() as f64
        })
        .collect()
}

/// Presence per foundation in care, fairness, loyalty, authority, sanctity
/// order; `categories` pairs a name with its words in any order.
pub fn presence(tokens: &[String], categories: &[(String, Vec<String>)]) -> [bool; 5] {
    let order = ["care", "fairness", "loyalty", "authority", "sanctity"];
    let mut out = [false; 5];
    for (i, f) in order.iter().enumerate() {
        let words = &categories.iter().find(|(n, _)| n.to_lowercase() == *f).unwrap().1;
        out[i] = tokens.iter().any(|t| words.iter().any(|w| word_matches(w, t, false)));
    }
    out
}

/// Pearson r from raw sums of products.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0]) {
        return None;
    }
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    Some((n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt())
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Two-sided Student-t tail for a Pearson r over n points. With
/// t = sqrt(v) tan(u) the density becomes proportional to cos^(v-1) u, so
/// the two-sided tail is a ratio of two integrals over u.
pub fn pearson_p(r: f64, n: usize) -> f64 {
    let v = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r.abs() * (v / (1.0 - r * r)).sqrt();
    let u0 = (t / v.sqrt()).atan();
    let g = |u: f64| u.cos().powf(v - 1.0);
    let half = std::f64::consts::FRAC_PI_2;
    let steps = 200_000;
    (simpson(g, u0, half, steps) / simpson(g, 0.0, half, steps)).min(1.0)
}
