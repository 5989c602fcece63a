#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Triple = (String, String, u64);

pub fn random_triples(docs: usize, vocab: usize, rng: &mut ChaCha8Rng) -> Vec<Triple> {
    let mut out = Vec::new();
    for d in 0..docs {
        for _ in 0..rng.random_range(1..6) {
            let term = rng.random_range(0..vocab);
            out.push((format!("doc{d}"), format!("w{term}"), rng.random_range(1..9)));
        }
    }
    out
}

/// Dense `R` straight from the definition, indexed by first appearance.
pub fn dense_relevance(triples: &[Triple]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut docs: Vec<String> = Vec::new();
    let mut terms: Vec<String> = Vec::new();
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    for (d, t, c) in triples {
        let di = docs.iter().position(|x| x == d).unwrap_or_else(|| {
            docs.push(d.clone());
            docs.len() - 1
        });
        let ti = terms.iter().position(|x| x == t).unwrap_or_else(|| {
            terms.push(t.clone());
            terms.len() - 1
        });
        *counts.entry((di, ti)).or_default() += c;
    }
    let q = |d: usize, t: usize| counts.get(&(d, t)).copied().unwrap_or(0) as f64;
    let p = |mu: usize, nu: usize| {
        let total: f64 = (0..terms.len()).map(|t| q(nu, t)).sum();
        (0..terms.len())
            .filter(|&t| q(mu, t) > 0.0)
            .map(|t| q(nu, t) / total)
            .sum::<f64>()
    };
    let n = docs.len();
    let r = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (p(i, j) + p(j, i))).collect())
        .collect();
    (docs, r)
}
