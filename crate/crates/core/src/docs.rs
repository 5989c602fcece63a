//! Bag-of-words document relevance.
//!
//! Keywords form the basis; document `Q_μ` is the state with
//! `P(k|Q_μ) = q_{μ,k} / Σ_k q_{μ,k}`. Inserting the keyword identity gives
//! `P(Q_μ|Q_ν) = Σ_{k∈Q_μ} P(k|Q_ν)`, and the relevance of two documents is
//! the symmetrised `R_{μν} = ½[P(Q_μ|Q_ν) + P(Q_ν|Q_μ)]`. Only document pairs
//! that share a keyword can be non-zero, so the matrix is built from an
//! inverted index.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use petgraph::unionfind::UnionFind;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

/// Sparse document × term count matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCorpus {
    docs: Vec<String>,
    vocab: Vec<String>,
    /// Per document: `(term index, count)` sorted by term index, counts > 0.
    rows: Vec<Vec<(usize, u64)>>,
    totals: Vec<u64>,
    doc_index: HashMap<String, usize>,
    term_index: HashMap<String, usize>,
}

#[derive(Default)]
struct CorpusBuilder {
    docs: Vec<String>,
    vocab: Vec<String>,
    rows: Vec<BTreeMap<usize, u64>>,
    doc_index: HashMap<String, usize>,
    term_index: HashMap<String, usize>,
}

impl CorpusBuilder {
    fn add(&mut self, doc: &str, term: &str, count: u64) {
        let d = match self.doc_index.get(doc) {
            Some(&d) => d,
            None => {
                self.docs.push(doc.to_string());
                self.rows.push(BTreeMap::new());
                self.doc_index.insert(doc.to_string(), self.docs.len() - 1);
                self.docs.len() - 1
            }
        };
        if count == 0 {
            return;
        }
        let k = match self.term_index.get(term) {
            Some(&k) => k,
            None => {
                self.vocab.push(term.to_string());
                self.term_index.insert(term.to_string(), self.vocab.len() - 1);
                self.vocab.len() - 1
            }
        };
        *self.rows[d].entry(k).or_insert(0) += count;
    }

    fn build(self) -> Result<SparseCorpus> {
        let mut rows = Vec::with_capacity(self.rows.len());
        let mut totals = Vec::with_capacity(self.rows.len());
        for (doc, row) in self.docs.iter().zip(self.rows) {
            let total: u64 = row.values().sum();
            if total == 0 {
                return Err(Error::EmptyDocument(doc.clone()));
            }
            totals.push(total);
            rows.push(row.into_iter().collect());
        }
        Ok(SparseCorpus {
            docs: self.docs,
            vocab: self.vocab,
            rows,
            totals,
            doc_index: self.doc_index,
            term_index: self.term_index,
        })
    }
}

impl SparseCorpus {
    /// Builds a corpus from `(doc, term, count)` triples. Repeated pairs are
    /// summed; zero counts register the document but no term.
    pub fn from_triples<D, T, I>(triples: I) -> Result<Self>
    where
        D: AsRef<str>,
        T: AsRef<str>,
        I: IntoIterator<Item = (D, T, u64)>,
    {
        let mut builder = CorpusBuilder::default();
        for (d, t, c) in triples {
            builder.add(d.as_ref(), t.as_ref(), c);
        }
        builder.build()
    }

    /// Parses `doc_id<TAB>term<TAB>count` lines; blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut builder = CorpusBuilder::default();
        for (idx, line) in text.lines().enumerate() {
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [doc, term, count] = fields[..] else {
                return Err(parse_err(format!(
                    "expected 3 tab-separated fields, found {}",
                    fields.len()
                )));
            };
            let (doc, term) = (doc.trim(), term.trim());
            if doc.is_empty() || term.is_empty() {
                return Err(parse_err("empty document or term id".into()));
            }
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("count `{}`: {e}", count.trim())))?;
            builder.add(doc, term, count);
        }
        builder.build()
    }

    /// Reads a UTF-8 TSV corpus file.
    pub fn ingest(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn docs(&self) -> &[String] {
        &self.docs
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    /// Number of stored non-zero counts.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `(term index, count)` pairs of a document, by term index.
    pub fn row(&self, doc: usize) -> &[(usize, u64)] {
        &self.rows[doc]
    }

    pub fn total(&self, doc: usize) -> u64 {
        self.totals[doc]
    }

    pub fn doc_position(&self, id: &str) -> Result<usize> {
        self.doc_index.get(id).copied().ok_or_else(|| Error::Unknown {
            kind: "document",
            id: id.to_string(),
        })
    }

    pub fn term_position(&self, id: &str) -> Result<usize> {
        self.term_index.get(id).copied().ok_or_else(|| Error::Unknown {
            kind: "term",
            id: id.to_string(),
        })
    }

    /// Count `q_{μ,k}` by indices.
    pub fn count(&self, doc: usize, term: usize) -> u64 {
        self.rows[doc]
            .binary_search_by_key(&term, |&(k, _)| k)
            .map(|i| self.rows[doc][i].1)
            .unwrap_or(0)
    }

    /// `P(k|Q_μ)` by indices.
    pub fn term_probability(&self, term: usize, doc: usize) -> f64 {
        self.count(doc, term) as f64 / self.totals[doc] as f64
    }

    /// `P(Q_μ|Q_ν) = Σ_{k∈Q_μ} P(k|Q_ν)` by indices, summed in term order.
    pub fn doc_probability(&self, mu: usize, nu: usize) -> f64 {
        let total = self.totals[nu] as f64;
        let (a, b) = (&self.rows[mu], &self.rows[nu]);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += b[j].1 as f64 / total;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// `Σ_k q_{μ,k}·q_{ν,k}`, exact in integers.
    fn overlap(&self, mu: usize, nu: usize) -> u128 {
        let (a, b) = (&self.rows[mu], &self.rows[nu]);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0u128;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 as u128 * b[j].1 as u128;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Documents sharing at least one term with `doc`, excluding itself.
    fn neighbours(&self, doc: usize, postings: &[Vec<usize>]) -> BTreeSet<usize> {
        self.rows[doc]
            .iter()
            .flat_map(|&(k, _)| postings[k].iter().copied())
            .filter(|&d| d != doc)
            .collect()
    }

    fn postings(&self) -> Vec<Vec<usize>> {
        let mut postings = vec![Vec::new(); self.vocab.len()];
        for (d, row) in self.rows.iter().enumerate() {
            for &(k, _) in row {
                postings[k].push(d);
            }
        }
        postings
    }
}

/// `P(k|Q_μ)` by ids. A known term absent from the document gives 0.
pub fn term_given_doc(corpus: &SparseCorpus, term: &str, doc: &str) -> Result<f64> {
    let d = corpus.doc_position(doc)?;
    let k = corpus.term_position(term)?;
    Ok(corpus.term_probability(k, d))
}

/// `P(Q_μ|Q_ν)` by ids.
pub fn doc_given_doc(corpus: &SparseCorpus, mu: &str, nu: &str) -> Result<f64> {
    let m = corpus.doc_position(mu)?;
    let n = corpus.doc_position(nu)?;
    Ok(corpus.doc_probability(m, n))
}

/// Symmetric relevance matrix stored sparsely: the diagonal plus non-zero
/// entries above it.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceMatrix {
    docs: Vec<String>,
    diagonal: Vec<f64>,
    upper: BTreeMap<(usize, usize), f64>,
}

impl RelevanceMatrix {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn docs(&self) -> &[String] {
        &self.docs
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => self.diagonal[i],
            std::cmp::Ordering::Less => self.upper.get(&(i, j)).copied().unwrap_or(0.0),
            std::cmp::Ordering::Greater => self.upper.get(&(j, i)).copied().unwrap_or(0.0),
        }
    }

    /// Non-zero off-diagonal entries `(i, j, R_ij)` with `i < j`.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.upper.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn max_off_diagonal(&self) -> f64 {
        self.upper.values().copied().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), self.len(), |i, j| self.get(i, j))
    }

    /// CSV with a header row and a header column of document ids.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "doc")?;
        for d in &self.docs {
            write!(out, ",{d}")?;
        }
        writeln!(out)?;
        for (i, d) in self.docs.iter().enumerate() {
            write!(out, "{d}")?;
            for j in 0..self.len() {
                write!(out, ",{:?}", self.get(i, j))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// `R_{μν} = ½[P(Q_μ|Q_ν) + P(Q_ν|Q_μ)]` over all pairs sharing a term.
pub fn relevance(corpus: &SparseCorpus) -> RelevanceMatrix {
    let postings = corpus.postings();
    let diagonal: Vec<f64> = (0..corpus.len())
        .map(|d| corpus.doc_probability(d, d))
        .collect();
    let rows: Vec<Vec<((usize, usize), f64)>> = (0..corpus.len())
        .into_par_iter()
        .map(|mu| {
            corpus
                .neighbours(mu, &postings)
                .into_iter()
                .filter(|&nu| nu > mu)
                .map(|nu| {
                    let r = 0.5 * (corpus.doc_probability(mu, nu) + corpus.doc_probability(nu, mu));
                    ((mu, nu), r)
                })
                .collect()
        })
        .collect();
    RelevanceMatrix {
        docs: corpus.docs.clone(),
        diagonal,
        upper: rows.into_iter().flatten().collect(),
    }
}

/// `S = Q·Qᵀ` and its row-normalised Markov matrix `R_ij = S_ij / Σ_k S_ik`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStochasticSimilarity {
    pub similarity: DMatrix<f64>,
    pub transition: DMatrix<f64>,
}

impl RowStochasticSimilarity {
    /// Eigenvalues of the row-stochastic matrix from a real Schur form.
    pub fn spectrum(&self) -> Vec<Complex64> {
        self.transition.complex_eigenvalues().iter().copied().collect()
    }

    /// Largest `|Σ_j R_ij − 1|`.
    pub fn row_sum_error(&self) -> f64 {
        self.transition
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub fn row_stochastic(corpus: &SparseCorpus) -> RowStochasticSimilarity {
    let n = corpus.len();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = corpus.overlap(i, j) as f64;
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let mut r = s.clone();
    for mut row in r.row_iter_mut() {
        let total: f64 = row.sum();
        row /= total;
    }
    RowStochasticSimilarity {
        similarity: s,
        transition: r,
    }
}

/// Connected components of the graph with an edge wherever `R ≥ threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    pub clusters: Vec<Vec<String>>,
    pub threshold: f64,
}

/// Groups documents into threshold components. Members of each cluster are
/// sorted by id and clusters are ordered by their smallest member.
pub fn cluster(relevance: &RelevanceMatrix, threshold: f64) -> Result<Clustering> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let n = relevance.len();
    let mut components = UnionFind::<usize>::new(n);
    for (i, j, r) in relevance.off_diagonal() {
        if r >= threshold {
            components.union(i, j);
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for d in 0..n {
        groups
            .entry(components.find(d))
            .or_default()
            .push(relevance.docs[d].clone());
    }
    let mut clusters: Vec<Vec<String>> = groups
        .into_values()
        .map(|mut members| {
            members.sort();
            members
        })
        .collect();
    clusters.sort();
    Ok(Clustering {
        clusters,
        threshold,
    })
}

/// Random corpus: each document draws between 1 and `max_terms` distinct
/// terms from a shared vocabulary with counts in `1..=max_count`.
pub fn random_corpus<R: Rng + ?Sized>(
    docs: usize,
    vocab: usize,
    max_terms: usize,
    max_count: u64,
    rng: &mut R,
) -> SparseCorpus {
    let mut triples = Vec::new();
    for d in 0..docs {
        let terms = rng.random_range(1..=max_terms.min(vocab));
        for k in sample(rng, vocab, terms) {
            triples.push((format!("d{d:03}"), format!("t{k:03}"), rng.random_range(1..=max_count)));
        }
    }
    SparseCorpus::from_triples(triples).expect("every document has a term")
}

/// Corpus of `blobs` groups, each with a private vocabulary of
/// `vocab_per_blob` terms; every document draws `terms_per_doc` of its
/// group's terms. Document ids are `b{blob}_d{index}`.
pub fn blob_corpus(
    blobs: usize,
    docs_per_blob: usize,
    vocab_per_blob: usize,
    terms_per_doc: usize,
    seed: u64,
) -> SparseCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for b in 0..blobs {
        for d in 0..docs_per_blob {
            for k in sample(&mut rng, vocab_per_blob, terms_per_doc.min(vocab_per_blob)) {
                triples.push((
                    format!("b{b}_d{d:02}"),
                    format!("b{b}_w{k:02}"),
                    rng.random_range(1..=5u64),
                ));
            }
        }
    }
    SparseCorpus::from_triples(triples).expect("every document has a term")
}
