use std::io::Write;

mod common;

use common::{random_triples, Triple};
use pbn::docs::{
    blob_corpus, cluster, doc_given_doc, random_corpus, relevance, row_stochastic, SparseCorpus,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn hand_example() {
    let c = SparseCorpus::from_triples([
        ("Q1", "a", 2),
        ("Q1", "b", 2),
        ("Q2", "b", 1),
        ("Q2", "c", 3),
    ])
    .unwrap();
    assert_eq!(doc_given_doc(&c, "Q1", "Q2").unwrap(), 0.25);
    assert_eq!(doc_given_doc(&c, "Q2", "Q1").unwrap(), 0.5);
    let r = relevance(&c);
    assert_eq!(r.get(0, 1), 0.375);
    assert_eq!(r.get(1, 0), 0.375);
}

#[test]
fn six_document_case_matches_brute_force() {
    let triples: Vec<Triple> = [
        ("a", "x", 1), ("a", "y", 2), ("b", "y", 3), ("b", "z", 1), ("c", "z", 4),
        ("d", "u", 2), ("d", "v", 2), ("e", "v", 1), ("e", "x", 5), ("f", "w", 7),
    ]
    .iter()
    .map(|(d, t, c)| (d.to_string(), t.to_string(), *c))
    .collect();
    let corpus = SparseCorpus::from_triples(triples.clone()).unwrap();
    let (docs, dense) = common::dense_relevance(&triples);
    let r = relevance(&corpus);
    assert_eq!(r.docs(), &docs[..]);
    for (i, row) in dense.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((r.get(i, j) - v).abs() <= 1e-14);
        }
    }
    // `f` shares nothing and stays a singleton at any threshold.
    let clusters = cluster(&r, 0.05).unwrap();
    assert!(clusters.clusters.contains(&vec!["f".to_string()]));
}

#[test]
fn fifty_document_corpora_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let triples = random_triples(50, 40, &mut rng);
        let corpus = SparseCorpus::from_triples(triples.clone()).unwrap();
        let (_, dense) = common::dense_relevance(&triples);
        let r = relevance(&corpus);
        for (i, row) in dense.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((r.get(i, j) - v).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn similarity_rows_and_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10 {
        let corpus = random_corpus(8, 10, 4, 6, &mut rng);
        let s = row_stochastic(&corpus);
        assert!(s.row_sum_error() <= 1e-12);
        for lambda in s.spectrum() {
            assert!(lambda.im.abs() <= 1e-10, "{lambda}");
            assert!(lambda.re <= 1.0 + 1e-10);
        }
    }
}

#[test]
fn three_blobs_give_three_clusters() {
    let corpus = blob_corpus(3, 12, 8, 4, 7);
    let r = relevance(&corpus);
    let clustering = cluster(&r, 0.2).unwrap();
    assert_eq!(clustering.clusters.len(), 3);
    for (b, members) in clustering.clusters.iter().enumerate() {
        assert_eq!(members.len(), 12);
        assert!(members.iter().all(|m| m.starts_with(&format!("b{b}_"))));
    }
}

#[test]
fn ten_thousand_document_ingest() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# doc\tterm\tcount").unwrap();
    for d in 0..10_000 {
        for k in 0..3 {
            writeln!(file, "d{d}\tt{}\t{}", (d * 7 + k * 13) % 500, k + 1).unwrap();
        }
    }
    file.flush().unwrap();
    let corpus = SparseCorpus::ingest(file.path()).unwrap();
    assert_eq!(corpus.len(), 10_000);
    assert_eq!(corpus.nnz(), 30_000);
    assert_eq!(corpus.vocab().len(), 500);
    let r = relevance(&corpus);
    assert!((0..r.len()).all(|i| (r.get(i, i) - 1.0).abs() <= 1e-14));
}

#[test]
fn malformed_lines_report_their_position() {
    let err = SparseCorpus::parse("a\tx\t1\nb\ty\n", std::path::Path::new("c.tsv")).unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Scaling one document's counts leaves every conditional unchanged.
    #[test]
    fn relevance_is_scale_invariant(seed in any::<u64>(), scale in 2u64..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triples = random_triples(10, 12, &mut rng);
        let scaled: Vec<Triple> = triples
            .iter()
            .map(|(d, t, c)| (d.clone(), t.clone(), if d == "doc3" { c * scale } else { *c }))
            .collect();
        let a = relevance(&SparseCorpus::from_triples(triples).unwrap());
        let b = relevance(&SparseCorpus::from_triples(scaled).unwrap());
        for i in 0..a.len() {
            for j in 0..a.len() {
                prop_assert!((a.get(i, j) - b.get(i, j)).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn relevance_is_symmetric_and_bounded(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = relevance(&random_corpus(15, 20, 5, 9, &mut rng));
        for i in 0..r.len() {
            prop_assert!((r.get(i, i) - 1.0).abs() <= 1e-14);
            for j in 0..r.len() {
                prop_assert_eq!(r.get(i, j), r.get(j, i));
                prop_assert!((0.0..=1.0 + 1e-14).contains(&r.get(i, j)));
            }
        }
    }
}
