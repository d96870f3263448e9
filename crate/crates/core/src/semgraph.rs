//! k-nearest-neighbour similarity graph over word vectors.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::WordEntry;
use crate::embeddings::{cosine, EmbeddingError};

pub const DEFAULT_K: usize = 3;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("need at least 2 words to build a graph, got {0}")]
    TooFewWords(usize),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("word {0} has no vector")]
    MissingVector(usize),
    #[error("edge ({0}, {1}) is out of range or a self-loop")]
    BadEdge(usize, usize),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Undirected weighted graph; nodes are indices into the word list.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticGraph {
    node_count: usize,
    k: usize,
    // keyed by (min, max)
    edges: BTreeMap<(usize, usize), f64>,
}

impl SemanticGraph {
    /// Builds a graph from an explicit edge list. Duplicates keep the first weight.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, GraphError> {
        let mut map = BTreeMap::new();
        for (a, b, w) in edges {
            if a == b || a >= node_count || b >= node_count {
                return Err(GraphError::BadEdge(a, b));
            }
            map.entry((a.min(b), a.max(b))).or_insert(w);
        }
        Ok(SemanticGraph {
            node_count,
            k: 0,
            edges: map,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weight(i, j).is_some()
    }

    /// Edges with `source < target`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(&(source, target), &weight)| Edge {
            source,
            target,
            weight,
        })
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges
            .keys()
            .filter(|&&(a, b)| a == i || b == i)
            .count()
    }

    /// Debug export: `[{source, target, weight}]`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.edges().collect::<Vec<_>>()).expect("edges serialize")
    }
}

/// Links every word to its `k` most similar others (ties to the lower index)
/// and merges the result into an undirected graph.
pub fn knn_graph(entries: &[WordEntry], k: usize) -> Result<SemanticGraph, GraphError> {
    let n = entries.len();
    if n < 2 {
        return Err(GraphError::TooFewWords(n));
    }
    if k == 0 {
        return Err(GraphError::ZeroK);
    }
    let vectors: Vec<&[f64]> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| e.vector.as_deref().ok_or(GraphError::MissingVector(i)))
        .collect::<Result<_, _>>()?;
    let kk = k.min(n - 1);

    let neighbours: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sims: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    // always evaluate with the lower index first so both
                    // directions agree bit for bit
                    let (a, b) = (i.min(j), i.max(j));
                    cosine(vectors[a], vectors[b]).map(|s| (j, s))
                })
                .collect::<Result<_, _>>()?;
            sims.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
            sims.truncate(kk);
            Ok(sims)
        })
        .collect::<Result<_, EmbeddingError>>()?;

    let mut edges = BTreeMap::new();
    for (i, list) in neighbours.into_iter().enumerate() {
        for (j, w) in list {
            edges.entry((i.min(j), i.max(j))).or_insert(w);
        }
    }
    Ok(SemanticGraph {
        node_count: n,
        k,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn entry(name: &str, v: &[f64]) -> WordEntry {
        WordEntry {
            surface: name.into(),
            count: 1,
            vector: Some(v.to_vec()),
        }
    }

    fn random_entries(n: usize, dim: usize, seed: u64) -> Vec<WordEntry> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                entry(&format!("w{i}"), &v.iter().map(|x| x / norm).collect::<Vec<_>>())
            })
            .collect()
    }

    #[test]
    fn one_nearest_neighbour() {
        let es = vec![
            entry("a", &[1.0, 0.0]),
            entry("b", &[0.9, 0.3]),
            entry("c", &[0.0, 1.0]),
        ];
        let g = knn_graph(&es, 1).unwrap();
        assert!((2..=3).contains(&g.edge_count()));
        assert!(g.has_edge(0, 1));
        assert!(g.has_edge(2, 1));
    }

    #[test]
    fn k_is_clamped() {
        let es = vec![entry("a", &[1.0, 0.0]), entry("b", &[1.0, 1.0])];
        let g = knn_graph(&es, 3).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            knn_graph(&[entry("a", &[1.0])], 2),
            Err(GraphError::TooFewWords(1))
        ));
        let es = vec![entry("a", &[1.0, 0.0]), WordEntry::new("b", 1)];
        assert!(matches!(knn_graph(&es, 1), Err(GraphError::MissingVector(1))));
    }

    #[test]
    fn matches_all_pairs_oracle() {
        let es = random_entries(10, 8, 3);
        let g = knn_graph(&es, 3).unwrap();
        // brute force: full similarity matrix, per-node sort, union
        let sim = |a: &[f64], b: &[f64]| {
            let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            d / (na * nb)
        };
        let mut expected = std::collections::BTreeSet::new();
        for i in 0..10 {
            let mut row: Vec<(f64, usize)> = (0..10)
                .filter(|&j| j != i)
                .map(|j| {
                    (
                        sim(es[i].vector.as_ref().unwrap(), es[j].vector.as_ref().unwrap()),
                        j,
                    )
                })
                .collect();
            row.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            for &(_, j) in &row[..3] {
                expected.insert((i.min(j), i.max(j)));
            }
        }
        let got: std::collections::BTreeSet<_> = g.edges().map(|e| (e.source, e.target)).collect();
        assert_eq!(got, expected);
        for e in g.edges() {
            let s = sim(
                es[e.source].vector.as_ref().unwrap(),
                es[e.target].vector.as_ref().unwrap(),
            );
            assert!((e.weight - s).abs() < 1e-9);
        }
    }

    #[test]
    fn json_export() {
        let g = SemanticGraph::from_edges(3, [(0, 1, 0.5), (2, 1, -0.25)]).unwrap();
        assert_eq!(
            g.to_json(),
            r#"[{"source":0,"target":1,"weight":0.5},{"source":1,"target":2,"weight":-0.25}]"#
        );
        assert!(SemanticGraph::from_edges(2, [(1, 1, 1.0)]).is_err());
    }

    proptest! {
        #[test]
        fn structural_invariants(seed in 0u64..500, n in 2usize..25, k in 1usize..6) {
            let es = random_entries(n, 6, seed);
            let g = knn_graph(&es, k).unwrap();
            let g_next = knn_graph(&es, k + 1).unwrap();
            for i in 0..n {
                prop_assert!(!g.has_edge(i, i));
                prop_assert!(g.degree(i) >= k.min(n - 1));
                for j in 0..n {
                    prop_assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
                }
            }
            for e in g.edges() {
                prop_assert!(e.source < e.target);
                prop_assert!(g_next.has_edge(e.source, e.target));
            }
            prop_assert_eq!(&g, &knn_graph(&es, k).unwrap());
        }
    }
}
