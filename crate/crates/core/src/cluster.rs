//! Seeded Louvain community detection and the two-level cluster hierarchy.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::WordEntry;
use crate::semgraph::SemanticGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightShift {
    /// Shift all weights up so the smallest negative weight becomes 0.
    #[default]
    ShiftMinToZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainConfig {
    pub seed: u64,
    pub resolution: f64,
    pub weight_shift: WeightShift,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            seed: 42,
            resolution: 1.0,
            weight_shift: WeightShift::ShiftMinToZero,
        }
    }
}

/// Community id per node; ids are contiguous from 0, numbered in order of
/// each community's smallest node index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(pub Vec<usize>);

impl Partition {
    pub fn community_count(&self) -> usize {
        self.0.iter().max().map_or(0, |m| m + 1)
    }

    pub fn members(&self, community: usize) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] == community).collect()
    }

    /// Debug export `{word: community}`.
    pub fn to_json(&self, entries: &[WordEntry]) -> String {
        let map: BTreeMap<&str, usize> = entries
            .iter()
            .zip(&self.0)
            .map(|(e, &c)| (e.surface.as_str(), c))
            .collect();
        serde_json::to_string(&map).expect("partition serializes")
    }

    fn renumbered(raw: &[usize]) -> Partition {
        let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
        Partition(
            raw.iter()
                .map(|c| {
                    let next = ids.len();
                    *ids.entry(*c).or_insert(next)
                })
                .collect(),
        )
    }
}

/// Weighted adjacency with self-loops; `adj[i]` lists `(j, A_ij)` and the
/// diagonal entry holds twice the internal weight, so that the sum over all
/// entries is 2m.
struct LevelGraph {
    adj: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
    two_m: f64,
}

impl LevelGraph {
    fn from_semantic(graph: &SemanticGraph, shift: WeightShift) -> Self {
        let n = graph.node_count();
        let offset = match shift {
            WeightShift::ShiftMinToZero => {
                let min = graph.edges().map(|e| e.weight).fold(f64::INFINITY, f64::min);
                if min.is_finite() && min < 0.0 {
                    -min
                } else {
                    0.0
                }
            }
        };
        let mut adj = vec![Vec::new(); n];
        for e in graph.edges() {
            let w = e.weight + offset;
            if w > 0.0 {
                adj[e.source].push((e.target, w));
                adj[e.target].push((e.source, w));
            }
        }
        Self::with_adjacency(adj)
    }

    fn with_adjacency(adj: Vec<Vec<(usize, f64)>>) -> Self {
        let degree: Vec<f64> = adj.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect();
        let two_m = degree.iter().sum();
        LevelGraph { adj, degree, two_m }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// One local-moving phase. Returns the community of every node and whether
    /// anything moved.
    fn local_moving(&self, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot: Vec<f64> = self.degree.clone();
        let mut order: Vec<usize> = (0..n).collect();
        let mut moved_any = false;
        let mut links: Vec<f64> = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();

        loop {
            order.shuffle(rng);
            let mut moved = false;
            for &i in &order {
                let ki = self.degree[i];
                let own = comm[i];
                for &(j, w) in &self.adj[i] {
                    if j == i {
                        continue;
                    }
                    let c = comm[j];
                    if links[c] == 0.0 {
                        touched.push(c);
                    }
                    links[c] += w;
                }
                tot[own] -= ki;
                let scale = resolution * ki / self.two_m;
                let mut best = own;
                let mut best_gain = links[own] - scale * tot[own];
                // deterministic candidate order
                touched.sort_unstable();
                for &c in &touched {
                    let gain = links[c] - scale * tot[c];
                    if gain > best_gain + 1e-12 {
                        best_gain = gain;
                        best = c;
                    }
                }
                tot[best] += ki;
                if best != own {
                    comm[i] = best;
                    moved = true;
                    moved_any = true;
                }
                for &c in &touched {
                    links[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
        }
        (comm, moved_any)
    }

    fn aggregate(&self, comm: &[usize], count: usize) -> LevelGraph {
        let mut merged: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
        for (i, list) in self.adj.iter().enumerate() {
            for &(j, w) in list {
                *merged[comm[i]].entry(comm[j]).or_default() += w;
            }
        }
        LevelGraph::with_adjacency(
            merged
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect(),
        )
    }
}

/// Louvain modularity optimization; returns the coarsest level.
pub fn louvain(graph: &SemanticGraph, config: &LouvainConfig) -> Partition {
    let n = graph.node_count();
    if n == 0 {
        return Partition(Vec::new());
    }
    let mut level = LevelGraph::from_semantic(graph, config.weight_shift);
    if level.two_m <= 0.0 {
        return Partition((0..n).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let (comm, moved) = level.local_moving(config.resolution, &mut rng);
        if !moved {
            break;
        }
        let renum = Partition::renumbered(&comm);
        let count = renum.community_count();
        for m in membership.iter_mut() {
            *m = renum.0[*m];
        }
        if count == level.len() {
            break;
        }
        level = level.aggregate(&renum.0, count);
    }
    Partition::renumbered(&membership)
}

/// Newman modularity with resolution, on the shifted weights Louvain uses.
pub fn modularity(graph: &SemanticGraph, partition: &Partition, config: &LouvainConfig) -> f64 {
    let level = LevelGraph::from_semantic(graph, config.weight_shift);
    if level.two_m <= 0.0 {
        return 0.0;
    }
    let count = partition.community_count();
    let mut inside = vec![0.0; count];
    let mut tot = vec![0.0; count];
    for (i, list) in level.adj.iter().enumerate() {
        let ci = partition.0[i];
        tot[ci] += level.degree[i];
        for &(j, w) in list {
            if partition.0[j] == ci {
                inside[ci] += w;
            }
        }
    }
    (0..count)
        .map(|c| inside[c] / level.two_m - config.resolution * (tot[c] / level.two_m).powi(2))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Linear,
    Sqrt,
}

impl Weighting {
    pub fn apply(self, count: u32) -> f64 {
        match self {
            Weighting::Linear => count as f64,
            Weighting::Sqrt => (count as f64).sqrt(),
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Weighting::Linear),
            "sqrt" => Ok(Weighting::Sqrt),
            other => Err(format!("unknown weighting {other:?} (expected linear or sqrt)")),
        }
    }
}

/// Hierarchy node: a leaf carries a word index, an internal node children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterNode {
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub color: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub word: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub children: Vec<ClusterNode>,
}

impl ClusterNode {
    pub fn leaf(word: usize, weight: f64) -> Self {
        ClusterNode {
            weight,
            color: None,
            word: Some(word),
            children: Vec::new(),
        }
    }

    pub fn internal(children: Vec<ClusterNode>) -> Self {
        ClusterNode {
            weight: children.iter().map(|c| c.weight).sum(),
            color: None,
            word: None,
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn leaf_words(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_words(&mut out);
        out
    }

    fn collect_words(&self, out: &mut Vec<usize>) {
        if let Some(w) = self.word {
            out.push(w);
        }
        for c in &self.children {
            c.collect_words(out);
        }
    }
}

pub type ClusterTree = ClusterNode;

/// Root -> one child per community (in id order) -> word leaves.
pub fn build_tree(partition: &Partition, entries: &[WordEntry], weighting: Weighting) -> ClusterTree {
    assert_eq!(
        partition.0.len(),
        entries.len(),
        "partition must cover every entry"
    );
    let clusters = (0..partition.community_count())
        .map(|c| {
            let leaves = partition
                .members(c)
                .into_iter()
                .map(|i| ClusterNode::leaf(i, weighting.apply(entries[i].count)))
                .collect();
            let mut node = ClusterNode::internal(leaves);
            node.color = Some(c);
            node
        })
        .collect();
    ClusterNode::internal(clusters)
}
