//! Simulated network graphs and data partitioning.
//!
//! Graphs are undirected, connected and fixed for the lifetime of a fit.
//! Consensus bookkeeping downstream is indexed by *ordered* pairs `(i, j)`
//! with `j ∈ B_i`, so one undirected edge carries two independent
//! auxiliary/dual records.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Standard topologies selectable by name in experiment configs.
///
/// `Star` is a degenerate stress case beyond the shapes the convergence
/// study exercises; kept as an extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Ring,
    Chain,
    Complete,
    Star,
}

impl Topology {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "ring" => Ok(Topology::Ring),
            "chain" => Ok(Topology::Chain),
            "complete" => Ok(Topology::Complete),
            "star" => Ok(Topology::Star),
            other => Err(Error::InvalidInput {
                name: "topology",
                reason: format!("unknown topology `{other}` (expected ring|chain|complete|star)"),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Topology::Ring => "ring",
            Topology::Chain => "chain",
            Topology::Complete => "complete",
            Topology::Star => "star",
        }
    }
}

/// An undirected connected graph with sorted neighbor lists.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    neighbors: Vec<Vec<usize>>,
}

impl NetworkGraph {
    /// Builds a graph from explicit undirected edges.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidInput {
                name: "node_count",
                reason: "must be at least 1".into(),
            });
        }
        let mut neighbors = vec![Vec::new(); node_count];
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidInput {
                    name: "edges",
                    reason: format!("self-loop at node {a}"),
                });
            }
            if a >= node_count || b >= node_count {
                return Err(Error::InvalidInput {
                    name: "edges",
                    reason: format!("edge ({a},{b}) out of range"),
                });
            }
            if !neighbors[a].contains(&b) {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let graph = Self { neighbors };
        if !graph.is_connected() {
            return Err(Error::InvalidInput {
                name: "edges",
                reason: "graph is not connected".into(),
            });
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Sorted neighbor list B_i.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// All ordered pairs (i, j) with j ∈ B_i, lexicographically sorted.
    pub fn ordered_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.node_count() {
            for &j in &self.neighbors[i] {
                pairs.push((i, j));
            }
        }
        pairs
    }

    /// Breadth-first reachability from node 0.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == n
    }
}

/// Builds one of the named topologies on `n` nodes.
///
/// Minimum sizes: ring needs n ≥ 3, chain and star need n ≥ 2, complete
/// allows n ≥ 1 (a single isolated node counts as trivially connected).
pub fn build_topology(kind: Topology, n: usize) -> Result<NetworkGraph> {
    let min = match kind {
        Topology::Ring => 3,
        Topology::Chain | Topology::Star => 2,
        Topology::Complete => 1,
    };
    if n < min {
        return Err(Error::InvalidInput {
            name: "node_count",
            reason: format!("{} topology requires at least {min} nodes, got {n}", kind.name()),
        });
    }
    let mut edges = Vec::new();
    match kind {
        Topology::Ring => {
            for i in 0..n {
                edges.push((i, (i + 1) % n));
            }
        }
        Topology::Chain => {
            for i in 0..n - 1 {
                edges.push((i, i + 1));
            }
        }
        Topology::Complete => {
            for i in 0..n {
                for j in i + 1..n {
                    edges.push((i, j));
                }
            }
        }
        Topology::Star => {
            for i in 1..n {
                edges.push((0, i));
            }
        }
    }
    NetworkGraph::from_edges(n, &edges)
}

/// A single-node "network" (no edges); the trivial consensus instance.
pub fn single_node() -> NetworkGraph {
    NetworkGraph {
        neighbors: vec![Vec::new()],
    }
}

/// Assignment of sample (column) indices to nodes.
#[derive(Debug, Clone)]
pub struct DataPartition {
    pub assignment: Vec<Vec<usize>>,
}

impl DataPartition {
    pub fn counts(&self) -> Vec<usize> {
        self.assignment.iter().map(Vec::len).collect()
    }
}

/// Splits `total` samples into contiguous blocks of size ⌊total/n⌋, with the
/// remainder spread over the first nodes.
pub fn partition_equal(total: usize, node_count: usize) -> Result<DataPartition> {
    if total < node_count || node_count == 0 {
        return Err(Error::InvalidInput {
            name: "total",
            reason: format!("need at least one sample per node ({total} samples, {node_count} nodes)"),
        });
    }
    let base = total / node_count;
    let rem = total % node_count;
    let mut assignment = Vec::with_capacity(node_count);
    let mut next = 0;
    for i in 0..node_count {
        let size = base + usize::from(i < rem);
        assignment.push((next..next + size).collect());
        next += size;
    }
    Ok(DataPartition { assignment })
}

/// Like [`partition_equal`] but over a seeded shuffle of the sample order.
pub fn partition_shuffled(total: usize, node_count: usize, seed: u64) -> Result<DataPartition> {
    let mut order: Vec<usize> = (0..total).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let blocks = partition_equal(total, node_count)?;
    let assignment = blocks
        .assignment
        .into_iter()
        .map(|idx| {
            let mut cols: Vec<usize> = idx.into_iter().map(|k| order[k]).collect();
            cols.sort_unstable();
            cols
        })
        .collect();
    Ok(DataPartition { assignment })
}
