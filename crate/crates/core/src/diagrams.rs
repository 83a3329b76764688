//! Quotient graphs of stacked template copies under a set partition.
//!
//! Row `i` of the grid holds a copy of the core of `G`; cells in the same
//! block are merged into one vertex, every row shares the same endpoints,
//! and parallel edges are collapsed.

use thiserror::Error;

use crate::graph_model::{iter_bits, EndpointGraph};
use crate::partitions::{PartitionView, SetPartition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("partition has {got} columns but the template has r={want} core vertices")]
    DimensionMismatch { got: usize, want: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramGraph {
    pub block_count: usize,
    pub m: usize,
    /// Deduplicated 1-based edges; endpoint `k` is vertex `block_count + k`.
    pub edges: Vec<(usize, usize)>,
}

impl DiagramGraph {
    pub fn v(&self) -> usize {
        self.block_count + self.m
    }

    pub fn e(&self) -> usize {
        self.edges.len()
    }
}

fn check(g: &EndpointGraph, cols: usize) -> Result<(), DiagramError> {
    if cols != g.r() {
        return Err(DiagramError::DimensionMismatch { got: cols, want: g.r() });
    }
    Ok(())
}

pub fn quotient_graph(g: &EndpointGraph, p: &SetPartition) -> Result<DiagramGraph, DiagramError> {
    check(g, p.cols())?;
    let mut edges = std::collections::BTreeSet::new();
    for row in 0..p.rows() {
        for (a, b) in g.core_edges() {
            let (x, y) = (p.block_of(row, a), p.block_of(row, b));
            if x != y {
                edges.insert((x.min(y) + 1, x.max(y) + 1));
            }
        }
        for (c, k) in g.endpoint_edges() {
            edges.insert((p.block_of(row, c) + 1, p.block_count() + k + 1));
        }
    }
    Ok(DiagramGraph {
        block_count: p.block_count(),
        m: g.m(),
        edges: edges.into_iter().collect(),
    })
}

/// For each endpoint, the sorted 1-based blocks adjacent to it.
pub fn endpoint_neighborhoods(g: &EndpointGraph, p: &SetPartition) -> Result<Vec<Vec<usize>>, DiagramError> {
    check(g, p.cols())?;
    let mut out = vec![std::collections::BTreeSet::new(); g.m()];
    for row in 0..p.rows() {
        for (c, k) in g.endpoint_edges() {
            out[k].insert(p.block_of(row, c) + 1);
        }
    }
    Ok(out.into_iter().map(|s| s.into_iter().collect()).collect())
}

/// `(n·r + m − v(ρ_G), n·e(G) − e(ρ_G))`.
pub fn diagram_point(g: &EndpointGraph, p: &SetPartition) -> Result<(i64, i64), DiagramError> {
    let q = quotient_graph(g, p)?;
    let n = p.rows() as i64;
    let x = n * g.r() as i64 + g.m() as i64 - q.v() as i64;
    let y = n * g.edge_count() as i64 - q.e() as i64;
    Ok((x, y))
}

/// Precomputed template data for evaluating many partitions quickly.
#[derive(Debug, Clone)]
pub struct DiagramKernel {
    r: usize,
    m: usize,
    e: usize,
    core_edges: Vec<(usize, usize)>,
    /// core neighbours of each endpoint
    endpoint_cores: Vec<u64>,
}

impl DiagramKernel {
    pub fn new(g: &EndpointGraph) -> Self {
        DiagramKernel {
            r: g.r(),
            m: g.m(),
            e: g.edge_count(),
            core_edges: g.core_edges(),
            endpoint_cores: (0..g.m()).map(|k| g.endpoint_neighbors(k)).collect(),
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Edge count of the quotient graph for a partition in label form.
    pub fn quotient_edges(&self, view: &PartitionView<'_>) -> usize {
        debug_assert_eq!(view.r, self.r);
        let mut adj = [0u64; 64];
        for row in view.labels.chunks(self.r) {
            for &(a, b) in &self.core_edges {
                let (x, y) = (row[a], row[b]);
                if x != y {
                    adj[x as usize] |= 1 << y;
                    adj[y as usize] |= 1 << x;
                }
            }
        }
        let mut total = adj[..view.block_count]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum::<usize>()
            / 2;
        for &cores in &self.endpoint_cores {
            let mut ep = 0u64;
            for row in view.labels.chunks(self.r) {
                for c in iter_bits(cores) {
                    ep |= 1 << row[c];
                }
            }
            total += ep.count_ones() as usize;
        }
        total
    }

    /// Diagram point of a partition in label form.
    pub fn point(&self, view: &PartitionView<'_>) -> (i64, i64) {
        let n = view.n as i64;
        let x = n * self.r as i64 - view.block_count as i64;
        let y = n * self.e as i64 - self.quotient_edges(view) as i64;
        (x, y)
    }

    pub fn m(&self) -> usize {
        self.m
    }
}
