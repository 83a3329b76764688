//! Counts of endpoint templates up to isomorphism, split by balance and
//! tree shape.

use std::collections::{BTreeMap, HashSet};
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph6::AdjacencyMatrix;
use crate::graph_model::{canonical_template, iter_bits, CanonicalTemplate, EndpointGraph};

/// Largest vertex count the internal generator supports.
pub const MAX_GENERATED: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("graph source is empty")]
    SourceEmpty,
    #[error("source graph has {got} vertices, expected r+m={want}")]
    WrongOrder { got: usize, want: usize },
    #[error("need r >= 2, got r={0}")]
    CoreTooSmall(usize),
    #[error("the internal generator stops at {MAX_GENERATED} vertices, r+m={0}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub r: usize,
    pub m: usize,
    /// trees among `g`
    pub t: u64,
    /// classes that are m-balanced
    pub g: u64,
    /// classes satisfying the endpoint assumption
    pub a: u64,
}

impl CensusRow {
    pub fn csv(&self) -> String {
        format!("{},{},{},{},{}", self.r, self.m, self.t, self.g, self.a)
    }
}

/// Tallies every way of designating `m` vertices of each source graph as
/// endpoints, keeping one representative per isomorphism class.
pub fn census(r: usize, m: usize, source: &[AdjacencyMatrix]) -> Result<CensusRow, CensusError> {
    if r < 2 {
        return Err(CensusError::CoreTooSmall(r));
    }
    if source.is_empty() {
        return Err(CensusError::SourceEmpty);
    }
    let v = r + m;
    if let Some(bad) = source.iter().find(|g| g.n() != v) {
        return Err(CensusError::WrongOrder { got: bad.n(), want: v });
    }
    let classes = template_classes(r, m, source);
    let flags: Vec<(bool, bool)> = classes
        .par_iter()
        .map(|tpl| {
            let bal = tpl.balance_report().m_balanced;
            (bal, bal && tpl.is_tree())
        })
        .collect();
    Ok(CensusRow {
        r,
        m,
        t: flags.iter().filter(|f| f.1).count() as u64,
        g: flags.iter().filter(|f| f.0).count() as u64,
        a: classes.len() as u64,
    })
}

/// One representative per isomorphism class of endpoint templates obtained
/// by designating `m` vertices of a source graph as endpoints, in first-seen
/// order.
pub fn template_classes(r: usize, m: usize, source: &[AdjacencyMatrix]) -> Vec<EndpointGraph> {
    let subsets = subsets_of_size(r + m, m);
    let per_graph: Vec<Vec<(CanonicalTemplate, EndpointGraph)>> = source
        .par_iter()
        .filter(|adj| adj.n() == r + m)
        .map(|adj| {
            subsets
                .iter()
                .filter_map(|&eps| designate(adj, eps, r))
                .map(|tpl| (tpl.canonical_form(), tpl))
                .collect()
        })
        .collect();
    let mut seen = HashSet::new();
    per_graph
        .into_iter()
        .flatten()
        .filter_map(|(key, tpl)| seen.insert(key).then_some(tpl))
        .collect()
}

/// All endpoint templates with `r` cores and `m` endpoints, up to isomorphism.
pub fn generated_templates(r: usize, m: usize) -> Vec<EndpointGraph> {
    assert!(r >= 2 && r + m <= MAX_GENERATED);
    template_classes(r, m, &connected_graphs(r + m))
}

/// Census over the internally generated connected graphs on `r+m` vertices.
pub fn census_generated(r: usize, m: usize) -> Result<CensusRow, CensusError> {
    if r + m > MAX_GENERATED {
        return Err(CensusError::TooLarge(r + m));
    }
    census(r, m, &connected_graphs(r + m))
}

/// Relabels so the non-endpoints become cores `0..r` (in order) and the
/// endpoints follow; `None` if the choice breaks the endpoint assumption.
fn designate(adj: &AdjacencyMatrix, eps: u64, r: usize) -> Option<EndpointGraph> {
    let v = adj.n();
    let all = (1u64 << v) - 1;
    let cores = all & !eps;
    if iter_bits(eps).any(|i| adj.rows()[i] & eps != 0) {
        return None;
    }
    if !crate::graph_model::mask_connected(adj.rows(), cores) {
        return None;
    }
    let order: Vec<usize> = iter_bits(cores).chain(iter_bits(eps)).collect();
    let mut pos = vec![0; v];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let mut edges = Vec::new();
    for i in 0..v {
        for j in iter_bits(adj.rows()[i]) {
            if i < j {
                edges.push((pos[i] + 1, pos[j] + 1));
            }
        }
    }
    EndpointGraph::new(r, v - r, &edges).ok()
}

fn subsets_of_size(v: usize, k: usize) -> Vec<u64> {
    (0u64..1 << v).filter(|s| s.count_ones() as usize == k).collect()
}

fn plain_key(rows: &[u64]) -> CanonicalTemplate {
    canonical_template(rows, &[])
}

/// One connected graph per isomorphism class on `v` vertices, in canonical order.
pub fn connected_graphs(v: usize) -> Vec<AdjacencyMatrix> {
    assert!(
        (1..=MAX_GENERATED).contains(&v),
        "generator supports 1..={MAX_GENERATED} vertices"
    );
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Vec<AdjacencyMatrix>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&v) {
        return hit.clone();
    }
    let out = if v == 1 {
        vec![AdjacencyMatrix::empty(1)]
    } else {
        // every connected graph has a vertex whose removal keeps it connected
        let smaller = connected_graphs(v - 1);
        let mut keyed: Vec<(CanonicalTemplate, Vec<u64>)> = smaller
            .par_iter()
            .flat_map_iter(|h| {
                (1u64..1 << (v - 1)).map(move |nb| {
                    let mut rows = h.rows().to_vec();
                    for j in iter_bits(nb) {
                        rows[j] |= 1 << (v - 1);
                    }
                    rows.push(nb);
                    (plain_key(&rows), rows)
                })
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        keyed
            .into_iter()
            .map(|(_, rows)| AdjacencyMatrix::from_rows(rows))
            .collect()
    };
    cache.lock().unwrap().insert(v, out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connected_graph_counts() {
        let counts: Vec<usize> = (1..=6).map(|v| connected_graphs(v).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
        assert!(connected_graphs(5).iter().all(|g| g.is_connected()));
    }

    #[test]
    fn small_rows() {
        let row = |r, m| census_generated(r, m).unwrap().csv();
        assert_eq!(row(3, 0), "3,0,1,2,2");
        assert_eq!(row(3, 1), "3,1,2,6,8");
        assert_eq!(row(2, 2), "2,2,2,4,4");
    }

    #[test]
    fn errors() {
        assert_eq!(census(3, 0, &[]).unwrap_err(), CensusError::SourceEmpty);
        assert_eq!(
            census(3, 0, &[AdjacencyMatrix::empty(2)]).unwrap_err(),
            CensusError::WrongOrder { got: 2, want: 3 }
        );
        assert_eq!(census_generated(6, 3).unwrap_err(), CensusError::TooLarge(9));
    }
}
