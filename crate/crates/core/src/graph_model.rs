//! Template graphs with fixed endpoints.
//!
//! An [`EndpointGraph`] has `r` core vertices (labelled `1..=r`) that are
//! mapped onto points of the Poisson process, and `m` endpoints (labelled
//! `r+1..=r+m`) pinned to fixed locations. Endpoints are never adjacent to
//! each other, the core induces a connected graph, and every endpoint is
//! attached to at least one core vertex.
//!
//! Internally vertices are 0-based and adjacency is stored as bit masks, so
//! the whole template must fit in 64 vertices.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::Rational;

/// Hard cap on `r + m`, imposed by the bit-mask representation.
pub const MAX_VERTICES: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("malformed graph description: {0}")]
    Malformed(String),
    #[error("endpoint assumption violated: {0}")]
    Assumption(#[from] AssumptionViolation),
}

/// Names the clause of the endpoint assumption a template breaks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssumptionViolation {
    #[error("need at least 2 core vertices, got r={0}")]
    CoreTooSmall(usize),
    #[error("endpoints {0} and {1} are adjacent (endpoints must be pairwise non-adjacent)")]
    AdjacentEndpoints(usize, usize),
    #[error("core vertices 1..={0} do not induce a connected graph")]
    DisconnectedCore(usize),
    #[error("endpoint {0} has no neighbour, so the template is disconnected")]
    IsolatedEndpoint(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EndpointGraph {
    r: usize,
    m: usize,
    /// Adjacency masks over all `r + m` vertices, 0-based.
    adj: Vec<u64>,
}

impl EndpointGraph {
    /// Builds and validates a template from 1-based edge pairs.
    pub fn new(r: usize, m: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let v = r + m;
        if v > MAX_VERTICES {
            return Err(GraphError::Malformed(format!(
                "r+m={v} exceeds the supported maximum of {MAX_VERTICES} vertices"
            )));
        }
        if r < 2 {
            return Err(AssumptionViolation::CoreTooSmall(r).into());
        }
        let mut adj = vec![0u64; v];
        for &(a, b) in edges {
            if a == 0 || b == 0 || a > v || b > v {
                return Err(GraphError::Malformed(format!(
                    "edge {a}-{b} references a vertex outside 1..={v}"
                )));
            }
            if a == b {
                return Err(GraphError::Malformed(format!("self-loop at vertex {a}")));
            }
            let (i, j) = (a - 1, b - 1);
            if adj[i] >> j & 1 == 1 {
                return Err(GraphError::Malformed(format!("duplicate edge {a}-{b}")));
            }
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
        let g = EndpointGraph { r, m, adj };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), AssumptionViolation> {
        let core = self.core_mask();
        for k in 0..self.m {
            let e = self.r + k;
            let endpoint_nbrs = self.adj[e] & !core;
            if endpoint_nbrs != 0 {
                let other = endpoint_nbrs.trailing_zeros() as usize;
                return Err(AssumptionViolation::AdjacentEndpoints(
                    e.min(other) + 1,
                    e.max(other) + 1,
                ));
            }
        }
        if !mask_connected(&self.adj, core) {
            return Err(AssumptionViolation::DisconnectedCore(self.r));
        }
        for k in 0..self.m {
            if self.adj[self.r + k] == 0 {
                return Err(AssumptionViolation::IsolatedEndpoint(self.r + k + 1));
            }
        }
        Ok(())
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertex_count(&self) -> usize {
        self.r + self.m
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn core_edge_count(&self) -> usize {
        let core = self.core_mask();
        (0..self.r)
            .map(|i| (self.adj[i] & core).count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    /// Bit mask of the core vertices `0..r`.
    pub fn core_mask(&self) -> u64 {
        (1u64 << self.r) - 1
    }

    /// Core neighbours of core vertex `i` (0-based), as a mask over `0..r`.
    pub fn core_neighbors(&self, i: usize) -> u64 {
        self.adj[i] & self.core_mask()
    }

    /// Endpoints attached to core vertex `i`, as a mask over endpoint indices `0..m`.
    pub fn attachment(&self, i: usize) -> u64 {
        self.adj[i] >> self.r
    }

    /// Core vertices attached to endpoint `k` (0-based endpoint index).
    pub fn endpoint_neighbors(&self, k: usize) -> u64 {
        self.adj[self.r + k]
    }

    /// Core edges as 0-based pairs `(i, j)` with `i < j`.
    pub fn core_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.r {
            let mut nb = self.core_neighbors(i) & !((2u64 << i) - 1);
            while nb != 0 {
                let j = nb.trailing_zeros() as usize;
                out.push((i, j));
                nb &= nb - 1;
            }
        }
        out
    }

    /// Endpoint edges as 0-based `(core, endpoint index)` pairs.
    pub fn endpoint_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.r {
            let mut at = self.attachment(i);
            while at != 0 {
                out.push((i, at.trailing_zeros() as usize));
                at &= at - 1;
            }
        }
        out
    }

    /// All edges with 1-based labels, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.vertex_count() {
            for j in i + 1..self.vertex_count() {
                if self.adj[i] >> j & 1 == 1 {
                    out.push((i + 1, j + 1));
                }
            }
        }
        out
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count() + 1 == self.vertex_count()
    }

    /// Largest number of endpoints attached to a single core vertex.
    pub fn endpoint_degree_max(&self) -> usize {
        (0..self.r)
            .map(|i| self.attachment(i).count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Scans every induced subgraph and evaluates the density conditions.
    pub fn balance_report(&self) -> BalanceReport {
        let v = self.vertex_count() as i64;
        let e = self.edge_count() as i64;
        let m = self.m as i64;
        let a = self.endpoint_degree_max() as i64;
        let full: u64 = (1u64 << v) - 1;

        let mut rep = BalanceReport {
            balanced: true,
            strictly_balanced: true,
            strongly_balanced: true,
            k2_balanced: true,
            m_balanced: true,
            witness: None,
        };
        for s in 1..=full {
            let vh = s.count_ones() as i64;
            let eh = induced_edges(&self.adj, s) as i64;
            // e(H)/v(H) against e/v
            if eh * v > e * vh {
                rep.balanced = false;
            }
            if s != full && eh * v >= e * vh {
                rep.strictly_balanced = false;
            }
            if vh >= 2 && !ratio_le(eh, vh - 1, e, v - 1) {
                rep.strongly_balanced = false;
            }
            if vh >= 3 && !ratio_le(eh - 1, vh - 2, e - 1, v - 2) {
                rep.k2_balanced = false;
            }
            if vh >= m + 2 && !ratio_le(eh - a, vh - m - 1, e - a, v - m - 1) {
                if rep.m_balanced {
                    rep.witness = Some(mask_labels(s));
                }
                rep.m_balanced = false;
            }
        }
        rep
    }

    /// Permutations of the core that preserve core edges and each core
    /// vertex's set of attached endpoints. Endpoints stay fixed.
    pub fn automorphism_count(&self) -> u64 {
        let mut perm = vec![usize::MAX; self.r];
        let mut used = 0u64;
        self.count_automorphisms(0, &mut perm, &mut used)
    }

    fn count_automorphisms(&self, i: usize, perm: &mut [usize], used: &mut u64) -> u64 {
        if i == self.r {
            return 1;
        }
        let mut total = 0;
        for t in 0..self.r {
            if *used >> t & 1 == 1 || self.attachment(i) != self.attachment(t) {
                continue;
            }
            if self.core_neighbors(i).count_ones() != self.core_neighbors(t).count_ones() {
                continue;
            }
            let consistent = (0..i).all(|p| {
                let here = self.adj[i] >> p & 1;
                let there = self.adj[t] >> perm[p] & 1;
                here == there
            });
            if !consistent {
                continue;
            }
            perm[i] = t;
            *used |= 1 << t;
            total += self.count_automorphisms(i + 1, perm, used);
            *used &= !(1 << t);
        }
        perm[i] = usize::MAX;
        total
    }

    /// The critical decay exponent `max((r-1)/(e-a), r/e)`.
    pub fn critical_exponent(&self) -> Rational {
        let r = self.r as i64;
        let e = self.edge_count() as i64;
        let a = self.endpoint_degree_max() as i64;
        Rational::new(r - 1, e - a).max(Rational::new(r, e))
    }

    /// A complete isomorphism invariant under relabelling of core vertices
    /// and of endpoints (endpoints are interchangeable among themselves but
    /// never swapped with cores).
    pub fn canonical_form(&self) -> CanonicalTemplate {
        let core_adj: Vec<u64> = (0..self.r).map(|i| self.core_neighbors(i)).collect();
        let ep_nbrs: Vec<u64> = (0..self.m).map(|k| self.endpoint_neighbors(k)).collect();
        canonical_template(&core_adj, &ep_nbrs)
    }
}

/// Canonical form of a graph on `core_adj.len()` core vertices with
/// endpoints given by their core neighbourhoods.
pub(crate) fn canonical_template(core_adj: &[u64], ep_nbrs: &[u64]) -> CanonicalTemplate {
    let r = core_adj.len();
    let colors = refine_colors(core_adj, ep_nbrs);
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by_key(|&i| colors[i]);
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        if k == 0 || colors[order[k - 1]] != colors[i] {
            cells.push(Vec::new());
        }
        cells.last_mut().unwrap().push(i);
    }

    let mut best: Option<CanonicalTemplate> = None;
    let mut new_of_old = vec![0usize; r];
    let mut slots: Vec<usize> = Vec::with_capacity(r);
    visit_cell_permutations(&mut cells, 0, &mut |cp| {
        slots.clear();
        for cell in cp {
            slots.extend_from_slice(cell);
        }
        for (new, &old) in slots.iter().enumerate() {
            new_of_old[old] = new;
        }
        let mut bits = vec![0u64; (r * r.saturating_sub(1) / 2).div_ceil(64)];
        let mut pos = 0;
        for a in 0..r {
            for b in a + 1..r {
                if core_adj[slots[a]] >> slots[b] & 1 == 1 {
                    bits[pos / 64] |= 1 << (pos % 64);
                }
                pos += 1;
            }
        }
        let mut eps: Vec<u64> = ep_nbrs
            .iter()
            .map(|&nb| iter_bits(nb).map(|old| 1u64 << new_of_old[old]).sum())
            .collect();
        eps.sort_unstable();
        let cand = CanonicalTemplate {
            r,
            m: ep_nbrs.len(),
            core_bits: bits,
            endpoint_sets: eps,
        };
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    });
    best.expect("at least one labelling")
}

/// Colour refinement on the cores. Colours are ranks of label-free
/// signatures, so isomorphic inputs get matching colour classes.
fn refine_colors(core_adj: &[u64], ep_nbrs: &[u64]) -> Vec<u32> {
    let r = core_adj.len();
    // endpoints attached to a core, described by their degrees
    let mut colors: Vec<u32> = {
        let sig: Vec<(u32, Vec<u32>)> = (0..r)
            .map(|i| {
                let mut eps: Vec<u32> = ep_nbrs
                    .iter()
                    .filter(|&&nb| nb >> i & 1 == 1)
                    .map(|nb| nb.count_ones())
                    .collect();
                eps.sort_unstable();
                (core_adj[i].count_ones(), eps)
            })
            .collect();
        rank(&sig)
    };
    let mut classes = count_distinct(&colors);
    loop {
        let sig: Vec<(u32, Vec<u32>, Vec<Vec<u32>>)> = (0..r)
            .map(|i| {
                let mut nb: Vec<u32> = iter_bits(core_adj[i]).map(|j| colors[j]).collect();
                nb.sort_unstable();
                let mut eps: Vec<Vec<u32>> = ep_nbrs
                    .iter()
                    .filter(|&&mask| mask >> i & 1 == 1)
                    .map(|&mask| {
                        let mut c: Vec<u32> = iter_bits(mask).map(|j| colors[j]).collect();
                        c.sort_unstable();
                        c
                    })
                    .collect();
                eps.sort_unstable();
                (colors[i], nb, eps)
            })
            .collect();
        let next = rank(&sig);
        let next_classes = count_distinct(&next);
        colors = next;
        if next_classes == classes {
            return colors;
        }
        classes = next_classes;
    }
}

fn rank<T: Ord + Clone>(sig: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = sig.to_vec();
    sorted.sort();
    sorted.dedup();
    sig.iter().map(|s| sorted.binary_search(s).unwrap() as u32).collect()
}

fn count_distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Canonical encoding of an [`EndpointGraph`] up to core and endpoint relabelling.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalTemplate {
    pub r: usize,
    pub m: usize,
    core_bits: Vec<u64>,
    endpoint_sets: Vec<u64>,
}

fn visit_cell_permutations(cells: &mut [Vec<usize>], idx: usize, f: &mut impl FnMut(&[Vec<usize>])) {
    if idx == cells.len() {
        f(cells);
        return;
    }
    let len = cells[idx].len();
    heap_permute(cells, idx, len, f);
}

fn heap_permute(cells: &mut [Vec<usize>], idx: usize, k: usize, f: &mut impl FnMut(&[Vec<usize>])) {
    if k <= 1 {
        visit_cell_permutations(cells, idx + 1, f);
        return;
    }
    for i in 0..k - 1 {
        heap_permute(cells, idx, k - 1, f);
        if k.is_multiple_of(2) {
            cells[idx].swap(i, k - 1);
        } else {
            cells[idx].swap(0, k - 1);
        }
    }
    heap_permute(cells, idx, k - 1, f);
}

/// Balance predicates evaluated over all induced subgraphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceReport {
    pub balanced: bool,
    pub strictly_balanced: bool,
    pub strongly_balanced: bool,
    pub k2_balanced: bool,
    /// `(e(H)-a)/(v(H)-m-1) <= (e(G)-a)/(v(G)-m-1)` for every induced `H`
    /// with at least `m+2` vertices, `a` being the endpoint degree maximum.
    pub m_balanced: bool,
    /// 1-based vertex labels of the first induced subgraph found that breaks
    /// the endpoint-density condition.
    pub witness: Option<Vec<usize>>,
}

/// `n1/d1 <= n2/d2` for non-negative denominators, with `0/0 = 0`.
pub(crate) fn ratio_le(n1: i64, d1: i64, n2: i64, d2: i64) -> bool {
    debug_assert!(d1 >= 0 && d2 >= 0);
    match (d1 == 0, d2 == 0) {
        (false, false) => n1 * d2 <= n2 * d1,
        (true, false) => n1 <= 0,
        (false, true) => n2 >= 0,
        (true, true) => (n1 > 0) <= (n2 > 0) && !(n1 == 0 && n2 < 0),
    }
}

pub(crate) fn induced_edges(adj: &[u64], s: u64) -> u32 {
    iter_bits(s).map(|i| (adj[i] & s).count_ones()).sum::<u32>() / 2
}

pub(crate) fn iter_bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

fn mask_labels(s: u64) -> Vec<usize> {
    iter_bits(s).map(|i| i + 1).collect()
}

/// Whether the vertices in `within` induce a connected graph.
pub(crate) fn mask_connected(adj: &[u64], within: u64) -> bool {
    if within == 0 {
        return true;
    }
    let mut seen = 1u64 << within.trailing_zeros();
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0;
        for i in iter_bits(frontier) {
            next |= adj[i] & within;
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == within
}

impl fmt::Display for EndpointGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect();
        write!(f, "r={} m={} edges={}", self.r, self.m, edges.join(","))
    }
}

impl FromStr for EndpointGraph {
    type Err = GraphError;

    /// Parses `r=<int> m=<int> edges=<a>-<b>,...` with 1-based labels.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: String| GraphError::Malformed(msg);
        let (mut r, mut m, mut edges) = (None, None, None);
        for tok in s.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, found `{tok}`")))?;
            let slot_taken = match key {
                "r" => r.replace(parse_count(val, "r")?).is_some(),
                "m" => m.replace(parse_count(val, "m")?).is_some(),
                "edges" => edges.replace(parse_edges(val)?).is_some(),
                other => return Err(bad(format!("unknown key `{other}`"))),
            };
            if slot_taken {
                return Err(bad(format!("key `{key}` given twice")));
            }
        }
        let r = r.ok_or_else(|| bad("missing r=".into()))?;
        let m = m.ok_or_else(|| bad("missing m=".into()))?;
        let edges = edges.ok_or_else(|| bad("missing edges=".into()))?;
        EndpointGraph::new(r, m, &edges)
    }
}

fn parse_count(val: &str, key: &str) -> Result<usize, GraphError> {
    val.parse()
        .map_err(|_| GraphError::Malformed(format!("`{key}={val}` is not a non-negative integer")))
}

fn parse_edges(val: &str) -> Result<Vec<(usize, usize)>, GraphError> {
    if val.is_empty() {
        return Ok(Vec::new());
    }
    val.split(',')
        .map(|pair| {
            let (a, b) = pair
                .split_once('-')
                .ok_or_else(|| GraphError::Malformed(format!("edge `{pair}` is not of the form a-b")))?;
            let a = a
                .parse()
                .map_err(|_| GraphError::Malformed(format!("bad vertex `{a}`")))?;
            let b = b
                .parse()
                .map_err(|_| GraphError::Malformed(format!("bad vertex `{b}`")))?;
            Ok((a, b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> EndpointGraph {
        s.parse().unwrap()
    }

    fn triangle() -> EndpointGraph {
        g("r=3 m=0 edges=1-2,2-3,3-1")
    }

    fn rooted_c4() -> EndpointGraph {
        g("r=3 m=1 edges=1-2,2-3,1-4,3-4")
    }

    #[test]
    fn parses_triangle() {
        let t = triangle();
        assert_eq!((t.r(), t.m(), t.edge_count()), (3, 0, 3));
        assert_eq!(t.edges(), vec![(1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn parses_rooted_four_cycle() {
        let c = rooted_c4();
        assert_eq!(c.core_edge_count(), 2);
        assert_eq!(c.endpoint_neighbors(0), 0b101);
        assert_eq!(c.to_string(), "r=3 m=1 edges=1-2,1-4,2-3,3-4");
    }

    #[test]
    fn rejects_duplicate_edge() {
        let err = "r=2 m=0 edges=1-2,2-1".parse::<EndpointGraph>().unwrap_err();
        assert!(matches!(err, GraphError::Malformed(ref s) if s.contains("duplicate")));
    }

    #[test]
    fn rejects_assumption_violations() {
        let cases = [
            (
                "r=3 m=2 edges=1-2,2-3,1-4,4-5",
                AssumptionViolation::AdjacentEndpoints(4, 5),
            ),
            ("r=3 m=0 edges=1-2", AssumptionViolation::DisconnectedCore(3)),
            ("r=2 m=1 edges=1-2", AssumptionViolation::IsolatedEndpoint(3)),
            ("r=1 m=1 edges=1-2", AssumptionViolation::CoreTooSmall(1)),
        ];
        for (text, want) in cases {
            assert_eq!(text.parse::<EndpointGraph>().unwrap_err(), GraphError::Assumption(want));
        }
    }

    #[test]
    fn rejects_malformed_text() {
        for text in [
            "r=3 m=0",
            "r=x m=0 edges=",
            "r=2 m=0 edges=1-2 r=2",
            "r=2 m=0 edges=1-3",
            "r=2 m=0 edges=1-1",
            "r=2 m=0 edges=12",
        ] {
            assert!(
                matches!(text.parse::<EndpointGraph>(), Err(GraphError::Malformed(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn endpoint_degree_examples() {
        assert_eq!(triangle().endpoint_degree_max(), 0);
        assert_eq!(rooted_c4().endpoint_degree_max(), 1);
        assert_eq!(g("r=3 m=2 edges=1-2,2-3,3-1,1-4,1-5").endpoint_degree_max(), 2);
    }

    #[test]
    fn balance_examples() {
        let t = triangle().balance_report();
        assert!(t.strongly_balanced && t.k2_balanced && t.m_balanced);

        let pendant = g("r=4 m=0 edges=1-2,2-3,3-4,1-3").balance_report();
        assert!(!pendant.strongly_balanced);
        assert!(!pendant.m_balanced);
        // the triangle 1,2,3 is the densest part
        assert_eq!(pendant.witness, Some(vec![1, 2, 3]));

        // exhaustive by hand for the path 1-2-3: subsets {1,2},{2,3} have
        // ratio 1, {1,3} ratio 0, whole graph 2/2 = 1
        let p3 = g("r=3 m=0 edges=1-2,2-3").balance_report();
        assert!(p3.strongly_balanced);
        assert!(p3.witness.is_none());
    }

    #[test]
    fn tree_with_spread_endpoints_is_not_m_balanced() {
        // endpoints on both ends of a path: m=2 > a=1
        let t = g("r=3 m=2 edges=1-2,2-3,1-4,3-5");
        assert!(t.is_tree());
        assert!(!t.balance_report().m_balanced);
        let same = g("r=3 m=2 edges=1-2,2-3,1-4,1-5");
        assert!(same.balance_report().m_balanced);
    }

    #[test]
    fn automorphism_examples() {
        assert_eq!(triangle().automorphism_count(), 6);
        assert_eq!(g("r=3 m=0 edges=1-2,2-3").automorphism_count(), 2);
        assert_eq!(rooted_c4().automorphism_count(), 2);
        assert_eq!(g("r=4 m=0 edges=1-2,2-3,3-4,4-1").automorphism_count(), 8);
        // the endpoint on core 1 breaks the triangle's symmetry down to the swap of 2 and 3
        assert_eq!(g("r=3 m=1 edges=1-2,2-3,3-1,1-4").automorphism_count(), 2);
    }

    #[test]
    fn critical_exponent_examples() {
        assert_eq!(triangle().critical_exponent(), Rational::from_integer(1));
        assert_eq!(
            g("r=4 m=0 edges=1-2,2-3,3-4,4-1").critical_exponent(),
            Rational::from_integer(1)
        );
        assert_eq!(rooted_c4().critical_exponent(), Rational::new(3, 4));
    }

    #[test]
    fn canonical_form_ignores_labelling() {
        let a = g("r=4 m=1 edges=1-2,2-3,3-4,1-5");
        let b = g("r=4 m=1 edges=4-3,3-2,2-1,4-5");
        let c = g("r=4 m=1 edges=1-2,2-3,3-4,2-5");
        assert_eq!(a.canonical_form(), b.canonical_form());
        assert_ne!(a.canonical_form(), c.canonical_form());
        let two = g("r=2 m=2 edges=1-2,1-3,2-4");
        let swapped = g("r=2 m=2 edges=1-2,2-3,1-4");
        assert_eq!(two.canonical_form(), swapped.canonical_form());
    }

    #[test]
    fn ratio_le_zero_over_zero() {
        assert!(ratio_le(0, 0, 1, 2));
        assert!(ratio_le(1, 2, 1, 2));
        assert!(!ratio_le(3, 2, 1, 1));
        assert!(!ratio_le(1, 0, 5, 1));
    }
}
