use proptest::prelude::*;
use rcm_core::census::generated_templates;
use rcm_core::graph6::{parse_graph6, read_graph6, AdjacencyMatrix};
use rcm_core::graph_model::AssumptionViolation;
use rcm_core::{EndpointGraph, GraphError, Rational};

fn all_templates(max_v: usize) -> Vec<EndpointGraph> {
    let mut out = Vec::new();
    for r in 2..=max_v {
        for m in 0..=max_v - r {
            out.extend(generated_templates(r, m));
        }
    }
    out
}

/// Reference graph6 writer for graphs on fewer than 63 vertices.
fn encode_graph6(adj: &AdjacencyMatrix) -> String {
    let n = adj.n();
    let mut bits = Vec::new();
    for j in 1..n {
        for i in 0..j {
            bits.push(adj.has_edge(i, j));
        }
    }
    let mut out = String::new();
    out.push((n as u8 + 63) as char);
    for chunk in bits.chunks(6) {
        let mut v = 0u8;
        for (k, &b) in chunk.iter().enumerate() {
            if b {
                v |= 1 << (5 - k);
            }
        }
        out.push((v + 63) as char);
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Core permutations preserving core edges and every endpoint's neighbourhood.
fn brute_automorphisms(g: &EndpointGraph) -> u64 {
    let core = g.core_edges();
    let ends: Vec<u64> = (0..g.m()).map(|k| g.endpoint_neighbors(k)).collect();
    permutations(g.r())
        .into_iter()
        .filter(|p| {
            core.iter().all(|&(i, j)| g.core_neighbors(p[i]) >> p[j] & 1 == 1)
                && ends.iter().all(|&mask| {
                    let image = (0..g.r())
                        .filter(|&i| mask >> i & 1 == 1)
                        .fold(0u64, |acc, i| acc | 1 << p[i]);
                    image == mask
                })
        })
        .count() as u64
}

#[test]
fn m_balance_reduces_to_the_classical_notions() {
    for g in all_templates(6) {
        let rep = g.balance_report();
        match g.m() {
            0 => assert_eq!(rep.m_balanced, rep.strongly_balanced, "{g}"),
            1 => assert_eq!(rep.m_balanced, rep.k2_balanced, "{g}"),
            _ => {}
        }
        if rep.strictly_balanced {
            assert!(rep.balanced, "{g}");
        }
        assert_eq!(rep.witness.is_none(), rep.m_balanced, "{g}");
    }
}

#[test]
fn endpoint_degree_and_critical_exponent() {
    for g in all_templates(6) {
        let a = g.endpoint_degree_max();
        assert!(a <= g.m(), "{g}");
        assert_eq!(a >= 1, g.m() >= 1, "{g}");
        assert!(g.critical_exponent() > Rational::from_integer(0), "{g}");
    }
}

#[test]
fn automorphisms_match_brute_force() {
    for g in all_templates(6) {
        let aut = g.automorphism_count();
        assert_eq!(aut, brute_automorphisms(&g), "{g}");
        let fact: u64 = (1..=g.r() as u64).product();
        assert_eq!(fact % aut, 0, "{g}");
    }
}

#[test]
fn complete_cores_with_symmetric_attachment() {
    for r in 2..=6usize {
        for m in 0..=2usize {
            let mut edges = Vec::new();
            for i in 1..=r {
                for j in i + 1..=r {
                    edges.push((i, j));
                }
                for k in 0..m {
                    edges.push((i, r + 1 + k));
                }
            }
            let g = EndpointGraph::new(r, m, &edges).unwrap();
            assert_eq!(g.automorphism_count(), (1..=r as u64).product::<u64>());
        }
    }
}

#[test]
fn text_round_trip_and_errors() {
    for g in all_templates(5) {
        let back: EndpointGraph = g.to_string().parse().unwrap();
        assert_eq!(back, g);
    }
    let err = "r=3 m=1 edges=1-2,2-3".parse::<EndpointGraph>().unwrap_err();
    assert_eq!(err, GraphError::Assumption(AssumptionViolation::IsolatedEndpoint(4)));
}

#[test]
fn graph6_reader_handles_headers_and_line_numbers() {
    let text = b">>graph6<<Bw\nDQc\n\n" as &[u8];
    let graphs = read_graph6(text).unwrap();
    assert_eq!(graphs.len(), 2);
    assert_eq!(graphs[0].edge_count(), 3);
    let err = read_graph6(b"Bw\nA@\n" as &[u8]).unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
}

fn arb_adjacency() -> impl Strategy<Value = AdjacencyMatrix> {
    (1usize..24).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut adj = AdjacencyMatrix::empty(n);
            let mut k = 0;
            for j in 1..n {
                for i in 0..j {
                    if bits[k] {
                        adj.add_edge(i, j);
                    }
                    k += 1;
                }
            }
            adj
        })
    })
}

fn arb_template() -> impl Strategy<Value = (EndpointGraph, Vec<usize>, Vec<usize>)> {
    let pool = all_templates(6);
    prop::sample::select(pool).prop_flat_map(|g| {
        let cores = Just((0..g.r()).collect::<Vec<_>>()).prop_shuffle();
        let ends = Just((0..g.m()).collect::<Vec<_>>()).prop_shuffle();
        (Just(g), cores, ends)
    })
}

proptest! {
    #[test]
    fn graph6_round_trip(adj in arb_adjacency()) {
        let text = encode_graph6(&adj);
        let parsed = parse_graph6(text.as_bytes()).unwrap();
        prop_assert_eq!(&parsed, &adj);
        prop_assert_eq!(encode_graph6(&parsed), text);
    }

    #[test]
    fn invariants_survive_relabelling((g, pc, pe) in arb_template()) {
        let r = g.r();
        let map = |v: usize| if v <= r { pc[v - 1] + 1 } else { r + pe[v - r - 1] + 1 };
        let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(a, b)| (map(a), map(b))).collect();
        let h = EndpointGraph::new(r, g.m(), &edges).unwrap();
        prop_assert_eq!(h.canonical_form(), g.canonical_form());
        prop_assert_eq!(h.automorphism_count(), g.automorphism_count());
        let (a, b) = (h.balance_report(), g.balance_report());
        prop_assert_eq!(
            (a.balanced, a.strictly_balanced, a.strongly_balanced, a.k2_balanced, a.m_balanced),
            (b.balanced, b.strictly_balanced, b.strongly_balanced, b.k2_balanced, b.m_balanced)
        );
        prop_assert_eq!(h.critical_exponent(), g.critical_exponent());
    }
}
