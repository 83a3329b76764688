use rcm_core::census::{census, census_generated, connected_graphs, template_classes, CensusError};
use rcm_core::graph6::{read_graph6, AdjacencyMatrix};

/// Strong balance from scratch: `e(H)/(v(H)-1) <= e(G)/(v(G)-1)` for all
/// induced `H` on at least two vertices.
fn strongly_balanced(adj: &AdjacencyMatrix) -> bool {
    let n = adj.n();
    let e = |mask: u64| -> i64 {
        let mut c = 0;
        for i in 0..n {
            for j in i + 1..n {
                if mask >> i & 1 == 1 && mask >> j & 1 == 1 && adj.has_edge(i, j) {
                    c += 1;
                }
            }
        }
        c
    };
    let full = (1u64 << n) - 1;
    let (eg, vg) = (e(full), n as i64);
    (1..=full)
        .filter(|m: &u64| m.count_ones() >= 2)
        .all(|m| e(m) * (vg - 1) <= eg * (m.count_ones() as i64 - 1))
}

fn to_graph6(adj: &AdjacencyMatrix) -> String {
    let n = adj.n();
    let bits: Vec<bool> = (1..n)
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .map(|(i, j)| adj.has_edge(i, j))
        .collect();
    let mut s = String::from((n as u8 + 63) as char);
    for chunk in bits.chunks(6) {
        let v = chunk
            .iter()
            .enumerate()
            .fold(0u8, |acc, (k, &b)| acc | (b as u8) << (5 - k));
        s.push((v + 63) as char);
    }
    s
}

#[test]
fn strongly_balanced_row_matches_independent_sweep() {
    for r in 2..=6 {
        let graphs = connected_graphs(r);
        let want = graphs.iter().filter(|g| strongly_balanced(g)).count() as u64;
        assert_eq!(census_generated(r, 0).unwrap().g, want, "r={r}");
    }
}

#[test]
fn tree_column_depends_only_on_r() {
    for r in 3..=5 {
        let ts: Vec<u64> = (1..=7 - r).map(|m| census_generated(r, m).unwrap().t).collect();
        assert!(ts.windows(2).all(|w| w[0] == w[1]), "r={r}: {ts:?}");
    }
}

#[test]
fn assumption_column_grows_with_m() {
    for r in 2..=5 {
        let a: Vec<u64> = (0..=7 - r).map(|m| census_generated(r, m).unwrap().a).collect();
        assert!(a.windows(2).all(|w| w[0] <= w[1]), "r={r}: {a:?}");
    }
}

#[test]
fn graph6_source_agrees_with_the_generator() {
    let text: String = connected_graphs(5).iter().map(|g| to_graph6(g) + "\n").collect();
    let parsed = read_graph6(text.as_bytes()).unwrap();
    for (r, m) in [(5, 0), (4, 1), (3, 2), (2, 3)] {
        assert_eq!(census(r, m, &parsed).unwrap(), census_generated(r, m).unwrap());
    }
}

#[test]
fn duplicate_sources_do_not_inflate_counts() {
    let mut graphs = connected_graphs(4);
    graphs.extend(connected_graphs(4));
    assert_eq!(census(3, 1, &graphs).unwrap().csv(), "3,1,2,6,8");
    assert_eq!(template_classes(3, 1, &graphs).len(), 8);
}

#[test]
fn generator_counts_and_errors() {
    let counts: Vec<usize> = (1..=7).map(|v| connected_graphs(v).len()).collect();
    assert_eq!(counts, vec![1, 1, 2, 6, 21, 112, 853]);
    assert_eq!(census_generated(1, 2).unwrap_err(), CensusError::CoreTooSmall(1));
    assert_eq!(
        census(2, 1, &connected_graphs(4)).unwrap_err(),
        CensusError::WrongOrder { got: 4, want: 3 }
    );
}
