//! Decoder for the graph6 text format (short form, up to 62 vertices).

use std::io::BufRead;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Graph6Error {
    #[error("bad graph6 input: {0}")]
    BadGraph6(String),
    #[error("failed to read graph6 input: {0}")]
    Io(String),
}

/// Symmetric 0/1 adjacency over `n` vertices, one bit mask per row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdjacencyMatrix {
    n: usize,
    rows: Vec<u64>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        assert!(n <= 64, "at most 64 vertices");
        AdjacencyMatrix { n, rows: vec![0; n] }
    }

    pub fn from_rows(rows: Vec<u64>) -> Self {
        let n = rows.len();
        let mut g = AdjacencyMatrix::empty(n);
        for (i, &row) in rows.iter().enumerate() {
            for j in crate::graph_model::iter_bits(row) {
                if j != i && j < n {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        self.rows[i] |= 1 << j;
        self.rows[j] |= 1 << i;
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let all = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        crate::graph_model::mask_connected(&self.rows, all)
    }
}

/// Decodes one graph6 line. Trailing newline characters are ignored.
pub fn parse_graph6(line: &[u8]) -> Result<AdjacencyMatrix, Graph6Error> {
    let bad = |msg: &str| Graph6Error::BadGraph6(msg.to_string());
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    let line = line.strip_suffix(b"\r").unwrap_or(line);
    let line = line.strip_prefix(b">>graph6<<").unwrap_or(line);
    let (&head, body) = line.split_first().ok_or_else(|| bad("empty line"))?;
    if head == b':' || head == b';' {
        return Err(bad("sparse6 and digraph6 lines are not supported"));
    }
    if head == 126 {
        return Err(bad("only the short form with at most 62 vertices is supported"));
    }
    if !(63..=125).contains(&head) {
        return Err(bad("header byte outside 63..=125"));
    }
    let n = (head - 63) as usize;
    let nbits = n * n.saturating_sub(1) / 2;
    let nchars = nbits.div_ceil(6);
    if body.len() != nchars {
        return Err(Graph6Error::BadGraph6(format!(
            "expected {nchars} data bytes for {n} vertices, found {}",
            body.len()
        )));
    }
    let mut g = AdjacencyMatrix::empty(n);
    let mut k = 0;
    for (c, &byte) in body.iter().enumerate() {
        if !(63..=126).contains(&byte) {
            return Err(bad("data byte outside 63..=126"));
        }
        let chunk = byte - 63;
        for b in 0..6 {
            let set = chunk >> (5 - b) & 1 == 1;
            let bit = c * 6 + b;
            if bit >= nbits {
                if set {
                    return Err(bad("nonzero padding bits"));
                }
                continue;
            }
            if set {
                let (i, j) = bit_to_pair(k);
                g.add_edge(i, j);
            }
            k += 1;
        }
    }
    Ok(g)
}

/// Bits run over the upper triangle column by column: (0,1), (0,2), (1,2), (0,3), ...
fn bit_to_pair(k: usize) -> (usize, usize) {
    let mut j = 1;
    let mut start = 0;
    while start + j <= k {
        start += j;
        j += 1;
    }
    (k - start, j)
}

/// Reads every non-empty line of a graph6 stream.
pub fn read_graph6<R: BufRead>(reader: R) -> Result<Vec<AdjacencyMatrix>, Graph6Error> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Graph6Error::Io(e.to_string()))?;
        let trimmed = line.trim_end();
        if trimmed.is_empty() {
            continue;
        }
        let g = parse_graph6(trimmed.as_bytes()).map_err(|e| match e {
            Graph6Error::BadGraph6(msg) => Graph6Error::BadGraph6(format!("line {}: {msg}", lineno + 1)),
            other => other,
        })?;
        out.push(g);
    }
    Ok(out)
}
