//! Set partitions of the grid `[n]×[r]`.
//!
//! Cells are addressed 0-based internally as `(row, col)` and laid out in
//! row-major order. A partition is stored as a restricted-growth string:
//! `labels[k]` is the block of cell `k`, and blocks are numbered in order
//! of their smallest cell.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

pub const DEFAULT_BUDGET: usize = 12;

/// Hard cap on grid size, imposed by bit-mask bookkeeping of blocks.
pub const MAX_CELLS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("grid of {cells} cells exceeds the enumeration budget of {budget} (raise --budget)")]
    BudgetExceeded { cells: usize, budget: usize },
    #[error("invalid partition: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    n: usize,
    r: usize,
    labels: Vec<u8>,
    block_count: usize,
}

impl SetPartition {
    /// Builds a partition from 1-based `(row, col)` cells.
    pub fn from_blocks(n: usize, r: usize, blocks: &[Vec<(usize, usize)>]) -> Result<Self, PartitionError> {
        let cells = n * r;
        if cells > MAX_CELLS {
            return Err(PartitionError::Invalid(format!("grid exceeds {MAX_CELLS} cells")));
        }
        let mut raw = vec![usize::MAX; cells];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(PartitionError::Invalid(format!("block {} is empty", b + 1)));
            }
            for &(i, j) in block {
                if i == 0 || j == 0 || i > n || j > r {
                    return Err(PartitionError::Invalid(format!("cell ({i},{j}) outside [{n}]x[{r}]")));
                }
                let k = (i - 1) * r + (j - 1);
                if raw[k] != usize::MAX {
                    return Err(PartitionError::Invalid(format!("cell ({i},{j}) appears twice")));
                }
                raw[k] = b;
            }
        }
        if let Some(k) = raw.iter().position(|&b| b == usize::MAX) {
            return Err(PartitionError::Invalid(format!(
                "cell ({},{}) is not covered",
                k / r + 1,
                k % r + 1
            )));
        }
        Ok(Self::from_raw_labels(n, r, &raw))
    }

    /// Renumbers arbitrary block ids into restricted-growth form.
    pub fn from_raw_labels(n: usize, r: usize, raw: &[usize]) -> Self {
        assert_eq!(raw.len(), n * r);
        let mut map = std::collections::HashMap::new();
        let labels: Vec<u8> = raw
            .iter()
            .map(|&b| {
                let next = map.len() as u8;
                *map.entry(b).or_insert(next)
            })
            .collect();
        SetPartition {
            n,
            r,
            labels,
            block_count: map.len(),
        }
    }

    /// All cells in singleton blocks (the finest partition).
    pub fn singletons(n: usize, r: usize) -> Self {
        let raw: Vec<usize> = (0..n * r).collect();
        Self::from_raw_labels(n, r, &raw)
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.r
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    /// Block index of each cell in row-major order.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn block_of(&self, row: usize, col: usize) -> usize {
        self.labels[row * self.r + col] as usize
    }

    /// Blocks as sorted lists of 0-based `(row, col)` cells.
    pub fn blocks(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.block_count];
        for (k, &b) in self.labels.iter().enumerate() {
            out[b as usize].push((k / self.r, k % self.r));
        }
        out
    }

    pub fn is_nonflat(&self) -> bool {
        self.labels.chunks(self.r).all(|row| {
            let mut seen = 0u64;
            row.iter().all(|&b| {
                let fresh = seen >> b & 1 == 0;
                seen |= 1 << b;
                fresh
            })
        })
    }

    /// Whether the multi-row blocks link all rows into one component.
    pub fn is_connected(&self) -> bool {
        let mut rows = RowUnion::new(self.n);
        let mut first_row = vec![usize::MAX; self.block_count];
        for (k, &b) in self.labels.iter().enumerate() {
            let row = k / self.r;
            match first_row[b as usize] {
                usize::MAX => first_row[b as usize] = row,
                f => rows.union(f, row),
            }
        }
        rows.components() == 1
    }

    /// The partition of the remaining `(n-1)×r` grid after deleting row `i`.
    pub fn remove_row(&self, i: usize) -> SetPartition {
        assert!(i < self.n && self.n >= 2);
        let raw: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(k, _)| k / self.r != i)
            .map(|(_, &b)| b as usize)
            .collect();
        Self::from_raw_labels(self.n - 1, self.r, &raw)
    }
}

impl fmt::Display for SetPartition {
    /// Blocks separated by `;`, each as its 1-based cells `(i,j)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (b, block) in self.blocks().iter().enumerate() {
            if b > 0 {
                f.write_str(";")?;
            }
            for &(i, j) in block {
                write!(f, "({},{})", i + 1, j + 1)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct RowUnion {
    parent: [u8; MAX_CELLS],
    comps: usize,
}

impl RowUnion {
    fn new(n: usize) -> Self {
        let mut parent = [0u8; MAX_CELLS];
        for (i, p) in parent.iter_mut().enumerate() {
            *p = i as u8;
        }
        RowUnion { parent, comps: n }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let up = self.parent[self.parent[x] as usize];
            self.parent[x] = up;
            x = up as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb) as u8;
            self.comps -= 1;
        }
    }

    fn components(&self) -> usize {
        self.comps
    }
}

/// Which partitions an enumeration yields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionClass {
    All,
    NonFlat,
    ConnectedNonFlat,
}

/// Borrowed view of one enumerated partition.
#[derive(Debug, Clone, Copy)]
pub struct PartitionView<'a> {
    pub n: usize,
    pub r: usize,
    pub labels: &'a [u8],
    pub block_count: usize,
}

impl PartitionView<'_> {
    pub fn to_owned(&self) -> SetPartition {
        SetPartition {
            n: self.n,
            r: self.r,
            labels: self.labels.to_vec(),
            block_count: self.block_count,
        }
    }
}

#[derive(Clone, Copy)]
struct State {
    labels: [u8; MAX_CELLS],
    /// first row holding each block
    first_row: [u8; MAX_CELLS],
    blocks: usize,
    row_used: u64,
    rows: RowUnion,
}

struct Walker {
    n: usize,
    r: usize,
    class: PartitionClass,
}

impl Walker {
    fn cells(&self) -> usize {
        self.n * self.r
    }

    fn initial(&self) -> (State, usize) {
        let mut st = State {
            labels: [0; MAX_CELLS],
            first_row: [0; MAX_CELLS],
            blocks: 0,
            row_used: 0,
            rows: RowUnion::new(self.n),
        };
        if self.class == PartitionClass::All {
            return (st, 0);
        }
        // non-flat forces the first row into distinct blocks 0..r
        for j in 0..self.r {
            st.labels[j] = j as u8;
            st.first_row[j] = 0;
        }
        st.blocks = self.r;
        (st, self.r)
    }

    /// Extends `st` at cell `pos` with every admissible label, calling `next`.
    fn branch(&self, st: &State, pos: usize, mut next: impl FnMut(&State)) {
        let row = pos / self.r;
        let col = pos % self.r;
        let row_used = if col == 0 { 0 } else { st.row_used };
        let nonflat = self.class != PartitionClass::All;
        let connected = self.class == PartitionClass::ConnectedNonFlat;
        for b in 0..=st.blocks {
            if nonflat && row_used >> b & 1 == 1 {
                continue;
            }
            let mut child = *st;
            child.labels[pos] = b as u8;
            child.row_used = row_used | 1 << b;
            if b == st.blocks {
                child.first_row[b] = row as u8;
                child.blocks += 1;
            } else {
                child.rows.union(child.first_row[b] as usize, row);
            }
            if connected {
                let remaining = self.cells() - pos - 1;
                if remaining + 1 < child.rows.components() {
                    continue;
                }
            }
            next(&child);
        }
    }

    fn walk(&self, st: &State, pos: usize, f: &mut impl FnMut(PartitionView<'_>)) {
        if pos == self.cells() {
            if self.class == PartitionClass::ConnectedNonFlat && st.rows.components() != 1 {
                return;
            }
            f(PartitionView {
                n: self.n,
                r: self.r,
                labels: &st.labels[..self.cells()],
                block_count: st.blocks,
            });
            return;
        }
        self.branch(st, pos, |child| self.walk(child, pos + 1, f));
    }

    /// Collects states at a fixed depth so the remaining work can be split.
    fn frontier(&self, target: usize) -> (Vec<State>, usize) {
        let (root, start) = self.initial();
        let mut level = vec![root];
        let mut pos = start;
        while pos < self.cells() && pos < target {
            let mut next_level = Vec::new();
            for st in &level {
                self.branch(st, pos, |c| next_level.push(*c));
            }
            level = next_level;
            pos += 1;
        }
        (level, pos)
    }
}

fn check_budget(n: usize, r: usize, budget: usize) -> Result<(), PartitionError> {
    let cells = n * r;
    if cells > budget || cells > MAX_CELLS {
        return Err(PartitionError::BudgetExceeded {
            cells,
            budget: budget.min(MAX_CELLS),
        });
    }
    Ok(())
}

/// Folds over every partition of `class` in parallel.
///
/// Each chunk starts from `init()`, partitions are visited in
/// restricted-growth lexicographic order within a chunk, and chunk results
/// are combined left to right with `reduce`, so the result is independent
/// of the thread count whenever `reduce` is associative.
pub fn fold_partitions<T, I, F, R>(
    n: usize,
    r: usize,
    class: PartitionClass,
    budget: usize,
    init: I,
    fold: F,
    reduce: R,
) -> Result<T, PartitionError>
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, PartitionView<'_>) + Sync,
    R: Fn(T, T) -> T,
{
    check_budget(n, r, budget)?;
    let walker = Walker { n, r, class };
    // split a few cells past the forced prefix; deep enough for load balance
    let split_at = if class == PartitionClass::All { 3 } else { r + 3 };
    let (frontier, pos) = walker.frontier(split_at);
    let parts: Vec<T> = frontier
        .par_iter()
        .map(|st| {
            let mut acc = init();
            walker.walk(st, pos, &mut |view| fold(&mut acc, view));
            acc
        })
        .collect();
    Ok(parts.into_iter().fold(init(), reduce))
}

/// All partitions of `class` in deterministic restricted-growth order.
pub fn enumerate(
    n: usize,
    r: usize,
    class: PartitionClass,
    budget: usize,
) -> Result<Vec<SetPartition>, PartitionError> {
    fold_partitions(
        n,
        r,
        class,
        budget,
        Vec::new,
        |acc, view| acc.push(view.to_owned()),
        |mut a, b| {
            a.extend(b);
            a
        },
    )
}

/// Connected non-flat partitions of `[n]×[r]`.
pub fn enumerate_cnf(n: usize, r: usize, budget: usize) -> Result<Vec<SetPartition>, PartitionError> {
    enumerate(n, r, PartitionClass::ConnectedNonFlat, budget)
}

/// Number of partitions of `class`, tallied by block count (index = block count).
pub fn count_by_blocks(n: usize, r: usize, class: PartitionClass, budget: usize) -> Result<Vec<u64>, PartitionError> {
    fold_partitions(
        n,
        r,
        class,
        budget,
        || vec![0u64; n * r + 1],
        |acc, view| acc[view.block_count] += 1,
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )
}

/// Closed form `r^(n-1) · ∏_{i=1}^{n-1} (1 + (r-1) i)` for the number of
/// connected non-flat partitions with the maximal `1 + (r-1) n` blocks.
pub fn count_maximal(n: usize, r: usize) -> u128 {
    assert!(n >= 1);
    let r = r as u128;
    (1..n as u128).fold(1, |acc, i| acc * r * (1 + (r - 1) * i))
}

/// Upper bound `n!^r · r!^(n-1)` on the number of connected non-flat partitions.
pub fn cnf_upper_bound(n: usize, r: usize) -> u128 {
    let fact = |k: usize| (1..=k as u128).product::<u128>();
    fact(n).pow(r as u32) * fact(r).pow(n as u32 - 1)
}
