//! Monte Carlo simulation of the random-connection model on a torus, plus
//! numerical evaluation of the diagram sums for moments and cumulants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph_model::{iter_bits, EndpointGraph};
use crate::partitions::{fold_partitions, PartitionClass, PartitionError};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("template has m={want} endpoints but the config places {got}")]
    EndpointMismatch { got: usize, want: usize },
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Connection function `H`, applied to the torus distance and scaled by `c_λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Kernel {
    Constant,
    Indicator { r0: f64 },
    Exponential { s: f64 },
}

impl Kernel {
    pub fn h(&self, dist: f64) -> f64 {
        match *self {
            Kernel::Constant => 1.0,
            Kernel::Indicator { r0 } => {
                if dist <= r0 {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Exponential { s } => (-dist / s).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub d: usize,
    /// torus side length
    pub l: f64,
    pub lambda: f64,
    pub kernel: Kernel,
    /// the scale `c_λ`
    pub c: f64,
    /// fixed endpoint locations, each of length `d`
    pub endpoints: Vec<Vec<f64>>,
    pub reps: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(d: usize, l: f64, lambda: f64, kernel: Kernel, c: f64) -> Self {
        SimConfig {
            d,
            l,
            lambda,
            kernel,
            c,
            endpoints: Vec::new(),
            reps: 1,
            seed: 0,
        }
    }

    /// `c_λ = λ^(-α)`.
    pub fn scale_for(lambda: f64, alpha: Rational) -> f64 {
        lambda.powf(-(*alpha.numer() as f64) / *alpha.denom() as f64)
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(self.d as i32)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |s: &str| Err(SimError::InvalidConfig(s.to_string()));
        if self.d == 0 {
            return bad("dimension must be at least 1");
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return bad("side length L must be positive");
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("intensity must be positive");
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return bad("scale c must lie in (0,1]");
        }
        if self.reps == 0 {
            return bad("need at least one replication");
        }
        match self.kernel {
            Kernel::Indicator { r0 } if r0.is_nan() || r0 <= 0.0 => return bad("indicator radius must be positive"),
            Kernel::Exponential { s } if s.is_nan() || s <= 0.0 => return bad("exponential scale must be positive"),
            _ => {}
        }
        if self.endpoints.len() > 64 {
            return bad("at most 64 endpoints");
        }
        if self.endpoints.iter().any(|y| y.len() != self.d) {
            return bad("endpoint coordinates must have length d");
        }
        Ok(())
    }

    fn torus_dist(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let t = (x - y).abs().rem_euclid(self.l);
                let t = t.min(self.l - t);
                t * t
            })
            .sum::<f64>()
            .sqrt()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// One realisation: points, sorted adjacency lists and endpoint links.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    d: usize,
    points: Vec<f64>,
    adj: Vec<Vec<u32>>,
    endpoint_links: Vec<u64>,
}

impl Sample {
    /// Builds a sample directly from 0-based edges and per-point endpoint masks.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], endpoint_links: Vec<u64>) -> Self {
        assert_eq!(endpoint_links.len(), n);
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in edges {
            adj[i].push(j as u32);
            adj[j].push(i as u32);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Sample {
            d: 0,
            points: Vec::new(),
            adj,
            endpoint_links,
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&(j as u32)).is_ok()
    }

    /// Endpoints linked to point `i`, as a bit mask.
    pub fn endpoint_links(&self, i: usize) -> u64 {
        self.endpoint_links[i]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Draws replication `rep`: a Poisson number of uniform points on the
/// torus, with each pair (and each point–endpoint pair) linked
/// independently with probability `c·H(distance)`.
pub fn sample_rcm(cfg: &SimConfig, rep: u64) -> Result<Sample, SimError> {
    cfg.validate()?;
    let mut rng = cfg.rng(rep);
    let mean = cfg.lambda * cfg.volume();
    let n = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let d = cfg.d;
    let points: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() * cfg.l).collect();
    let pt = |i: usize| &points[i * d..(i + 1) * d];

    let mut adj = vec![Vec::new(); n];
    let skip = Geometric::new(cfg.c).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let link = |i: usize, j: usize, adj: &mut Vec<Vec<u32>>| {
        adj[i].push(j as u32);
        adj[j].push(i as u32);
    };
    match cfg.kernel {
        Kernel::Indicator { r0 } if cfg.l / r0 >= 3.0 && d <= 3 => {
            // only pairs within range can link; thin them at rate c
            let candidates = close_pairs(&points, d, cfg, r0);
            let mut k = skip.sample(&mut rng) as usize;
            while k < candidates.len() {
                let (i, j) = candidates[k];
                link(i, j, &mut adj);
                k += 1 + skip.sample(&mut rng) as usize;
            }
        }
        kernel => {
            // thin all pairs at rate c, then accept with probability H
            let thin = kernel != Kernel::Constant;
            for i in 0..n {
                let mut j = i + 1 + skip.sample(&mut rng) as usize;
                while j < n {
                    let keep = !thin || {
                        let h = kernel.h(cfg.torus_dist(pt(i), pt(j)));
                        h >= 1.0 || rng.random::<f64>() < h
                    };
                    if keep {
                        link(i, j, &mut adj);
                    }
                    j += 1 + skip.sample(&mut rng) as usize;
                }
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let endpoint_links: Vec<u64> = (0..n)
        .map(|i| {
            let mut mask = 0u64;
            for (k, y) in cfg.endpoints.iter().enumerate() {
                let p = cfg.c * cfg.kernel.h(cfg.torus_dist(pt(i), y));
                if rng.random::<f64>() < p {
                    mask |= 1 << k;
                }
            }
            mask
        })
        .collect();
    Ok(Sample {
        d,
        points,
        adj,
        endpoint_links,
    })
}

/// Pairs `i < j` within torus distance `r0`, via a cell grid of side at least `r0`.
fn close_pairs(points: &[f64], d: usize, cfg: &SimConfig, r0: f64) -> Vec<(usize, usize)> {
    let n = points.len() / d;
    let k = (cfg.l / r0).floor() as usize;
    let cell_of = |i: usize| -> Vec<usize> {
        (0..d)
            .map(|t| ((points[i * d + t] / cfg.l * k as f64) as usize).min(k - 1))
            .collect()
    };
    let flat = |c: &[usize]| c.iter().fold(0, |acc, &x| acc * k + x);
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); k.pow(d as u32)];
    let coords: Vec<Vec<usize>> = (0..n).map(cell_of).collect();
    for (i, c) in coords.iter().enumerate() {
        cells[flat(c)].push(i);
    }
    let offsets: Vec<Vec<isize>> = (0..3usize.pow(d as u32))
        .map(|mut o| {
            (0..d)
                .map(|_| {
                    let v = (o % 3) as isize - 1;
                    o /= 3;
                    v
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut nb = vec![0usize; d];
    for i in 0..n {
        for off in &offsets {
            for t in 0..d {
                nb[t] = (coords[i][t] as isize + off[t]).rem_euclid(k as isize) as usize;
            }
            for &j in &cells[flat(&nb)] {
                if j > i && cfg.torus_dist(&points[i * d..(i + 1) * d], &points[j * d..(j + 1) * d]) <= r0 {
                    out.push((i, j));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

struct EmbeddingPlan {
    /// core vertex placed at each depth
    order: Vec<usize>,
    /// for each depth, earlier depths it must be adjacent to
    back: Vec<Vec<usize>>,
    /// endpoint mask required at each depth
    attach: Vec<u64>,
}

impl EmbeddingPlan {
    fn new(g: &EndpointGraph) -> Self {
        let r = g.r();
        let start = (0..r)
            .max_by_key(|&i| {
                (
                    g.attachment(i).count_ones(),
                    g.core_neighbors(i).count_ones(),
                    std::cmp::Reverse(i),
                )
            })
            .unwrap();
        let mut order = vec![start];
        let mut placed = 1u64 << start;
        while order.len() < r {
            // next: most constrained vertex adjacent to the placed set
            let next = (0..r)
                .filter(|&v| placed >> v & 1 == 0 && g.core_neighbors(v) & placed != 0)
                .max_by_key(|&v| {
                    (
                        (g.core_neighbors(v) & placed).count_ones(),
                        g.attachment(v).count_ones(),
                        std::cmp::Reverse(v),
                    )
                })
                .unwrap();
            order.push(next);
            placed |= 1 << next;
        }
        let mut pos = vec![0; r];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        let back = order
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                iter_bits(g.core_neighbors(v))
                    .map(|u| pos[u])
                    .filter(|&p| p < k)
                    .collect()
            })
            .collect();
        let attach = order.iter().map(|&v| g.attachment(v)).collect();
        EmbeddingPlan { order, back, attach }
    }
}

/// Ordered injective maps of the core onto sample points that carry every
/// core edge and every endpoint edge (extra edges are allowed).
pub fn count_subgraphs(s: &Sample, g: &EndpointGraph) -> u64 {
    count_with(s, g, s.len() <= DENSE_LIMIT)
}

fn count_with(s: &Sample, g: &EndpointGraph, use_dense: bool) -> u64 {
    let r = g.r();
    if s.len() < r {
        return 0;
    }
    let plan = EmbeddingPlan::new(g);
    let mut image = vec![0u32; r];
    let need = plan.attach[0];
    let starts = (0..s.len()).filter(|&v| s.endpoint_links(v) & need == need);
    let mut total = 0u64;
    if use_dense {
        let dense = DenseRows::new(s);
        let mut scratch = vec![vec![0u64; dense.words]; r];
        for v in starts {
            image[0] = v as u32;
            total += extend_dense(s, &dense, &plan, &mut image, &mut scratch, 1);
        }
    } else {
        let mut scratch = vec![Vec::new(); r];
        for v in starts {
            image[0] = v as u32;
            total += extend(s, &plan, &mut image, &mut scratch, 1);
        }
    }
    total
}

/// Largest sample for which adjacency is also stored as bit rows.
const DENSE_LIMIT: usize = 8192;

struct DenseRows {
    words: usize,
    bits: Vec<u64>,
}

impl DenseRows {
    fn new(s: &Sample) -> Self {
        let words = s.len().div_ceil(64).max(1);
        let mut bits = vec![0u64; s.len() * words];
        for i in 0..s.len() {
            for &j in s.neighbors(i) {
                bits[i * words + j as usize / 64] |= 1 << (j % 64);
            }
        }
        DenseRows { words, bits }
    }

    fn row(&self, i: u32) -> &[u64] {
        &self.bits[i as usize * self.words..(i as usize + 1) * self.words]
    }
}

fn extend_dense(
    s: &Sample,
    dense: &DenseRows,
    plan: &EmbeddingPlan,
    image: &mut [u32],
    scratch: &mut [Vec<u64>],
    depth: usize,
) -> u64 {
    let need = plan.attach[depth];
    let mut acc = std::mem::take(&mut scratch[depth]);
    let back = &plan.back[depth];
    acc.copy_from_slice(dense.row(image[back[0]]));
    for &p in &back[1..] {
        for (a, b) in acc.iter_mut().zip(dense.row(image[p])) {
            *a &= b;
        }
    }
    for &u in &image[..depth] {
        acc[u as usize / 64] &= !(1 << (u % 64));
    }
    let last = depth + 1 == plan.order.len();
    let mut total = 0;
    if last && need == 0 {
        total = acc.iter().map(|w| w.count_ones() as u64).sum();
    } else {
        for (k, &word) in acc.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let cand = (k * 64 + w.trailing_zeros() as usize) as u32;
                w &= w - 1;
                if s.endpoint_links(cand as usize) & need != need {
                    continue;
                }
                if last {
                    total += 1;
                } else {
                    image[depth] = cand;
                    total += extend_dense(s, dense, plan, image, scratch, depth + 1);
                }
            }
        }
    }
    scratch[depth] = acc;
    total
}

/// Keeps the elements of sorted `acc` that also occur in sorted `other`.
fn intersect_into(acc: &mut Vec<u32>, other: &[u32]) {
    let mut j = 0;
    acc.retain(|&x| {
        while j < other.len() && other[j] < x {
            j += 1;
        }
        j < other.len() && other[j] == x
    });
}

fn extend(s: &Sample, plan: &EmbeddingPlan, image: &mut [u32], scratch: &mut [Vec<u32>], depth: usize) -> u64 {
    if depth == plan.order.len() {
        return 1;
    }
    let need = plan.attach[depth];
    let mut cands = std::mem::take(&mut scratch[depth]);
    cands.clear();
    let mut lists: Vec<&[u32]> = plan.back[depth]
        .iter()
        .map(|&p| s.neighbors(image[p] as usize))
        .collect();
    lists.sort_by_key(|l| l.len());
    cands.extend_from_slice(lists[0]);
    for other in &lists[1..] {
        if cands.is_empty() {
            break;
        }
        intersect_into(&mut cands, other);
    }
    let placed = &image[..depth];
    cands.retain(|&c| s.endpoint_links(c as usize) & need == need && !placed.contains(&c));
    let total = if depth + 1 == plan.order.len() {
        cands.len() as u64
    } else {
        let mut total = 0;
        for &cand in &cands {
            image[depth] = cand;
            total += extend(s, plan, image, scratch, depth + 1);
        }
        total
    };
    scratch[depth] = cands;
    total
}

/// Summary of replicated counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalStats {
    pub counts: Vec<u64>,
    pub mean: f64,
    pub variance: Option<f64>,
    pub k3: Option<f64>,
    pub k4: Option<f64>,
    pub se_mean: Option<f64>,
    pub se_variance: Option<f64>,
    pub se_k3: Option<f64>,
    pub se_k4: Option<f64>,
    pub automorphisms: u64,
    /// `histogram[k]` = replications with `round(N/|Aut|) = k`
    pub histogram: Vec<u64>,
    /// replications where `N/|Aut|` was not within 1e-9 of an integer
    pub rounding_flags: usize,
}

/// Unbiased k-statistics `(k1, k2, k3, k4)` from power sums of centred data.
fn k_stats(n: f64, s1: f64, s2: f64, s3: f64, s4: f64) -> [Option<f64>; 4] {
    let m1 = s1 / n;
    let m2 = s2 / n - m1 * m1;
    let m3 = s3 / n - 3.0 * m1 * s2 / n + 2.0 * m1.powi(3);
    let m4 = s4 / n - 4.0 * m1 * s3 / n + 6.0 * m1 * m1 * s2 / n - 3.0 * m1.powi(4);
    let k2 = (n > 1.0).then(|| n / (n - 1.0) * m2);
    let k3 = (n > 2.0).then(|| n * n / ((n - 1.0) * (n - 2.0)) * m3);
    let k4 =
        (n > 3.0).then(|| n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0)));
    [Some(m1), k2, k3, k4]
}

impl EmpiricalStats {
    pub fn from_counts(counts: Vec<u64>, automorphisms: u64) -> Self {
        assert!(!counts.is_empty() && automorphisms >= 1);
        let n = counts.len() as f64;
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
        let xs: Vec<f64> = counts.iter().map(|&c| c as f64 - mean).collect();
        let sums = |p: i32| xs.iter().map(|x| x.powi(p)).sum::<f64>();
        let (s1, s2, s3, s4) = (sums(1), sums(2), sums(3), sums(4));
        let full = k_stats(n, s1, s2, s3, s4);

        // leave-one-out estimates from the same power sums
        let mut se = [None; 4];
        if counts.len() > 4 {
            let loo: Vec<[Option<f64>; 4]> = xs
                .iter()
                .map(|&x| k_stats(n - 1.0, s1 - x, s2 - x * x, s3 - x.powi(3), s4 - x.powi(4)))
                .collect();
            for (t, slot) in se.iter_mut().enumerate() {
                let vals: Vec<f64> = loo.iter().map(|v| v[t].unwrap()).collect();
                let avg = vals.iter().sum::<f64>() / n;
                let var = (n - 1.0) / n * vals.iter().map(|v| (v - avg).powi(2)).sum::<f64>();
                *slot = Some(var.sqrt());
            }
        }

        let mut histogram = Vec::new();
        let mut rounding_flags = 0;
        for &c in &counts {
            let q = c as f64 / automorphisms as f64;
            let k = q.round();
            if (q - k).abs() > 1e-9 {
                rounding_flags += 1;
            }
            let k = k as usize;
            if histogram.len() <= k {
                histogram.resize(k + 1, 0);
            }
            histogram[k] += 1;
        }
        EmpiricalStats {
            mean,
            variance: full[1].map(|v| v.max(0.0)),
            k3: full[2],
            k4: full[3],
            se_mean: se[0],
            se_variance: se[1],
            se_k3: se[2],
            se_k4: se[3],
            automorphisms,
            histogram,
            rounding_flags,
            counts,
        }
    }

    /// `k3 / k2^(3/2)`.
    pub fn skewness(&self) -> Option<f64> {
        match (self.k3, self.variance) {
            (Some(k3), Some(v)) if v > 0.0 => Some(k3 / v.powf(1.5)),
            _ => None,
        }
    }

    /// Fraction of replications with a positive count.
    pub fn prob_positive(&self) -> f64 {
        self.counts.iter().filter(|&&c| c > 0).count() as f64 / self.counts.len() as f64
    }
}

/// Runs `cfg.reps` independent replications. Results do not depend on the
/// number of threads.
pub fn run_experiment(cfg: &SimConfig, g: &EndpointGraph) -> Result<EmpiricalStats, SimError> {
    cfg.validate()?;
    if cfg.endpoints.len() != g.m() {
        return Err(SimError::EndpointMismatch {
            got: cfg.endpoints.len(),
            want: g.m(),
        });
    }
    let counts = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| sample_rcm(cfg, rep).map(|s| count_subgraphs(&s, g)))
        .collect::<Result<Vec<u64>, SimError>>()?;
    Ok(EmpiricalStats::from_counts(counts, g.automorphism_count()))
}

/// Total variation distance between the law of `round(N/|Aut|)` and
/// Poisson(`mean`), including the Poisson mass beyond the histogram.
pub fn poisson_gof(stats: &EmpiricalStats, mean: f64) -> f64 {
    let total: u64 = stats.histogram.iter().sum();
    let mut pk = (-mean).exp();
    let mut covered = 0.0;
    let mut diff = 0.0;
    for (k, &h) in stats.histogram.iter().enumerate() {
        if k > 0 {
            pk *= mean / k as f64;
        }
        covered += pk;
        diff += (h as f64 / total as f64 - pk).abs();
    }
    0.5 * (diff + (1.0 - covered).max(0.0))
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentKind {
    /// `E[N^n]`, summed over non-flat partitions
    Moment,
    /// `κ_n(N)`, summed over connected non-flat partitions
    Cumulant,
}

/// Volume of the Euclidean unit ball in dimension `d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Quotient structure needed to integrate one diagram.
#[derive(Clone)]
struct DiagramShape {
    blocks: usize,
    block_adj: Vec<u64>,
    /// blocks adjacent to each endpoint
    endpoint_blocks: Vec<u64>,
}

impl DiagramShape {
    fn edges(&self) -> usize {
        self.block_adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
            + self
                .endpoint_blocks
                .iter()
                .map(|a| a.count_ones() as usize)
                .sum::<usize>()
    }
}

/// Sums `F(ρ) = λ^|ρ| ∫ ∏ c·H` over the diagrams of order `n`.
///
/// The constant kernel is integrated in closed form. The indicator kernel
/// samples each diagram along a spanning forest (roots uniform on the torus
/// or pinned at endpoints, children uniform in the ball of radius `r0`
/// around their parent); this requires `r0 ≤ L/2`, otherwise and for the
/// exponential kernel all blocks are drawn uniformly on the torus.
pub fn exact_moment(
    g: &EndpointGraph,
    n: usize,
    cfg: &SimConfig,
    mc_samples: usize,
    kind: MomentKind,
    budget: usize,
) -> Result<Estimate, SimError> {
    cfg.validate()?;
    if cfg.endpoints.len() != g.m() {
        return Err(SimError::EndpointMismatch {
            got: cfg.endpoints.len(),
            want: g.m(),
        });
    }
    if n == 0 {
        return Err(SimError::InvalidConfig("order n must be at least 1".into()));
    }
    let class = match kind {
        MomentKind::Moment => PartitionClass::NonFlat,
        MomentKind::Cumulant => PartitionClass::ConnectedNonFlat,
    };
    let core_edges = g.core_edges();
    let ep_edges = g.endpoint_edges();
    let shapes = fold_partitions(
        n,
        g.r(),
        class,
        budget,
        Vec::new,
        |acc: &mut Vec<DiagramShape>, view| {
            let mut block_adj = vec![0u64; view.block_count];
            let mut endpoint_blocks = vec![0u64; g.m()];
            for row in view.labels.chunks(view.r) {
                for &(a, b) in &core_edges {
                    let (x, y) = (row[a] as usize, row[b] as usize);
                    if x != y {
                        block_adj[x] |= 1 << y;
                        block_adj[y] |= 1 << x;
                    }
                }
                for &(c, k) in &ep_edges {
                    endpoint_blocks[k] |= 1 << row[c];
                }
            }
            acc.push(DiagramShape {
                blocks: view.block_count,
                block_adj,
                endpoint_blocks,
            });
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    )?;

    if cfg.kernel == Kernel::Constant {
        let v = cfg.volume();
        let value = shapes
            .iter()
            .map(|s| (cfg.lambda * v).powi(s.blocks as i32) * cfg.c.powi(s.edges() as i32))
            .sum();
        return Ok(Estimate { value, se: 0.0 });
    }
    let parts: Vec<Estimate> = shapes
        .par_iter()
        .enumerate()
        .map(|(idx, s)| integrate_diagram(s, cfg, mc_samples, idx as u64))
        .collect();
    let value = parts.iter().map(|p| p.value).sum();
    let se = parts.iter().map(|p| p.se * p.se).sum::<f64>().sqrt();
    Ok(Estimate { value, se })
}

fn integrate_diagram(s: &DiagramShape, cfg: &SimConfig, samples: usize, stream: u64) -> Estimate {
    let d = cfg.d;
    let prefactor = cfg.lambda.powi(s.blocks as i32) * cfg.c.powi(s.edges() as i32);
    let mut rng = cfg.rng(stream);
    let tree = match cfg.kernel {
        Kernel::Indicator { r0 } if r0 <= cfg.l / 2.0 => Some((r0, spanning_forest(s))),
        _ => None,
    };
    let mut pos = vec![0.0; s.blocks * d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut weight = 1.0;
    for _ in 0..samples.max(1) {
        let value = match &tree {
            Some((r0, forest)) => {
                weight = 1.0;
                for step in forest {
                    match step.parent {
                        Parent::Free => {
                            for t in 0..d {
                                pos[step.block * d + t] = rng.random::<f64>() * cfg.l;
                            }
                            weight *= cfg.volume();
                        }
                        Parent::Block(p) => {
                            let centre: Vec<f64> = pos[p * d..(p + 1) * d].to_vec();
                            place_in_ball(
                                &mut rng,
                                &centre,
                                *r0,
                                cfg.l,
                                &mut pos[step.block * d..(step.block + 1) * d],
                            );
                            weight *= unit_ball_volume(d) * r0.powi(d as i32);
                        }
                        Parent::Endpoint(k) => {
                            place_in_ball(
                                &mut rng,
                                &cfg.endpoints[k],
                                *r0,
                                cfg.l,
                                &mut pos[step.block * d..(step.block + 1) * d],
                            );
                            weight *= unit_ball_volume(d) * r0.powi(d as i32);
                        }
                    }
                }
                kernel_product(s, cfg, &pos)
            }
            None => {
                for x in pos.iter_mut() {
                    *x = rng.random::<f64>() * cfg.l;
                }
                weight = cfg.volume().powi(s.blocks as i32);
                kernel_product(s, cfg, &pos)
            }
        };
        sum += value;
        sum_sq += value * value;
    }
    let k = samples.max(1) as f64;
    let mean = sum / k;
    let var = if k > 1.0 {
        (sum_sq / k - mean * mean).max(0.0) * k / (k - 1.0)
    } else {
        0.0
    };
    // the weight is the same on every draw
    Estimate {
        value: prefactor * weight * mean,
        se: prefactor * weight * (var / k).sqrt(),
    }
}

fn kernel_product(s: &DiagramShape, cfg: &SimConfig, pos: &[f64]) -> f64 {
    let d = cfg.d;
    let p = |b: usize| &pos[b * d..(b + 1) * d];
    let mut prod = 1.0;
    for a in 0..s.blocks {
        for b in iter_bits(s.block_adj[a]).filter(|&b| b > a) {
            prod *= cfg.kernel.h(cfg.torus_dist(p(a), p(b)));
            if prod == 0.0 {
                return 0.0;
            }
        }
    }
    for (k, &mask) in s.endpoint_blocks.iter().enumerate() {
        for b in iter_bits(mask) {
            prod *= cfg.kernel.h(cfg.torus_dist(p(b), &cfg.endpoints[k]));
            if prod == 0.0 {
                return 0.0;
            }
        }
    }
    prod
}

fn place_in_ball(rng: &mut ChaCha8Rng, centre: &[f64], r0: f64, l: f64, out: &mut [f64]) {
    let d = centre.len();
    let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radius = r0 * rng.random::<f64>().powf(1.0 / d as f64);
    for t in 0..d {
        out[t] = (centre[t] + dir[t] / norm * radius).rem_euclid(l);
    }
}

#[derive(Debug, Clone, Copy)]
enum Parent {
    Free,
    Block(usize),
    Endpoint(usize),
}

#[derive(Debug, Clone, Copy)]
struct Step {
    block: usize,
    parent: Parent,
}

/// Breadth-first forest over blocks, seeded from all endpoints first.
fn spanning_forest(s: &DiagramShape) -> Vec<Step> {
    let mut steps = Vec::with_capacity(s.blocks);
    let mut seen = 0u64;
    let mut queue = std::collections::VecDeque::new();
    for (k, &mask) in s.endpoint_blocks.iter().enumerate() {
        for b in iter_bits(mask & !seen) {
            seen |= 1 << b;
            steps.push(Step {
                block: b,
                parent: Parent::Endpoint(k),
            });
            queue.push_back(b);
        }
    }
    let mut root = 0;
    loop {
        while let Some(a) = queue.pop_front() {
            for b in iter_bits(s.block_adj[a] & !seen) {
                seen |= 1 << b;
                steps.push(Step {
                    block: b,
                    parent: Parent::Block(a),
                });
                queue.push_back(b);
            }
        }
        while root < s.blocks && seen >> root & 1 == 1 {
            root += 1;
        }
        if root == s.blocks {
            break;
        }
        seen |= 1 << root;
        steps.push(Step {
            block: root,
            parent: Parent::Free,
        });
        queue.push_back(root);
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> EndpointGraph {
        s.parse().unwrap()
    }

    #[test]
    fn counts_on_fixed_samples() {
        let k2 = g("r=2 m=0 edges=1-2");
        let c3 = g("r=3 m=0 edges=1-2,2-3,3-1");
        let pair = Sample::from_edges(2, &[(0, 1)], vec![0; 2]);
        assert_eq!(count_subgraphs(&pair, &k2), 2);
        let tri = Sample::from_edges(3, &[(0, 1), (1, 2), (0, 2)], vec![0; 3]);
        assert_eq!(count_subgraphs(&tri, &c3), 6);
        assert_eq!(count_subgraphs(&pair, &c3), 0);
        let k4 = Sample::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], vec![0; 4]);
        assert_eq!(count_subgraphs(&k4, &c3), 24);
        assert_eq!(count_subgraphs(&k4, &g("r=3 m=0 edges=1-2,2-3")), 24);
    }

    #[test]
    fn endpoint_links_restrict_embeddings() {
        // rooted path: endpoint 4 on cores 1 and 3
        let rooted = g("r=3 m=1 edges=1-2,2-3,1-4,3-4");
        let s = Sample::from_edges(3, &[(0, 1), (1, 2)], vec![1, 0, 1]);
        assert_eq!(count_subgraphs(&s, &rooted), 2);
        let s = Sample::from_edges(3, &[(0, 1), (1, 2)], vec![1, 0, 0]);
        assert_eq!(count_subgraphs(&s, &rooted), 0);
    }

    #[test]
    fn dense_and_sparse_counts_agree() {
        let mut cfg = SimConfig::new(2, 1.0, 60.0, Kernel::Constant, 0.3);
        cfg.endpoints = vec![vec![0.5, 0.5], vec![0.1, 0.2]];
        let templates = [
            g("r=3 m=0 edges=1-2,2-3,3-1"),
            g("r=4 m=0 edges=1-2,2-3,3-4,4-1,1-3"),
            g("r=3 m=2 edges=1-2,2-3,1-4,3-5"),
            g("r=4 m=2 edges=1-2,2-3,3-4,1-5,4-5,2-6"),
        ];
        for rep in 0..4 {
            let s = sample_rcm(&cfg, rep).unwrap();
            // templates with fewer endpoints ignore the extra link bits
            for t in &templates {
                assert_eq!(count_with(&s, t, true), count_with(&s, t, false), "{t}");
            }
        }
    }

    #[test]
    fn tiny_intensity_gives_empty_sample() {
        let cfg = SimConfig::new(2, 1.0, 1e-12, Kernel::Constant, 0.5);
        assert!(sample_rcm(&cfg, 0).unwrap().is_empty());
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut cfg = SimConfig::new(2, 2.0, 30.0, Kernel::Indicator { r0: 0.5 }, 0.7);
        cfg.seed = 9;
        assert_eq!(sample_rcm(&cfg, 3).unwrap(), sample_rcm(&cfg, 3).unwrap());
        assert_ne!(sample_rcm(&cfg, 3).unwrap(), sample_rcm(&cfg, 4).unwrap());
    }

    #[test]
    fn geometric_graph_when_scale_is_one() {
        let cfg = SimConfig::new(2, 3.0, 20.0, Kernel::Indicator { r0: 0.4 }, 1.0);
        let s = sample_rcm(&cfg, 1).unwrap();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                let close = cfg.torus_dist(s.point(i), s.point(j)) <= 0.4;
                assert_eq!(s.has_edge(i, j), close);
            }
        }
    }

    #[test]
    fn grid_and_all_pairs_agree_on_candidates() {
        let cfg = SimConfig::new(2, 3.0, 40.0, Kernel::Indicator { r0: 0.5 }, 1.0);
        let s = sample_rcm(&cfg, 2).unwrap();
        let pts: Vec<f64> = (0..s.len()).flat_map(|i| s.point(i).to_vec()).collect();
        let fast = close_pairs(&pts, 2, &cfg, 0.5);
        let mut slow = Vec::new();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                if cfg.torus_dist(s.point(i), s.point(j)) <= 0.5 {
                    slow.push((i, j));
                }
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn single_replication_has_no_variance() {
        let st = EmpiricalStats::from_counts(vec![4], 2);
        assert_eq!(st.variance, None);
        assert_eq!(st.histogram, vec![0, 0, 1]);
    }

    #[test]
    fn k_statistics_match_direct_formulas() {
        let xs = [1u64, 4, 2, 8, 5, 7, 3, 3, 9, 0];
        let st = EmpiricalStats::from_counts(xs.to_vec(), 1);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<u64>() as f64 / n;
        let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((st.mean - mean).abs() < 1e-12);
        assert!((st.variance.unwrap() - var).abs() < 1e-12);
        let se = (var / n).sqrt();
        assert!((st.se_mean.unwrap() - se).abs() < 1e-9);
    }

    #[test]
    fn rounding_flag_detects_partial_orbits() {
        let st = EmpiricalStats::from_counts(vec![6, 7], 6);
        assert_eq!(st.rounding_flags, 1);
    }

    #[test]
    fn poisson_gof_limits() {
        let mu: f64 = 1.3;
        let zero = EmpiricalStats::from_counts(vec![0; 10], 1);
        assert!((poisson_gof(&zero, mu) - (1.0 - (-mu).exp())).abs() < 1e-12);
        // exact Poisson(0) law
        assert_eq!(poisson_gof(&zero, 0.0), 0.0);
    }

    #[test]
    fn constant_kernel_moments_in_closed_form() {
        let k2 = g("r=2 m=0 edges=1-2");
        let (lam, p) = (50.0, 0.1);
        let cfg = SimConfig::new(2, 1.0, lam, Kernel::Constant, p);
        let m1 = exact_moment(&k2, 1, &cfg, 1, MomentKind::Moment, 12).unwrap();
        assert!((m1.value - lam * lam * p).abs() < 1e-9);
        let m2 = exact_moment(&k2, 2, &cfg, 1, MomentKind::Moment, 12).unwrap();
        let want = lam.powi(4) * p * p + 4.0 * lam.powi(3) * p * p + 2.0 * lam * lam * p;
        assert!((m2.value - want).abs() < 1e-6 * want);
        let k2c = exact_moment(&k2, 2, &cfg, 1, MomentKind::Cumulant, 12).unwrap();
        assert!((k2c.value - 5500.0).abs() < 1e-9);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn triangle_indicator_integral() {
        // ∫ over a disk pair configuration: V · π(π - 3√3/4) r0^4
        let c3 = g("r=3 m=0 edges=1-2,2-3,3-1");
        let (l, r0) = (4.0, 0.5);
        let mut cfg = SimConfig::new(2, l, 1.0, Kernel::Indicator { r0 }, 1.0);
        cfg.seed = 1;
        let est = exact_moment(&c3, 1, &cfg, 200_000, MomentKind::Cumulant, 12).unwrap();
        let pi = std::f64::consts::PI;
        let want = l * l * pi * (pi - 3.0 * 3f64.sqrt() / 4.0) * r0.powi(4);
        assert!((est.value - want).abs() < 4.0 * est.se, "{est:?} vs {want}");
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimConfig::new(2, 1.0, 10.0, Kernel::Constant, 1.5);
        assert!(cfg.validate().is_err());
        cfg.c = 0.5;
        cfg.reps = 0;
        assert!(cfg.validate().is_err());
        cfg.reps = 1;
        cfg.endpoints = vec![vec![0.5]];
        assert!(cfg.validate().is_err());
    }
}
