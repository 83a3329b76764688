//! Diagram point sets and the upper boundary of their convex hull.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

use crate::diagrams::DiagramKernel;
use crate::graph_model::{CanonicalTemplate, EndpointGraph};
use crate::partitions::{fold_partitions, PartitionClass, PartitionError};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HullError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("cumulant order n must be at least 1")]
    BadOrder,
    #[error("point ({0},{1}) is not on the upper boundary")]
    NotOnBoundary(i64, i64),
    #[error("decay exponent must be positive, got {0}")]
    NonPositiveAlpha(Rational),
    #[error("templates in one batch must share r")]
    MixedCoreSizes,
}

/// Distinct diagram points of order `n`, each with the number of connected
/// non-flat partitions mapping to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaSet {
    pub n: usize,
    points: BTreeMap<(i64, i64), u64>,
}

impl SigmaSet {
    pub fn from_points(n: usize, pts: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut points = BTreeMap::new();
        for p in pts {
            *points.entry(p).or_insert(0) += 1;
        }
        SigmaSet { n, points }
    }

    /// Points sorted lexicographically.
    pub fn points(&self) -> Vec<(i64, i64)> {
        self.points.keys().copied().collect()
    }

    pub fn multiplicity(&self, pt: (i64, i64)) -> u64 {
        self.points.get(&pt).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

type Memo = Mutex<HashMap<(CanonicalTemplate, usize), SigmaSet>>;

fn memo() -> &'static Memo {
    static CACHE: OnceLock<Memo> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `Σ_n(G, m)`, memoised per isomorphism class and order.
pub fn sigma_set(g: &EndpointGraph, n: usize, budget: usize) -> Result<SigmaSet, HullError> {
    if n == 0 {
        return Err(HullError::BadOrder);
    }
    let key = (g.canonical_form(), n);
    if let Some(hit) = memo().lock().unwrap().get(&key) {
        if n * g.r() <= budget {
            return Ok(hit.clone());
        }
    }
    let set = sigma_sets(std::slice::from_ref(g), n, budget)?.pop().unwrap();
    memo().lock().unwrap().insert(key, set.clone());
    Ok(set)
}

/// Point sets for several templates with the same `r` from one enumeration pass.
pub fn sigma_sets(templates: &[EndpointGraph], n: usize, budget: usize) -> Result<Vec<SigmaSet>, HullError> {
    if n == 0 {
        return Err(HullError::BadOrder);
    }
    let Some(first) = templates.first() else {
        return Ok(Vec::new());
    };
    let r = first.r();
    if templates.iter().any(|g| g.r() != r) {
        return Err(HullError::MixedCoreSizes);
    }
    let kernels: Vec<DiagramKernel> = templates.iter().map(DiagramKernel::new).collect();
    let maps = fold_partitions(
        n,
        r,
        PartitionClass::ConnectedNonFlat,
        budget,
        || vec![HashMap::<(i64, i64), u64>::new(); kernels.len()],
        |acc, view| {
            for (map, k) in acc.iter_mut().zip(&kernels) {
                *map.entry(k.point(&view)).or_insert(0) += 1;
            }
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                for (pt, c) in y {
                    *x.entry(pt).or_insert(0) += c;
                }
            }
            a
        },
    )?;
    Ok(maps
        .into_iter()
        .map(|m| SigmaSet {
            n,
            points: m.into_iter().collect(),
        })
        .collect())
}

/// Upper convex boundary of a point set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullChain {
    /// Extreme points, left to right; collinear points are excluded.
    pub vertices: Vec<(i64, i64)>,
    /// Every input point lying on the chain, left to right.
    pub boundary: Vec<(i64, i64)>,
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone-chain upper hull in exact integer arithmetic.
pub fn upper_hull_of(points: &[(i64, i64)]) -> HullChain {
    let mut tops: BTreeMap<i64, i64> = BTreeMap::new();
    for &(x, y) in points {
        let e = tops.entry(x).or_insert(y);
        *e = (*e).max(y);
    }
    let mut vertices: Vec<(i64, i64)> = Vec::new();
    for (x, y) in tops {
        let p = (x, y);
        while vertices.len() >= 2 && cross(vertices[vertices.len() - 2], vertices[vertices.len() - 1], p) >= 0 {
            vertices.pop();
        }
        vertices.push(p);
    }
    let mut boundary: Vec<(i64, i64)> = points.iter().copied().filter(|&p| on_chain(&vertices, p)).collect();
    boundary.sort_unstable();
    boundary.dedup();
    HullChain { vertices, boundary }
}

fn on_chain(vertices: &[(i64, i64)], p: (i64, i64)) -> bool {
    match vertices {
        [] => false,
        [v] => *v == p,
        _ => vertices
            .windows(2)
            .any(|w| w[0].0 <= p.0 && p.0 <= w[1].0 && cross(w[0], w[1], p) == 0),
    }
}

pub fn upper_hull(s: &SigmaSet) -> HullChain {
    upper_hull_of(&s.points())
}

impl HullChain {
    pub fn is_segment(&self) -> bool {
        self.vertices.len() <= 2
    }

    /// Slopes of the chain's segments, left to right.
    pub fn slopes(&self) -> Vec<Rational> {
        self.vertices
            .windows(2)
            .map(|w| Rational::new(w[1].1 - w[0].1, w[1].0 - w[0].0))
            .collect()
    }
}

pub fn is_segment(c: &HullChain) -> bool {
    c.is_segment()
}

/// A slope that may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slope {
    Finite(Rational),
    PosInfinity,
}

impl std::fmt::Display for Slope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Slope::Finite(q) => write!(f, "{q}"),
            Slope::PosInfinity => f.write_str("inf"),
        }
    }
}

/// Incoming and outgoing slopes at a boundary point, with `+∞` at the left
/// end and `0` at the right end.
pub fn local_slopes(c: &HullChain, pt: (i64, i64)) -> Result<(Slope, Slope), HullError> {
    let i = c
        .boundary
        .iter()
        .position(|&b| b == pt)
        .ok_or(HullError::NotOnBoundary(pt.0, pt.1))?;
    let slope = |a: (i64, i64), b: (i64, i64)| Slope::Finite(Rational::new(b.1 - a.1, b.0 - a.0));
    let before = if i == 0 {
        Slope::PosInfinity
    } else {
        slope(c.boundary[i - 1], pt)
    };
    let after = if i + 1 == c.boundary.len() {
        Slope::Finite(Rational::from_integer(0))
    } else {
        slope(pt, c.boundary[i + 1])
    };
    Ok((before, after))
}

/// Boundary points whose diagrams lead the cumulant of order `n` when
/// `c_λ = λ^(-α)`: those with `θ⁻ ≥ 1/α ≥ θ⁺`.
pub fn leading_points(
    g: &EndpointGraph,
    n: usize,
    alpha: Rational,
    budget: usize,
) -> Result<Vec<(i64, i64)>, HullError> {
    if alpha <= Rational::from_integer(0) {
        return Err(HullError::NonPositiveAlpha(alpha));
    }
    let chain = upper_hull(&sigma_set(g, n, budget)?);
    let target = Slope::Finite(alpha.recip());
    let mut out = Vec::new();
    for &p in &chain.boundary {
        let (before, after) = local_slopes(&chain, p)?;
        if before >= target && after <= target {
            out.push(p);
        }
    }
    Ok(out)
}

/// `x,y,multiplicity,on_boundary` rows.
pub fn to_csv(s: &SigmaSet, c: &HullChain) -> String {
    let mut out = String::from("x,y,multiplicity,on_boundary\n");
    for (&(x, y), &mult) in &s.points {
        let _ = writeln!(out, "{x},{y},{mult},{}", c.boundary.contains(&(x, y)));
    }
    out
}

/// Scatter of the points with the upper boundary drawn in red.
pub fn to_svg(s: &SigmaSet, c: &HullChain) -> String {
    let pts = s.points();
    let max_x = pts.iter().map(|p| p.0).max().unwrap_or(0).max(1);
    let max_y = pts.iter().map(|p| p.1).max().unwrap_or(0).max(1);
    let (w, h, pad) = (480.0, 360.0, 40.0);
    let sx = |x: i64| pad + x as f64 / max_x as f64 * (w - 2.0 * pad);
    let sy = |y: i64| h - pad - y as f64 / max_y as f64 * (h - 2.0 * pad);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<line x1="{pad}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{pad}" y1="{b}" x2="{pad}" y2="{pad}" stroke="black"/>"#,
        b = h - pad,
        r = w - pad
    );
    let poly: Vec<String> = c
        .vertices
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2"/>"#,
        poly.join(" ")
    );
    for (x, y) in pts {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"><title>({x},{y})</title></circle>"#,
            sx(x),
            sy(y)
        );
    }
    out.push_str("</svg>\n");
    out
}
