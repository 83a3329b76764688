//! Exact exponents for cumulants of `N_G` under `c_λ = λ^(-α)`, and the
//! resulting phase of the subgraph count.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::diagrams::quotient_graph;
use crate::graph_model::EndpointGraph;
use crate::partitions::SetPartition;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsymptoticsError {
    #[error("decay exponent must be positive, got {0}")]
    NonPositiveAlpha(Rational),
    #[error(
        "template is not m-balanced: induced subgraph on {witness:?} has (e(H)-a)/(v(H)-m-1) above (e(G)-a)/(v(G)-m-1), \
         so the hull of diagram points is not a segment"
    )]
    NotMBalanced { witness: Vec<usize> },
    #[error("phase is {0:?}, the Kolmogorov rate is only defined in the normal phase")]
    NotNormalRegime(Phase),
    #[error("cumulant order n must be at least 1")]
    BadOrder,
    #[error("partition does not match the template: {0}")]
    Dimension(String),
}

/// A strictly positive decay exponent `α` in `c_λ = λ^(-α)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecayExponent(Rational);

impl DecayExponent {
    pub fn new(alpha: Rational) -> Result<Self, AsymptoticsError> {
        if alpha <= Rational::from_integer(0) {
            return Err(AsymptoticsError::NonPositiveAlpha(alpha));
        }
        Ok(DecayExponent(alpha))
    }

    pub fn get(self) -> Rational {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Normal,
    PoissonCritical,
    Subcritical,
    NotCovered,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegimeReport {
    #[serde(serialize_with = "ser_q")]
    pub alpha: Rational,
    #[serde(serialize_with = "ser_q")]
    pub alpha_star: Rational,
    #[serde(serialize_with = "ser_q")]
    pub threshold: Rational,
    pub phase: Phase,
    #[serde(serialize_with = "ser_opt_q")]
    pub delta_exponent: Option<Rational>,
    #[serde(serialize_with = "ser_opt_q")]
    pub kolmogorov_exponent: Option<Rational>,
}

fn ser_q<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", q.numer(), q.denom()))
}

fn ser_opt_q<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => ser_q(q, s),
        None => s.serialize_none(),
    }
}

struct Invariants {
    r: i64,
    e: i64,
    a: i64,
}

impl Invariants {
    fn of(g: &EndpointGraph) -> Self {
        Invariants {
            r: g.r() as i64,
            e: g.edge_count() as i64,
            a: g.endpoint_degree_max() as i64,
        }
    }

    fn threshold(&self) -> Rational {
        Rational::new(self.r - 1, self.e - self.a)
    }
}

/// `(r-1)/(e(G)-a)`, the boundary between the two cumulant regimes.
pub fn threshold(g: &EndpointGraph) -> Rational {
    Invariants::of(g).threshold()
}

fn require_m_balanced(g: &EndpointGraph) -> Result<(), AsymptoticsError> {
    let rep = g.balance_report();
    if rep.m_balanced {
        Ok(())
    } else {
        Err(AsymptoticsError::NotMBalanced {
            witness: rep.witness.unwrap_or_default(),
        })
    }
}

/// `(|ρ|, e(ρ_G))`: powers of `λ` and `c_λ` in the size of `F(ρ)`.
pub fn f_exponents(g: &EndpointGraph, p: &SetPartition) -> Result<(usize, usize), AsymptoticsError> {
    let q = quotient_graph(g, p).map_err(|e| AsymptoticsError::Dimension(e.to_string()))?;
    Ok((q.block_count, q.e()))
}

/// The exponent `q` with `κ_n(N_G) ≍ λ^q`.
pub fn cumulant_order(g: &EndpointGraph, n: usize, alpha: Rational) -> Result<Rational, AsymptoticsError> {
    let alpha = DecayExponent::new(alpha)?.get();
    if n == 0 {
        return Err(AsymptoticsError::BadOrder);
    }
    require_m_balanced(g)?;
    let inv = Invariants::of(g);
    let (r, e, a, n) = (inv.r, inv.e, inv.a, n as i64);
    let one = Rational::from_integer(1);
    let thr = inv.threshold();
    Ok(if alpha < thr {
        Rational::from_integer(1 + (r - 1) * n) - alpha * (n * e - (n - 1) * a)
    } else if alpha == thr {
        one - alpha * a
    } else {
        Rational::from_integer(r) - alpha * e
    })
}

/// The exponent `δ` with `Δ_λ ≍ λ^δ`.
pub fn delta_exponent(g: &EndpointGraph, alpha: Rational) -> Result<Rational, AsymptoticsError> {
    let alpha = DecayExponent::new(alpha)?.get();
    require_m_balanced(g)?;
    let inv = Invariants::of(g);
    Ok(delta_unchecked(&inv, alpha))
}

fn delta_unchecked(inv: &Invariants, alpha: Rational) -> Rational {
    let (r, e, a) = (inv.r, inv.e, inv.a);
    let thr = inv.threshold();
    let half = Rational::new(1, 2);
    if alpha < thr {
        (Rational::from_integer(1) - alpha * a) * half
    } else if alpha == thr {
        Rational::new(e - r * a, 2 * (e - a))
    } else {
        (Rational::from_integer(r) - alpha * e) * half
    }
}

/// Labels the limiting behaviour of `N_G` for `c_λ = λ^(-α)`.
///
/// Above `r/e` the mean vanishes. Otherwise the template must be
/// m-balanced; at `r/e` the Poisson limit needs strong balance (m = 0) or
/// `a·r < e` (m ≥ 1); below it the count is asymptotically normal when
/// `Δ_λ → ∞`.
pub fn classify_regime(g: &EndpointGraph, alpha: Rational) -> Result<RegimeReport, AsymptoticsError> {
    let alpha = DecayExponent::new(alpha)?.get();
    let inv = Invariants::of(g);
    let rep = g.balance_report();
    let poisson_point = Rational::new(inv.r, inv.e);
    let mut report = RegimeReport {
        alpha,
        alpha_star: g.critical_exponent(),
        threshold: inv.threshold(),
        phase: Phase::NotCovered,
        delta_exponent: None,
        kolmogorov_exponent: None,
    };
    if alpha > poisson_point {
        report.phase = Phase::Subcritical;
        return Ok(report);
    }
    if !rep.m_balanced {
        return Ok(report);
    }
    let delta = delta_unchecked(&inv, alpha);
    report.delta_exponent = Some(delta);
    if alpha == poisson_point {
        let poisson = if g.m() == 0 {
            rep.strongly_balanced
        } else {
            inv.a * inv.r < inv.e
        };
        if poisson {
            report.phase = Phase::PoissonCritical;
        }
    } else if delta > Rational::from_integer(0) {
        report.phase = Phase::Normal;
        report.kolmogorov_exponent = Some(delta / (2 * inv.r - 1));
    }
    Ok(report)
}

/// `κ` with Kolmogorov distance to the standard normal `≲ λ^(-κ)`.
pub fn kolmogorov_exponent(g: &EndpointGraph, alpha: Rational) -> Result<Rational, AsymptoticsError> {
    let rep = classify_regime(g, alpha)?;
    rep.kolmogorov_exponent
        .ok_or(AsymptoticsError::NotNormalRegime(rep.phase))
}

/// `2 exp(-¼ min(x²/2^r, (xΔ)^(1/r)))`.
pub fn concentration_bound(x: f64, delta_lambda: f64, r: u32) -> f64 {
    assert!(x >= 0.0 && delta_lambda > 0.0 && r >= 2);
    let gauss = x * x / 2f64.powi(r as i32);
    let tail = (x * delta_lambda).powf(1.0 / r as f64);
    2.0 * (-0.25 * gauss.min(tail)).exp()
}
