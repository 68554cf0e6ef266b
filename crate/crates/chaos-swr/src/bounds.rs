//! Closed-form tail bounds for the sign chaos: the i.i.d. Rademacher
//! exponential inequality, the stopping-time (Hoeffding) control, the
//! four-term split bound with its per-term breakdown, the simplified
//! `n * max|a| * (x + log n)` bound, and policies for choosing the cut
//! parameter `delta`.
//!
//! The constants `kappa`, `c` and `C` are existence constants: no normative
//! values are known. The defaults here are placeholders meant to be
//! overridden by empirical calibration (see `montecarlo::calibrate_kappa`
//! and `montecarlo::calibrate_c`).

use serde::{Deserialize, Serialize};

use crate::coeff::CoefficientMatrix;
use crate::error::{Error, Result};

/// The three tunable constants of the tail bounds. All must be strictly
/// positive. Defaults are NON-NORMATIVE placeholders (`kappa = 4`, `c = 1`,
/// `C = 8`) intended to be replaced by calibrated values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// Scale of the Rademacher-chaos exponential inequality.
    pub kappa: f64,
    /// Threshold constant of the simplified bound.
    pub c: f64,
    /// Probability constant of the simplified bound.
    #[serde(rename = "C")]
    pub big_c: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self {
            kappa: 4.0,
            c: 1.0,
            big_c: 8.0,
        }
    }
}

impl BoundConstants {
    pub fn validate(&self) -> Result<()> {
        check_positive_constant("kappa", self.kappa)?;
        check_positive_constant("c", self.c)?;
        check_positive_constant("C", self.big_c)
    }
}

fn check_positive_constant(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value <= 0.0 {
        return Err(Error::NonpositiveConstant { name, value });
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::NonpositiveX(x));
    }
    Ok(())
}

fn check_delta(n: usize, delta: usize) -> Result<()> {
    if delta > n {
        return Err(Error::DeltaOutOfRange { delta, n });
    }
    Ok(())
}

/// Which of the three threshold groups is largest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DominantTerm {
    Rademacher,
    Cross,
    Tail,
    None,
}

/// Per-term decomposition of the split bound's threshold and probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermBreakdown {
    /// `kappa * x * prefix_sigma` (the Rademacher-chaos block).
    pub rademacher_term: f64,
    /// `sqrt(2(x + log delta)) * sum of per-column cross norms`.
    pub cross_col_term: f64,
    /// `sqrt(2(x + log delta)) * sum of per-row cross norms`.
    pub cross_row_term: f64,
    /// `sum_{i != j > n - delta} |a_ij|` (deterministic trailing block).
    pub tail_term: f64,
    /// Unclipped `2 exp(-delta^2 / (2(n - delta)))`; 0 at `delta = n`.
    pub hoeffding_prob: f64,
    /// Unclipped `6 exp(-x)`.
    pub chaos_prob: f64,
    /// Per-column exponent shift `x + log(delta)`; absent at `delta = 0`
    /// where the whole cross term is defined to vanish.
    pub y: Option<f64>,
    /// Largest of rademacher / cross (column + row) / tail.
    pub dominant: DominantTerm,
    /// Aggregate `n M x + delta M sqrt(n) sqrt(x + log n) + delta^2 M`
    /// at unit constant, the simplified-threshold shape with `log n`.
    pub simplified_shape_log_n: f64,
    /// Same aggregate with `log(n x)` inside the square root; absent when
    /// `x + log(n x) < 0`. Both variants are reported because the two
    /// readings differ and neither is canonical.
    pub simplified_shape_log_nx: Option<f64>,
}

/// Threshold/probability pair of the split bound at one `(x, delta)`,
/// with the full term breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub x: f64,
    pub delta: usize,
    /// Sum of the four threshold terms.
    pub threshold: f64,
    /// Clipped probability bound `min(1, hoeffding + 6 e^{-x})`.
    pub probability: f64,
    /// Unclipped probability bound, kept for analysis of vacuous regions.
    pub probability_raw: f64,
    pub breakdown: TermBreakdown,
}

/// Raw stopping-time exponential `2 exp(-delta^2 / (2(n - delta)))`.
/// At `delta = n` the event `{T <= 0}` is empty, so the bound is 0.
pub fn hoeffding_t_bound_raw(n: usize, delta: usize) -> Result<f64> {
    check_delta(n, delta)?;
    if delta == n {
        return Ok(0.0);
    }
    let d = delta as f64;
    let m = (n - delta) as f64;
    Ok(2.0 * (-d * d / (2.0 * m)).exp())
}

/// Clipped bound on `P(T <= n - delta)`.
pub fn hoeffding_t_bound(n: usize, delta: usize) -> Result<f64> {
    Ok(hoeffding_t_bound_raw(n, delta)?.min(1.0))
}

/// The Rademacher-chaos exponential inequality at scale `kappa * sigma`:
/// threshold `kappa * sigma * x`, probability `min(1, 2 e^{-x})`.
pub fn rademacher_tail(sigma: f64, x: f64, kappa: f64) -> Result<(f64, f64)> {
    check_x(x)?;
    check_positive_constant("kappa", kappa)?;
    Ok((kappa * sigma * x, (2.0 * (-x).exp()).min(1.0)))
}

struct SplitTerms {
    u: f64,
    v: f64,
    w: f64,
    z: f64,
    y: Option<f64>,
}

fn split_terms(a: &CoefficientMatrix, x: f64, delta: usize, kappa: f64) -> Result<SplitTerms> {
    check_x(x)?;
    check_positive_constant("kappa", kappa)?;
    let norms = a.truncated_norms(delta)?;
    let u = kappa * x * norms.prefix_sigma;
    let (v, w, y) = if delta == 0 {
        // Empty cross strips: the whole middle term is defined as 0, which
        // also sidesteps log(0).
        (0.0, 0.0, None)
    } else {
        let y = x + (delta as f64).ln();
        let factor = (2.0 * y).sqrt();
        let v = factor * norms.col_cross.iter().sum::<f64>();
        let w = factor * norms.row_cross.iter().sum::<f64>();
        (v, w, Some(y))
    };
    Ok(SplitTerms {
        u,
        v,
        w,
        z: norms.tail_abs,
        y,
    })
}

/// Threshold of the split bound:
/// `kappa x * prefix_sigma + sqrt(2(x + log delta)) * (cross sums) + tail_abs`.
pub fn split_threshold(a: &CoefficientMatrix, x: f64, delta: usize, kappa: f64) -> Result<f64> {
    let t = split_terms(a, x, delta, kappa)?;
    Ok(t.u + t.v + t.w + t.z)
}

/// Probability side of the split bound:
/// `min(1, hoeffding_t_bound(n, delta) + 6 e^{-x})`.
pub fn split_probability(n: usize, delta: usize, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok((hoeffding_t_bound(n, delta)? + 6.0 * (-x).exp()).min(1.0))
}

/// Unclipped probability side.
pub fn split_probability_raw(n: usize, delta: usize, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(hoeffding_t_bound_raw(n, delta)? + 6.0 * (-x).exp())
}

/// The default cut `ceil(sqrt(2 n x))`, clamped into `[0, n]`. The ceiling
/// keeps the stopping-time exponential below `e^{-x}` whenever
/// `sqrt(2 n x) <= n`.
pub fn default_delta(n: usize, x: f64) -> usize {
    assert!(x > 0.0, "default_delta requires x > 0");
    let raw = (2.0 * n as f64 * x).sqrt().ceil();
    if raw >= n as f64 {
        n
    } else {
        raw as usize
    }
}

/// Simplified bound: threshold `c * n * M * (x + log n)`, probability
/// `min(1, C e^{-x})`, where `M` is the largest off-diagonal magnitude.
pub fn simplified_bound(
    n: usize,
    max_abs: f64,
    x: f64,
    constants: &BoundConstants,
) -> Result<(f64, f64)> {
    check_x(x)?;
    constants.validate()?;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddLength(n));
    }
    let threshold = constants.c * n as f64 * max_abs * (x + (n as f64).ln());
    let probability = (constants.big_c * (-x).exp()).min(1.0);
    Ok((threshold, probability))
}

/// Full report at one `(x, delta)`: threshold terms, probability parts,
/// the dominant-term label, and both simplified-threshold shapes.
pub fn term_breakdown(
    a: &CoefficientMatrix,
    x: f64,
    delta: usize,
    kappa: f64,
) -> Result<BoundReport> {
    let n = a.n();
    let t = split_terms(a, x, delta, kappa)?;
    let threshold = t.u + t.v + t.w + t.z;
    let hoeffding_prob = hoeffding_t_bound_raw(n, delta)?;
    let chaos_prob = 6.0 * (-x).exp();
    let probability_raw = hoeffding_prob + chaos_prob;

    let cross = t.v + t.w;
    let dominant = if t.u == 0.0 && cross == 0.0 && t.z == 0.0 {
        DominantTerm::None
    } else if t.u >= cross && t.u >= t.z {
        DominantTerm::Rademacher
    } else if cross >= t.z {
        DominantTerm::Cross
    } else {
        DominantTerm::Tail
    };

    let nf = n as f64;
    let df = delta as f64;
    let m = a.max_abs();
    let shape = |log_term: f64| nf * m * x + df * m * nf.sqrt() * (x + log_term).sqrt() + df * df * m;
    let simplified_shape_log_n = shape(nf.ln());
    let log_nx = (nf * x).ln();
    let simplified_shape_log_nx = (x + log_nx >= 0.0).then(|| shape(log_nx));

    Ok(BoundReport {
        x,
        delta,
        threshold,
        probability: (hoeffding_prob.min(1.0) + chaos_prob).min(1.0),
        probability_raw,
        breakdown: TermBreakdown {
            rademacher_term: t.u,
            cross_col_term: t.v,
            cross_row_term: t.w,
            tail_term: t.z,
            hoeffding_prob,
            chaos_prob,
            y: t.y,
            dominant,
            simplified_shape_log_n,
            simplified_shape_log_nx,
        },
    })
}

/// Result of the exhaustive `delta` scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSearch {
    pub delta: usize,
    pub report: BoundReport,
    /// Whether the probability target was met at the returned `delta`.
    pub meets_target: bool,
}

/// Scan every integer `delta` in `[0, n]`. Among cuts whose probability
/// bound meets `target_prob`, return the one with the smallest threshold
/// (ties broken by smallest `delta`); if none qualifies, return the cut
/// minimizing the probability bound, flagged.
pub fn optimize_delta(
    a: &CoefficientMatrix,
    x: f64,
    kappa: f64,
    target_prob: f64,
) -> Result<DeltaSearch> {
    check_x(x)?;
    check_positive_constant("kappa", kappa)?;
    let n = a.n();
    let mut best_feasible: Option<(usize, f64)> = None;
    let mut best_prob: Option<(usize, f64)> = None;
    for delta in 0..=n {
        let threshold = split_threshold(a, x, delta, kappa)?;
        let prob = split_probability(n, delta, x)?;
        if prob <= target_prob && best_feasible.is_none_or(|(_, t)| threshold < t) {
            best_feasible = Some((delta, threshold));
        }
        if best_prob.is_none_or(|(_, p)| prob < p) {
            best_prob = Some((delta, prob));
        }
    }
    let (delta, meets_target) = match best_feasible {
        Some((delta, _)) => (delta, true),
        None => (best_prob.expect("scan covers delta = 0").0, false),
    };
    Ok(DeltaSearch {
        delta,
        report: term_breakdown(a, x, delta, kappa)?,
        meets_target,
    })
}
