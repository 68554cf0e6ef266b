//! Exact finite-sample ground truth by exhaustive enumeration: the law of
//! the chaos under each sampling scheme, the law of the coupled sign vector,
//! the law of the stopping time, and exact tail probabilities.
//!
//! Laws are built from integer counts and divided once at the end, so the
//! probabilities carry no accumulation error; coupled-law probabilities are
//! exactly dyadic. Real outcomes are rounded to 12 significant digits before
//! merging so floating ties from symmetric matrices coalesce deterministically.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::chaos::eval_chaos;
use crate::coeff::CoefficientMatrix;
use crate::error::{Error, Result};
use crate::samplers::{couple, RademacherPath, Scheme, SignVector};

/// Tail predicate: one-sided `Z >= t` or absolute `|Z| >= t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailMode {
    #[serde(rename = "one-sided")]
    OneSided,
    #[serde(rename = "absolute")]
    Absolute,
}

impl TailMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "one-sided" | "one_sided" => Ok(Self::OneSided),
            "absolute" | "abs" => Ok(Self::Absolute),
            other => Err(Error::Parse {
                context: "mode".to_string(),
                message: format!("unknown tail mode {other:?}, expected one-sided | absolute"),
            }),
        }
    }

    fn matches(self, value: f64, t: f64) -> bool {
        match self {
            TailMode::OneSided => value >= t,
            TailMode::Absolute => value.abs() >= t,
        }
    }
}

impl fmt::Display for TailMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailMode::OneSided => "one-sided",
            TailMode::Absolute => "absolute",
        })
    }
}

/// Enumeration budget. Subset and sign enumerations are capped by outcome
/// count; path enumerations (which grow as `2^(n-1)`) are capped by `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationCaps {
    pub max_outcomes: u128,
    pub max_path_n: usize,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        Self {
            max_outcomes: 10_000_000,
            max_path_n: 24,
        }
    }
}

/// Outcome types a finite law can range over. Provides the total order used
/// for deterministic merging and sorting of the support.
pub trait LawOutcome: Clone {
    fn cmp_key(&self, other: &Self) -> Ordering;
}

impl LawOutcome for f64 {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

impl LawOutcome for usize {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl LawOutcome for SignVector {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.signs().cmp(other.signs())
    }
}

#[derive(Clone)]
struct OrdKey<T: LawOutcome>(T);

impl<T: LawOutcome> PartialEq for OrdKey<T> {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp_key(&other.0) == Ordering::Equal
    }
}
impl<T: LawOutcome> Eq for OrdKey<T> {}
impl<T: LawOutcome> PartialOrd for OrdKey<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: LawOutcome> Ord for OrdKey<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_key(&other.0)
    }
}

/// An exact finite distribution: distinct outcomes with positive
/// probabilities summing to 1, sorted by outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw<T: LawOutcome> {
    support: Vec<(T, f64)>,
}

impl<T: LawOutcome> DiscreteLaw<T> {
    /// Merge outcome counts and divide once by the total.
    pub fn from_counts(counts: impl IntoIterator<Item = (T, u64)>) -> Self {
        let mut map: BTreeMap<OrdKey<T>, u64> = BTreeMap::new();
        for (outcome, count) in counts {
            *map.entry(OrdKey(outcome)).or_insert(0) += count;
        }
        let total: u64 = map.values().sum();
        let support = map
            .into_iter()
            .filter(|(_, c)| *c > 0)
            .map(|(k, c)| (k.0, c as f64 / total as f64))
            .collect();
        Self { support }
    }

    /// Outcomes and probabilities, sorted by outcome.
    pub fn support(&self) -> &[(T, f64)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Probability of one outcome (0 if absent from the support).
    pub fn probability_of(&self, outcome: &T) -> f64 {
        self.support
            .binary_search_by(|(o, _)| o.cmp_key(outcome))
            .map(|i| self.support[i].1)
            .unwrap_or(0.0)
    }

    /// Check the law invariants: distinct sorted outcomes, positive
    /// probabilities summing to 1 within 1e-12.
    pub fn check_normalized(&self) -> bool {
        let sum: f64 = self.support.iter().map(|(_, p)| p).sum();
        let sorted = self
            .support
            .windows(2)
            .all(|w| w[0].0.cmp_key(&w[1].0) == Ordering::Less);
        (sum - 1.0).abs() <= 1e-12 && sorted && self.support.iter().all(|(_, p)| *p > 0.0)
    }
}

impl DiscreteLaw<f64> {
    pub fn mean(&self) -> f64 {
        self.support.iter().map(|(v, p)| v * p).sum()
    }

    /// Lower (left-continuous inverse CDF) quantile: the smallest outcome
    /// whose cumulative probability reaches `q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0 < q && q <= 1.0) {
            return Err(Error::InvalidQuantile(q));
        }
        let mut cum = 0.0;
        for (v, p) in &self.support {
            cum += p;
            if cum >= q {
                return Ok(*v);
            }
        }
        // Cumulative rounding can leave the last step marginally below 1.
        Ok(self.support.last().expect("law has support").0)
    }
}

impl<T: LawOutcome + fmt::Display> DiscreteLaw<T> {
    /// CSV projection: `outcome,probability` rows.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("outcome,probability\n");
        for (v, p) in &self.support {
            out.push_str(&format!("{v},{p}\n"));
        }
        out
    }
}

impl<T: LawOutcome + Serialize> DiscreteLaw<T> {
    /// JSON projection: an array of `{"outcome": ..., "probability": ...}`.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .support
            .iter()
            .map(|(v, p)| {
                serde_json::json!({
                    "outcome": v,
                    "probability": p,
                })
            })
            .collect();
        serde_json::Value::Array(entries)
    }
}

/// Total variation distance `(1/2) sum |p - q|` over the union of supports.
pub fn tv_distance<T: LawOutcome>(p: &DiscreteLaw<T>, q: &DiscreteLaw<T>) -> f64 {
    let mut i = 0;
    let mut j = 0;
    let mut acc = 0.0;
    let ps = p.support();
    let qs = q.support();
    while i < ps.len() || j < qs.len() {
        if i == ps.len() {
            acc += qs[j].1;
            j += 1;
        } else if j == qs.len() {
            acc += ps[i].1;
            i += 1;
        } else {
            match ps[i].0.cmp_key(&qs[j].0) {
                Ordering::Less => {
                    acc += ps[i].1;
                    i += 1;
                }
                Ordering::Greater => {
                    acc += qs[j].1;
                    j += 1;
                }
                Ordering::Equal => {
                    acc += (ps[i].1 - qs[j].1).abs();
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    acc / 2.0
}

/// Round to 12 significant decimal digits; used before merging real-valued
/// outcomes.
pub(crate) fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let mag = x.abs().log10().floor() as i32;
    let p = 11 - mag;
    if (-300..=300).contains(&p) {
        let f = 10f64.powi(p);
        (x * f).round() / f
    } else {
        format!("{x:.11e}").parse().unwrap_or(x)
    }
}

/// Exact binomial coefficient in 128-bit arithmetic.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * u128::from(n - i) / u128::from(i + 1);
    }
    r
}

fn check_even(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddLength(n));
    }
    Ok(())
}

fn check_outcome_cap(needed: u128, caps: &EnumerationCaps) -> Result<()> {
    if needed > caps.max_outcomes {
        return Err(Error::CapExceeded {
            needed,
            cap: caps.max_outcomes,
        });
    }
    Ok(())
}

fn check_path_cap(n: usize, caps: &EnumerationCaps) -> Result<()> {
    // 63 is the enumerator's hard limit (2^(n-1) loop counter), far past
    // anything tractable; custom caps cannot lift it.
    let cap = caps.max_path_n.min(63);
    if n > cap {
        return Err(Error::CapExceeded {
            needed: n as u128,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// All balanced sign vectors of length `n`, each with probability
/// `1 / C(n, n/2)`, in sorted order.
pub fn enumerate_balanced_with_caps(
    n: usize,
    caps: &EnumerationCaps,
) -> Result<DiscreteLaw<SignVector>> {
    check_even(n)?;
    check_outcome_cap(binomial(n as u64, n as u64 / 2), caps)?;
    let counts = (0..n).combinations(n / 2).map(|picked| {
        let mut signs = vec![-1i8; n];
        for i in picked {
            signs[i] = 1;
        }
        (
            SignVector::new(signs).expect("subset vector is balanced"),
            1u64,
        )
    });
    Ok(DiscreteLaw::from_counts(counts))
}

pub fn enumerate_balanced(n: usize) -> Result<DiscreteLaw<SignVector>> {
    enumerate_balanced_with_caps(n, &EnumerationCaps::default())
}

/// Iterate every coupled outcome: path prefixes of length `n-1` carry the
/// whole coupled law because the stopping time never exceeds `n-1`.
fn for_each_coupled(n: usize, mut visit: impl FnMut(&RademacherPath, &CoupledOutcome)) {
    let prefixes: u64 = 1 << (n - 1);
    let mut signs = vec![1i8; n];
    for mask in 0..prefixes {
        for (t, s) in signs.iter_mut().enumerate().take(n - 1) {
            *s = if mask >> t & 1 == 1 { 1 } else { -1 };
        }
        // The trailing entry is never read: T <= n-1 and the coupled vector
        // depends only on the path up to T.
        signs[n - 1] = 1;
        let path = RademacherPath::new(signs.clone()).expect("prefix entries are signs");
        let draw = couple(&path);
        visit(
            &path,
            &CoupledOutcome {
                stopping_time: draw.stopping_time,
                coupled: draw.coupled,
            },
        );
    }
}

struct CoupledOutcome {
    stopping_time: usize,
    coupled: SignVector,
}

/// Exact law of the coupled sign vector; probabilities are dyadic
/// (`count / 2^(n-1)`).
pub fn coupled_law_with_caps(n: usize, caps: &EnumerationCaps) -> Result<DiscreteLaw<SignVector>> {
    check_even(n)?;
    check_path_cap(n, caps)?;
    // Merge while enumerating: the distinct outcomes (at most C(n, n/2))
    // are far fewer than the 2^(n-1) paths near the cap.
    let mut counts: BTreeMap<SignVector, u64> = BTreeMap::new();
    for_each_coupled(n, |_, outcome| {
        *counts.entry(outcome.coupled.clone()).or_insert(0) += 1;
    });
    Ok(DiscreteLaw::from_counts(counts))
}

pub fn coupled_law(n: usize) -> Result<DiscreteLaw<SignVector>> {
    coupled_law_with_caps(n, &EnumerationCaps::default())
}

/// Exact law of the stopping time over `[n/2, n-1]`, by path enumeration.
pub fn exact_t_law_with_caps(n: usize, caps: &EnumerationCaps) -> Result<DiscreteLaw<usize>> {
    check_even(n)?;
    check_path_cap(n, caps)?;
    let mut counts = vec![0u64; n];
    for_each_coupled(n, |_, outcome| {
        counts[outcome.stopping_time - 1] += 1;
    });
    Ok(DiscreteLaw::from_counts(
        counts
            .into_iter()
            .enumerate()
            .map(|(index, count)| (index + 1, count)),
    ))
}

pub fn exact_t_law(n: usize) -> Result<DiscreteLaw<usize>> {
    exact_t_law_with_caps(n, &EnumerationCaps::default())
}

/// Exact pushforward of a sampling scheme through the chaos: enumerate the
/// scheme's outcomes, evaluate, and merge equal values.
pub fn exact_chaos_law_with_caps(
    a: &CoefficientMatrix,
    scheme: Scheme,
    caps: &EnumerationCaps,
) -> Result<DiscreteLaw<f64>> {
    let n = a.n();
    let mut counts: Vec<(f64, u64)> = Vec::new();
    match scheme {
        Scheme::WithoutReplacement => {
            check_even(n)?;
            check_outcome_cap(binomial(n as u64, n as u64 / 2), caps)?;
            let mut signs = vec![-1i8; n];
            for picked in (0..n).combinations(n / 2) {
                signs.iter_mut().for_each(|s| *s = -1);
                for i in picked {
                    signs[i] = 1;
                }
                counts.push((round_sig12(eval_chaos(a, &signs)?), 1));
            }
        }
        Scheme::IidRademacher => {
            // 2^63 sign patterns exceed any tractable budget and the loop
            // counter alike.
            if n > 63 {
                let needed = if n < 128 { 1u128 << n } else { u128::MAX };
                return Err(Error::CapExceeded {
                    needed,
                    cap: caps.max_outcomes.min(1u128 << 63),
                });
            }
            check_outcome_cap(1u128 << n, caps)?;
            let total: u64 = 1 << n;
            let mut signs = vec![1i8; n];
            for mask in 0..total {
                for (i, s) in signs.iter_mut().enumerate() {
                    *s = if mask >> i & 1 == 1 { 1 } else { -1 };
                }
                counts.push((round_sig12(eval_chaos(a, &signs)?), 1));
            }
        }
        Scheme::Coupled => {
            check_even(n)?;
            check_path_cap(n, caps)?;
            let mut err = None;
            for_each_coupled(n, |_, outcome| {
                if err.is_some() {
                    return;
                }
                match eval_chaos(a, outcome.coupled.signs()) {
                    Ok(z) => counts.push((round_sig12(z), 1)),
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
    }
    Ok(DiscreteLaw::from_counts(counts))
}

pub fn exact_chaos_law(a: &CoefficientMatrix, scheme: Scheme) -> Result<DiscreteLaw<f64>> {
    exact_chaos_law_with_caps(a, scheme, &EnumerationCaps::default())
}

/// Tail probability of a real-valued law.
pub fn exact_tail(law: &DiscreteLaw<f64>, t: f64, mode: TailMode) -> f64 {
    law.support()
        .iter()
        .filter(|(v, _)| mode.matches(*v, t))
        .map(|(_, p)| p)
        .sum::<f64>()
        + 0.0
}

/// Closed-form mean of the chaos under sampling without replacement:
/// `-(sum_{i != j} a_ij) / (n - 1)`.
pub fn exact_mean(a: &CoefficientMatrix) -> f64 {
    let total: f64 = a.entries().iter().sum();
    -total / (a.n() as f64 - 1.0)
}
