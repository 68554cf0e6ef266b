//! Monte Carlo estimation of chaos tails and quantiles, bound-vs-empirical
//! comparison tables, and empirical calibration of the constants `kappa`
//! and `c`.
//!
//! Replicates are keyed by `(seed, stream, replicate index)` and partitioned
//! across the current rayon pool; results never depend on the worker count.
//! Calibration uses exact enumeration only, so calibrated constants carry no
//! statistical error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::bounds::{
    default_delta, optimize_delta, split_probability, split_probability_raw, split_threshold,
    simplified_bound, BoundConstants,
};
use crate::chaos::eval_chaos;
use crate::coeff::CoefficientMatrix;
use crate::error::{Error, Result};
use crate::oracle::{
    exact_chaos_law_with_caps, exact_tail, round_sig12, DiscreteLaw, EnumerationCaps, TailMode,
};
use crate::samplers::{draw_coupled, draw_iid, draw_without_replacement, RngSpec, Scheme};

/// Exact-binomial estimate of a tail probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub p_hat: f64,
    /// Clopper-Pearson lower limit at level `conf`.
    pub ci_low: f64,
    /// Clopper-Pearson upper limit at level `conf`.
    pub ci_high: f64,
    pub successes: u64,
    pub reps: u64,
    pub seed: u64,
    pub conf: f64,
}

/// Exact (Clopper-Pearson) binomial confidence interval for `successes`
/// out of `trials` at two-sided level `conf`.
pub fn clopper_pearson(successes: u64, trials: u64, conf: f64) -> Result<(f64, f64)> {
    if !(conf > 0.0 && conf < 1.0) {
        return Err(Error::InvalidConfidence(conf));
    }
    if trials == 0 {
        return Err(Error::NoReplicates);
    }
    let alpha = 1.0 - conf;
    let k = successes as f64;
    let n = trials as f64;
    let low = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0)
            .expect("valid beta shape")
            .inverse_cdf(alpha / 2.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .expect("valid beta shape")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    Ok((low, high))
}

fn check_scheme_n(n: usize, scheme: Scheme) -> Result<()> {
    match scheme {
        Scheme::WithoutReplacement | Scheme::Coupled => {
            if n < 2 || !n.is_multiple_of(2) {
                return Err(Error::OddLength(n));
            }
        }
        Scheme::IidRademacher => {}
    }
    Ok(())
}

/// One replicate of the chaos under a scheme. Values are canonicalized to
/// the same 12-significant-digit grid the enumeration oracle merges on, so
/// Monte Carlo and enumeration estimate the same functional even when a
/// threshold sits exactly on an atom.
fn draw_value(a: &CoefficientMatrix, scheme: Scheme, rng: &RngSpec, replicate: u64) -> f64 {
    let value = match scheme {
        Scheme::WithoutReplacement => {
            let v = draw_without_replacement(a.n(), rng, replicate).expect("validated n");
            eval_chaos(a, v.signs())
        }
        Scheme::IidRademacher => {
            let p = draw_iid(a.n(), rng, replicate).expect("validated n");
            eval_chaos(a, p.signs())
        }
        Scheme::Coupled => {
            let d = draw_coupled(a.n(), rng, replicate).expect("validated n");
            eval_chaos(a, d.coupled.signs())
        }
    };
    round_sig12(value.expect("draw length matches matrix"))
}

/// Estimate `P(Z >= t)` (or `P(|Z| >= t)`) under a sampling scheme, with an
/// exact binomial interval at level `conf`.
pub fn mc_tail(
    a: &CoefficientMatrix,
    t: f64,
    mode: TailMode,
    scheme: Scheme,
    reps: u64,
    rng: &RngSpec,
    conf: f64,
) -> Result<MonteCarloEstimate> {
    if reps == 0 {
        return Err(Error::NoReplicates);
    }
    if !(conf > 0.0 && conf < 1.0) {
        return Err(Error::InvalidConfidence(conf));
    }
    check_scheme_n(a.n(), scheme)?;
    let successes: u64 = (0..reps)
        .into_par_iter()
        .map(|r| {
            let z = draw_value(a, scheme, rng, r);
            let hit = match mode {
                TailMode::OneSided => z >= t,
                TailMode::Absolute => z.abs() >= t,
            };
            u64::from(hit)
        })
        .sum();
    let (ci_low, ci_high) = clopper_pearson(successes, reps, conf)?;
    Ok(MonteCarloEstimate {
        p_hat: successes as f64 / reps as f64,
        ci_low,
        ci_high,
        successes,
        reps,
        seed: rng.seed,
        conf,
    })
}

/// Lower empirical quantile (inverse CDF, left-continuous): the smallest
/// sampled value whose empirical CDF reaches `q`.
pub fn mc_quantile(
    a: &CoefficientMatrix,
    q: f64,
    scheme: Scheme,
    reps: u64,
    rng: &RngSpec,
) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidQuantile(q));
    }
    if reps == 0 {
        return Err(Error::NoReplicates);
    }
    check_scheme_n(a.n(), scheme)?;
    let mut values: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| draw_value(a, scheme, rng, r))
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values[lower_quantile_index(q, reps)])
}

pub(crate) fn lower_quantile_index(q: f64, len: u64) -> usize {
    let mut k = ((q * len as f64).ceil() as u64).clamp(1, len);
    // Guard the float product against rounding past an exact multiple.
    if k > 1 && (k - 1) as f64 / len as f64 >= q {
        k -= 1;
    }
    (k - 1) as usize
}

/// How the comparison engine obtains the empirical tail.
#[derive(Debug, Clone)]
pub enum Engine {
    Enumeration { caps: EnumerationCaps },
    MonteCarlo { reps: u64, rng: RngSpec, conf: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngineKind {
    #[serde(rename = "enumeration")]
    Enumeration,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

/// Which bound family a comparison row evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundFamily {
    /// The four-term split bound.
    Split,
    /// The simplified `c n M (x + log n)` bound.
    Simplified,
}

/// Policy for choosing the cut parameter of the split bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaPolicy {
    /// `ceil(sqrt(2 n x))`, clamped to `[0, n]`.
    DefaultSqrt,
    /// Exhaustive scan minimizing the threshold subject to a probability
    /// target.
    Optimized { target_prob: f64 },
    Fixed(usize),
}

impl DeltaPolicy {
    fn choose(&self, a: &CoefficientMatrix, x: f64, kappa: f64) -> Result<usize> {
        match *self {
            DeltaPolicy::DefaultSqrt => Ok(default_delta(a.n(), x)),
            DeltaPolicy::Optimized { target_prob } => {
                Ok(optimize_delta(a, x, kappa, target_prob)?.delta)
            }
            DeltaPolicy::Fixed(delta) => {
                if delta > a.n() {
                    return Err(Error::DeltaOutOfRange { delta, n: a.n() });
                }
                Ok(delta)
            }
        }
    }
}

/// One bound-vs-empirical comparison at a single `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub delta: usize,
    pub family: BoundFamily,
    pub mode: TailMode,
    pub scheme: Scheme,
    pub bound_threshold: f64,
    pub bound_prob: f64,
    pub bound_prob_raw: f64,
    pub empirical_prob: f64,
    /// Confidence limits, absent for exact enumeration rows.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub source: EngineKind,
    /// The bound is contradicted by the data: the clipped bound probability
    /// falls below the exact tail (enumeration) or below the lower
    /// confidence limit (Monte Carlo). Vacuous bounds can never violate.
    pub violation: bool,
    /// Threshold at or below 0, where an absolute tail is trivially 1;
    /// flagged so degenerate inputs surface instead of hiding.
    pub degenerate_threshold: bool,
}

/// Evaluate a bound family pointwise over an `x` grid and compare each
/// threshold/probability pair against the exact or estimated tail at that
/// threshold. Violations are flagged, never dropped.
#[allow(clippy::too_many_arguments)]
pub fn compare_bounds(
    a: &CoefficientMatrix,
    xs: &[f64],
    policy: DeltaPolicy,
    constants: &BoundConstants,
    scheme: Scheme,
    mode: TailMode,
    family: BoundFamily,
    engine: &Engine,
) -> Result<Vec<ComparisonRow>> {
    if xs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &x in xs {
        if x.is_nan() || x <= 0.0 {
            return Err(Error::NonpositiveX(x));
        }
    }
    constants.validate()?;
    check_scheme_n(a.n(), scheme)?;

    let law = match engine {
        Engine::Enumeration { caps } => Some(exact_chaos_law_with_caps(a, scheme, caps)?),
        Engine::MonteCarlo { .. } => None,
    };

    let n = a.n();
    let max_abs = a.max_abs();
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        let delta = policy.choose(a, x, constants.kappa)?;
        let (threshold, prob, prob_raw) = match family {
            BoundFamily::Split => (
                split_threshold(a, x, delta, constants.kappa)?,
                split_probability(n, delta, x)?,
                split_probability_raw(n, delta, x)?,
            ),
            BoundFamily::Simplified => {
                let (t, p) = simplified_bound(n, max_abs, x, constants)?;
                (t, p, constants.big_c * (-x).exp())
            }
        };
        let (empirical, ci, source) = match engine {
            Engine::Enumeration { .. } => {
                let p = exact_tail(law.as_ref().expect("law built"), threshold, mode);
                (p, None, EngineKind::Enumeration)
            }
            Engine::MonteCarlo { reps, rng, conf } => {
                let est = mc_tail(a, threshold, mode, scheme, *reps, rng, *conf)?;
                (est.p_hat, Some((est.ci_low, est.ci_high)), EngineKind::MonteCarlo)
            }
        };
        let violation = match ci {
            None => prob < empirical,
            Some((low, _)) => prob < low,
        };
        rows.push(ComparisonRow {
            x,
            delta,
            family,
            mode,
            scheme,
            bound_threshold: threshold,
            bound_prob: prob,
            bound_prob_raw: prob_raw,
            empirical_prob: empirical,
            ci_low: ci.map(|c| c.0),
            ci_high: ci.map(|c| c.1),
            source,
            violation,
            degenerate_threshold: threshold <= 0.0,
        });
    }
    Ok(rows)
}

/// Which constant a calibration run pins down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantName {
    Kappa,
    C,
}

/// Result of an exact calibration run. Values are ensemble-relative: they
/// make the stated criterion hold on the given instances, nothing more.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub constant_name: ConstantName,
    pub value: f64,
    /// Description of the instance set the value is relative to.
    pub instances: String,
    /// The exact criterion the value is the smallest solution of.
    pub criterion: String,
    pub warnings: Vec<String>,
}

fn describe_instances(instances: &[CoefficientMatrix]) -> String {
    let mut ns: Vec<usize> = instances.iter().map(|a| a.n()).collect();
    ns.sort_unstable();
    ns.dedup();
    let list: Vec<String> = ns.iter().map(|n| n.to_string()).collect();
    format!("{} instances, n in {{{}}}", instances.len(), list.join(", "))
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::NonpositiveConstant {
            name: "tolerance",
            value: tolerance,
        });
    }
    Ok(())
}

/// Smallest `kappa` (bisection to `tolerance`) such that on every instance
/// the exact i.i.d.-chaos moment generating value
/// `E[exp(|Z'| / (kappa * sigma))]` stays at or below 2.
///
/// The returned value always sits on the feasible side of the bisection
/// bracket, so the criterion holds exactly at it.
pub fn calibrate_kappa(
    instances: &[CoefficientMatrix],
    tolerance: f64,
) -> Result<CalibrationReport> {
    calibrate_kappa_with_caps(instances, tolerance, &EnumerationCaps::default())
}

pub fn calibrate_kappa_with_caps(
    instances: &[CoefficientMatrix],
    tolerance: f64,
    caps: &EnumerationCaps,
) -> Result<CalibrationReport> {
    if instances.is_empty() {
        return Err(Error::NoInstances);
    }
    check_tolerance(tolerance)?;

    // Precompute |Z'| / sigma atoms once; each feasibility probe is then a
    // weighted exp-sum.
    let mut scaled: Vec<Vec<(f64, f64)>> = Vec::with_capacity(instances.len());
    for (index, a) in instances.iter().enumerate() {
        let sigma = a.sigma();
        if sigma <= 0.0 {
            return Err(Error::SigmaZero { index });
        }
        let law = exact_chaos_law_with_caps(a, Scheme::IidRademacher, caps)?;
        scaled.push(
            law.support()
                .iter()
                .map(|(z, p)| (z.abs() / sigma, *p))
                .collect(),
        );
    }
    let feasible = |kappa: f64| -> bool {
        scaled.iter().all(|atoms| {
            let mgf: f64 = atoms.iter().map(|(w, p)| p * (w / kappa).exp()).sum();
            mgf <= 2.0
        })
    };

    let mut hi = 1.0f64;
    let mut grow = 0;
    while !feasible(hi) {
        hi *= 2.0;
        grow += 1;
        assert!(grow < 1100, "kappa search failed to bracket");
    }
    let mut lo = 0.0f64;
    while hi - lo > tolerance / 4.0 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    Ok(CalibrationReport {
        constant_name: ConstantName::Kappa,
        value: hi,
        instances: describe_instances(instances),
        criterion: format!(
            "smallest kappa with E[exp(|Z'|/(kappa*sigma))] <= 2 on every instance \
             (exact iid enumeration, bisection tolerance {tolerance:e})"
        ),
        warnings: Vec::new(),
    })
}

/// Smallest `c` such that for every instance and every grid point `x`, the
/// exact tail of the without-replacement chaos at threshold
/// `c * n * M * (x + log n)` stays at or below `big_c * exp(-x)`.
///
/// `mode` selects the tail the criterion constrains (one-sided or
/// absolute), so a downstream check can calibrate against exactly the
/// quantity it compares. Instances with `M = 0` cannot meet a sub-unit
/// probability target at any `c`; they are skipped with a warning.
pub fn calibrate_c(
    instances: &[CoefficientMatrix],
    big_c: f64,
    xs: &[f64],
    mode: TailMode,
    tolerance: f64,
) -> Result<CalibrationReport> {
    calibrate_c_with_caps(instances, big_c, xs, mode, tolerance, &EnumerationCaps::default())
}

pub fn calibrate_c_with_caps(
    instances: &[CoefficientMatrix],
    big_c: f64,
    xs: &[f64],
    mode: TailMode,
    tolerance: f64,
    caps: &EnumerationCaps,
) -> Result<CalibrationReport> {
    if instances.is_empty() {
        return Err(Error::NoInstances);
    }
    if xs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &x in xs {
        if x.is_nan() || x <= 0.0 {
            return Err(Error::NonpositiveX(x));
        }
    }
    if big_c.is_nan() || big_c <= 0.0 {
        return Err(Error::NonpositiveConstant {
            name: "C",
            value: big_c,
        });
    }
    check_tolerance(tolerance)?;

    let mut warnings = Vec::new();
    let mut constraints: Vec<(DiscreteLaw<f64>, usize, f64)> = Vec::new();
    for (index, a) in instances.iter().enumerate() {
        let max_abs = a.max_abs();
        if max_abs == 0.0 {
            if xs.iter().any(|&x| big_c * (-x).exp() < 1.0) {
                warnings.push(format!(
                    "instance {index} skipped: max|a_ij| = 0 leaves the threshold at 0, \
                     which cannot meet a probability target below 1"
                ));
            }
            continue;
        }
        let law = exact_chaos_law_with_caps(a, Scheme::WithoutReplacement, caps)?;
        constraints.push((law, a.n(), max_abs));
    }

    let feasible = |c: f64| -> bool {
        constraints.iter().all(|(law, n, max_abs)| {
            xs.iter().all(|&x| {
                let threshold = c * *n as f64 * max_abs * (x + (*n as f64).ln());
                exact_tail(law, threshold, mode) <= big_c * (-x).exp()
            })
        })
    };

    let value = if feasible(0.0) {
        0.0
    } else {
        let mut hi = 1.0f64;
        let mut grow = 0;
        while !feasible(hi) {
            hi *= 2.0;
            grow += 1;
            assert!(grow < 1100, "c search failed to bracket");
        }
        let mut lo = 0.0f64;
        while hi - lo > tolerance / 4.0 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let grid: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
    Ok(CalibrationReport {
        constant_name: ConstantName::C,
        value,
        instances: describe_instances(instances),
        criterion: format!(
            "smallest c with exact {mode} tail at threshold c*n*M*(x+log n) <= {big_c}*exp(-x) \
             for x in {{{}}} (exact swr enumeration, bisection tolerance {tolerance:e})",
            grid.join(", ")
        ),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::rademacher_tail;
    use crate::ensembles::Ensemble;
    use crate::oracle::exact_chaos_law;
    use approx::assert_relative_eq;

    fn all_ones(n: usize) -> CoefficientMatrix {
        CoefficientMatrix::from_fn(n, |_, _| 1.0).unwrap()
    }

    fn zero(n: usize) -> CoefficientMatrix {
        CoefficientMatrix::from_fn(n, |_, _| 0.0).unwrap()
    }

    fn unit_pair() -> CoefficientMatrix {
        CoefficientMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]], true).unwrap()
    }

    #[test]
    fn clopper_pearson_reference_values() {
        let (lo, hi) = clopper_pearson(5, 10, 0.95).unwrap();
        assert_relative_eq!(lo, 0.187086, max_relative = 1e-4);
        assert_relative_eq!(hi, 0.812914, max_relative = 1e-4);

        let (lo, hi) = clopper_pearson(0, 20, 0.99).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 1.0);

        let (lo, hi) = clopper_pearson(20, 20, 0.99).unwrap();
        assert!(lo > 0.0 && lo < 1.0);
        assert_eq!(hi, 1.0);

        assert!(clopper_pearson(1, 10, 1.0).is_err());
    }

    #[test]
    fn interval_brackets_point_estimate() {
        for (k, n) in [(0u64, 50u64), (1, 50), (25, 50), (49, 50), (50, 50)] {
            let (lo, hi) = clopper_pearson(k, n, 0.99).unwrap();
            let p_hat = k as f64 / n as f64;
            assert!(lo <= p_hat && p_hat <= hi, "k={k} n={n}");
        }
    }

    #[test]
    fn mc_tail_degenerate_examples() {
        let rng = RngSpec::new(3, "mc");
        let est = mc_tail(
            &zero(4),
            0.5,
            TailMode::Absolute,
            Scheme::WithoutReplacement,
            500,
            &rng,
            0.99,
        )
        .unwrap();
        assert_eq!(est.p_hat, 0.0);
        assert_eq!(est.ci_low, 0.0);

        let est = mc_tail(
            &all_ones(4),
            -4.0,
            TailMode::OneSided,
            Scheme::WithoutReplacement,
            500,
            &rng,
            0.99,
        )
        .unwrap();
        assert_eq!(est.p_hat, 1.0);
        assert_eq!(est.ci_high, 1.0);
    }

    #[test]
    fn mc_tail_is_reproducible_and_near_exact() {
        let a = Ensemble::Uniform.generate(8, 5).unwrap();
        let law = exact_chaos_law(&a, Scheme::WithoutReplacement).unwrap();
        let t = law.quantile(0.8).unwrap();
        let exact = exact_tail(&law, t, TailMode::OneSided);

        let rng = RngSpec::new(11, "tail");
        let est = mc_tail(
            &a,
            t,
            TailMode::OneSided,
            Scheme::WithoutReplacement,
            100_000,
            &rng,
            0.999,
        )
        .unwrap();
        let again = mc_tail(
            &a,
            t,
            TailMode::OneSided,
            Scheme::WithoutReplacement,
            100_000,
            &rng,
            0.999,
        )
        .unwrap();
        assert_eq!(est, again);
        assert!(
            est.ci_low <= exact && exact <= est.ci_high,
            "exact {exact} outside [{}, {}]",
            est.ci_low,
            est.ci_high
        );
    }

    #[test]
    fn mc_tail_identical_across_worker_counts() {
        let a = Ensemble::Gaussian.generate(10, 2).unwrap();
        let rng = RngSpec::new(21, "workers");
        let run = || {
            let est = mc_tail(
                &a,
                1.0,
                TailMode::Absolute,
                Scheme::Coupled,
                5_000,
                &rng,
                0.99,
            )
            .unwrap();
            let quantile =
                mc_quantile(&a, 0.9, Scheme::Coupled, 5_000, &rng).unwrap();
            (est, quantile.to_bits())
        };
        let mut results = Vec::new();
        for threads in [1usize, 2, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            results.push(pool.install(run));
        }
        assert_eq!(results[0], results[1]);
        assert_eq!(results[1], results[2]);
    }

    #[test]
    fn mc_quantile_examples() {
        let rng = RngSpec::new(7, "quant");
        let q = mc_quantile(&zero(4), 0.5, Scheme::IidRademacher, 100, &rng).unwrap();
        assert_eq!(q, 0.0);

        let q = mc_quantile(&all_ones(4), 0.9, Scheme::WithoutReplacement, 100, &rng).unwrap();
        assert_eq!(q, -4.0);

        assert!(mc_quantile(&zero(4), 1.5, Scheme::IidRademacher, 10, &rng).is_err());
    }

    #[test]
    fn mc_quantile_hits_exact_atoms() {
        let a = Ensemble::Pm { magnitude: 1.0 }.generate(8, 13).unwrap();
        let law = exact_chaos_law(&a, Scheme::WithoutReplacement).unwrap();
        for (seed, q) in [(1u64, 0.95), (2, 0.5), (3, 0.75)] {
            let rng = RngSpec::new(seed, "quantile-check");
            let mc = mc_quantile(&a, q, Scheme::WithoutReplacement, 4_000, &rng).unwrap();
            let exact = law.quantile(q).unwrap();
            assert_eq!(mc, exact, "seed {seed}, q {q}");
        }

        // On a symmetric n=12 instance the law is fine-grained (hundreds of
        // atoms), so the check is against the exact law's CDF: the MC
        // quantile must be a genuine atom whose exact CDF position sits
        // within the binomial sampling band of the requested level.
        let base = Ensemble::Uniform.generate(12, 29).unwrap();
        let sym = base.symmetric_part();
        let law = exact_chaos_law(&sym, Scheme::WithoutReplacement).unwrap();
        let reps = 6_000u64;
        let band = 3.0 * (0.95f64 * 0.05 / reps as f64).sqrt();
        for seed in [5u64, 6] {
            let rng = RngSpec::new(seed, "quantile-check-sym");
            let mc = mc_quantile(&sym, 0.95, Scheme::WithoutReplacement, reps, &rng).unwrap();
            assert!(law.probability_of(&mc) > 0.0, "seed {seed}: {mc} not an atom");
            let cdf_at_mc: f64 = law
                .support()
                .iter()
                .take_while(|(v, _)| *v <= mc)
                .map(|(_, p)| p)
                .sum();
            assert!(
                (cdf_at_mc - 0.95).abs() <= band,
                "seed {seed}: exact CDF at MC quantile is {cdf_at_mc}"
            );
        }
    }

    #[test]
    fn lower_quantile_index_convention() {
        assert_eq!(lower_quantile_index(0.5, 4), 1);
        assert_eq!(lower_quantile_index(0.51, 4), 2);
        assert_eq!(lower_quantile_index(0.999, 10), 9);
        assert_eq!(lower_quantile_index(0.001, 10), 0);
    }

    #[test]
    fn compare_bounds_flags_degenerate_rows_distinctly() {
        let rows = compare_bounds(
            &zero(4),
            &[1.0, 2.0],
            DeltaPolicy::DefaultSqrt,
            &BoundConstants::default(),
            Scheme::WithoutReplacement,
            TailMode::Absolute,
            BoundFamily::Split,
            &Engine::Enumeration {
                caps: EnumerationCaps::default(),
            },
        )
        .unwrap();
        for row in &rows {
            assert_eq!(row.bound_threshold, 0.0);
            assert_eq!(row.empirical_prob, 1.0);
            assert!(row.degenerate_threshold);
        }
    }

    #[test]
    fn compare_bounds_enumeration_rows_are_exact_and_rerun_identical() {
        let a = Ensemble::Pm { magnitude: 1.0 }.generate(8, 3).unwrap();
        let run = || {
            compare_bounds(
                &a,
                &[1.0, 2.0, 4.0],
                DeltaPolicy::DefaultSqrt,
                &BoundConstants::default(),
                Scheme::WithoutReplacement,
                TailMode::Absolute,
                BoundFamily::Split,
                &Engine::Enumeration {
                    caps: EnumerationCaps::default(),
                },
            )
            .unwrap()
        };
        let rows = run();
        assert_eq!(rows, run());
        for row in &rows {
            assert!(row.ci_low.is_none());
            assert_eq!(row.source, EngineKind::Enumeration);
            // Clipped bound >= 1 can never be flagged.
            if row.bound_prob >= 1.0 {
                assert!(!row.violation);
            }
        }
    }

    #[test]
    fn compare_bounds_rejects_bad_grids() {
        let a = all_ones(4);
        let engine = Engine::Enumeration {
            caps: EnumerationCaps::default(),
        };
        assert!(matches!(
            compare_bounds(
                &a,
                &[],
                DeltaPolicy::DefaultSqrt,
                &BoundConstants::default(),
                Scheme::WithoutReplacement,
                TailMode::OneSided,
                BoundFamily::Split,
                &engine,
            ),
            Err(Error::EmptyGrid)
        ));
        assert!(matches!(
            compare_bounds(
                &a,
                &[1.0, -1.0],
                DeltaPolicy::DefaultSqrt,
                &BoundConstants::default(),
                Scheme::WithoutReplacement,
                TailMode::OneSided,
                BoundFamily::Split,
                &engine,
            ),
            Err(Error::NonpositiveX(_))
        ));
    }

    #[test]
    fn calibrate_kappa_closed_form_on_unit_pair() {
        // |Z'| = 2 a.s., sigma = sqrt(2): E[exp(|Z'|/(k*sigma))] <= 2 iff
        // k >= sqrt(2)/ln 2.
        let report = calibrate_kappa(&[unit_pair()], 1e-6).unwrap();
        let expected = 2.0f64.sqrt() / 2.0f64.ln();
        assert!(
            (report.value - expected).abs() <= 1e-6,
            "kappa {} vs closed form {expected}",
            report.value
        );
        assert_eq!(report.constant_name, ConstantName::Kappa);
    }

    #[test]
    fn calibrate_kappa_grows_with_instance_set_and_is_stable() {
        let small = vec![unit_pair()];
        let mut large = small.clone();
        large.push(Ensemble::Pm { magnitude: 1.0 }.generate(6, 4).unwrap());
        large.push(Ensemble::Uniform.generate(8, 9).unwrap());

        let k_small = calibrate_kappa(&small, 1e-6).unwrap().value;
        let k_large = calibrate_kappa(&large, 1e-6).unwrap().value;
        assert!(k_large >= k_small - 1e-9);

        let rerun = calibrate_kappa(&large, 1e-6).unwrap().value;
        assert!((k_large - rerun).abs() <= 1e-6);
    }

    #[test]
    fn calibrate_kappa_rejects_degenerate_inputs() {
        assert!(matches!(calibrate_kappa(&[], 1e-6), Err(Error::NoInstances)));
        assert!(matches!(
            calibrate_kappa(&[zero(4)], 1e-6),
            Err(Error::SigmaZero { index: 0 })
        ));
        assert!(calibrate_kappa(&[unit_pair()], 0.0).is_err());
    }

    #[test]
    fn calibrated_kappa_makes_the_tail_bound_hold() {
        let instances = vec![
            unit_pair(),
            Ensemble::Uniform.generate(6, 1).unwrap(),
            Ensemble::Gaussian.generate(8, 2).unwrap(),
        ];
        let kappa = calibrate_kappa(&instances, 1e-9).unwrap().value;
        for a in &instances {
            let law = exact_chaos_law(a, Scheme::IidRademacher).unwrap();
            let sigma = a.sigma();
            for &x in &[0.3, 0.5, 1.0, 2.0, 4.0, 8.0] {
                let (threshold, bound) = rademacher_tail(sigma, x, kappa).unwrap();
                let tail = exact_tail(&law, threshold, TailMode::Absolute);
                assert!(
                    tail <= bound + 1e-15,
                    "x={x}: tail {tail} above bound {bound}"
                );
            }
        }
    }

    #[test]
    fn calibrate_c_vacuous_grid_gives_zero() {
        // big_c e^{-x} >= 1 on the whole grid: any threshold works, c = 0.
        let report = calibrate_c(
            &[all_ones(4)],
            8.0,
            &[0.5, 1.0, 2.0],
            TailMode::OneSided,
            1e-9,
        )
        .unwrap();
        assert_eq!(report.value, 0.0);
    }

    #[test]
    fn calibrate_c_point_mass_below_zero_needs_no_constant() {
        // Z = -4 a.s.: the one-sided tail at threshold 0 is already 0.
        let report = calibrate_c(&[all_ones(4)], 2.0, &[4.0, 8.0], TailMode::OneSided, 1e-9)
            .unwrap();
        assert_eq!(report.value, 0.0);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn calibrate_c_skips_zero_matrix_with_warning() {
        let instances = vec![zero(4), Ensemble::Pm { magnitude: 1.0 }.generate(8, 1).unwrap()];
        let report =
            calibrate_c(&instances, 2.0, &[2.0, 4.0], TailMode::Absolute, 1e-9).unwrap();
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].contains("instance 0"));
        assert!(report.value > 0.0);
    }

    #[test]
    fn calibrate_c_is_feasible_and_minimal() {
        let instances = vec![
            Ensemble::Pm { magnitude: 1.0 }.generate(8, 1).unwrap(),
            Ensemble::Pm { magnitude: 2.0 }.generate(12, 2).unwrap(),
        ];
        let xs = [1.0, 2.0, 4.0];
        let big_c = 8.0;
        let tol = 1e-7;
        let report = calibrate_c(&instances, big_c, &xs, TailMode::Absolute, tol).unwrap();
        let c = report.value;
        assert!(c > 0.0);

        let check = |c: f64| -> bool {
            instances.iter().all(|a| {
                let law = exact_chaos_law(a, Scheme::WithoutReplacement).unwrap();
                xs.iter().all(|&x| {
                    let t = c * a.n() as f64 * a.max_abs() * (x + (a.n() as f64).ln());
                    exact_tail(&law, t, TailMode::Absolute) <= big_c * (-x).exp()
                })
            })
        };
        assert!(check(c), "calibrated c must satisfy its own criterion");
        assert!(!check(c - 4.0 * tol), "c should be minimal to tolerance");
    }

    #[test]
    fn estimate_serializes_round_trip() {
        let rng = RngSpec::new(3, "serde");
        let est = mc_tail(
            &unit_pair(),
            0.0,
            TailMode::Absolute,
            Scheme::IidRademacher,
            100,
            &rng,
            0.95,
        )
        .unwrap();
        let json = serde_json::to_string(&est).unwrap();
        let back: MonteCarloEstimate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, est);
    }
}
