//! Batch front-end: generate instances, run samplers, oracles, bounds,
//! Monte Carlo comparisons, coupling diagnostics, calibration and the
//! two-sample test, emitting machine-readable JSON (canonical) or CSV
//! (a projection of the same schema).
//!
//! Every subcommand is deterministic in its flags and seed; output files
//! are written atomically (temp file + rename) and invalid flags never
//! leave partial output behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{
    default_delta, hoeffding_t_bound, term_breakdown, BoundConstants, BoundReport, DeltaSearch,
    optimize_delta,
};
use crate::coeff::CoefficientMatrix;
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::montecarlo::{
    calibrate_c, calibrate_kappa, compare_bounds, BoundFamily, CalibrationReport, ComparisonRow,
    DeltaPolicy, Engine,
};
use crate::oracle::{
    coupled_law, enumerate_balanced, exact_chaos_law, exact_t_law, tv_distance, TailMode,
};
use crate::samplers::{
    draw_coupled, draw_iid, draw_without_replacement, RngSpec, Scheme,
};
use crate::two_sample::{load_dataset, perm_test, DatasetFormat, Kernel, PermTestResult};

/// Environment variable capping the rayon worker count. Results are
/// invariant to it by construction.
pub const THREADS_ENV: &str = "CHAOS_SWR_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "chaos-swr",
    version,
    about = "Samplers, enumeration oracles, tail bounds and permutation tests \
             for the order-2 sign chaos under sampling without replacement"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a named ensemble matrix as CSV.
    GenMatrix(GenMatrixArgs),
    /// Evaluate the split tail bound over an x grid, with term breakdown.
    Bound(BoundArgs),
    /// Compare bound thresholds/probabilities against exact or Monte Carlo tails.
    Compare(CompareArgs),
    /// Exact coupling diagnostics: total variation and stopping-time table.
    DiagnoseCoupling(DiagnoseArgs),
    /// Permutation-bootstrap two-sample test.
    TwoSample(TwoSampleArgs),
    /// Calibrate the bound constants on a seeded ensemble by exact enumeration.
    Calibrate(CalibrateArgs),
    /// Draw sign vectors under a sampling scheme.
    Sample(SampleArgs),
    /// Enumerate an exact law: chaos values, sign vectors or stopping times.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format; JSON is canonical, CSV is a projection.
    #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
    format: String,
    /// Output path; stdout when omitted. Writes are atomic.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MatrixSource {
    /// Matrix CSV file (n rows x n columns, plain decimal).
    #[arg(long, conflicts_with_all = ["ensemble", "n"])]
    matrix: Option<PathBuf>,
    /// Named ensemble: all-ones | uniform | gaussian | rank-one | pm.
    #[arg(long, requires = "n")]
    ensemble: Option<String>,
    /// Instance size for generated ensembles.
    #[arg(long)]
    n: Option<usize>,
    /// Magnitude for the pm ensemble.
    #[arg(long = "M", default_value_t = 1.0)]
    magnitude: f64,
    /// Seed for generated ensembles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl MatrixSource {
    fn load(&self) -> Result<CoefficientMatrix> {
        match (&self.matrix, &self.ensemble) {
            (Some(path), _) => CoefficientMatrix::load_csv(path, false),
            (None, Some(name)) => {
                let n = self.n.ok_or_else(|| Error::Parse {
                    context: "--n".to_string(),
                    message: "required with --ensemble".to_string(),
                })?;
                Ensemble::from_name(name, self.magnitude)?.generate(n, self.seed)
            }
            (None, None) => Err(Error::Parse {
                context: "matrix source".to_string(),
                message: "provide --matrix FILE or --ensemble NAME --n N".to_string(),
            }),
        }
    }
}

#[derive(Debug, Args)]
struct GenMatrixArgs {
    /// Ensemble name: all-ones | uniform | gaussian | rank-one | pm.
    #[arg(long)]
    ensemble: String,
    #[arg(long)]
    n: usize,
    /// Magnitude for the pm ensemble.
    #[arg(long = "M", default_value_t = 1.0)]
    magnitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    source: MatrixSource,
    /// Grid point x > 0 (repeatable).
    #[arg(long = "x", required = true)]
    xs: Vec<f64>,
    /// Cut policy: default | optimized | fixed.
    #[arg(long, value_parser = ["default", "optimized", "fixed"], default_value = "default")]
    delta_policy: String,
    /// Fixed cut value (with --delta-policy fixed).
    #[arg(long)]
    delta: Option<usize>,
    /// Probability target for the optimized policy.
    #[arg(long, default_value_t = 0.5)]
    target_prob: f64,
    #[arg(long, default_value_t = BoundConstants::default().kappa)]
    kappa: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    source: MatrixSource,
    /// Grid point x > 0 (repeatable).
    #[arg(long = "x", required = true)]
    xs: Vec<f64>,
    #[arg(long, value_parser = ["default", "optimized", "fixed"], default_value = "default")]
    delta_policy: String,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    target_prob: f64,
    /// Bound family: split | simplified | both.
    #[arg(long, value_parser = ["split", "simplified", "both"], default_value = "both")]
    family: String,
    /// Tail mode: one-sided | absolute.
    #[arg(long, value_parser = ["one-sided", "absolute"], default_value = "absolute")]
    mode: String,
    /// Sampling scheme: swr | iid | coupled.
    #[arg(long, value_parser = ["swr", "iid", "coupled"], default_value = "swr")]
    scheme: String,
    /// Tail engine: enumeration | monte-carlo.
    #[arg(long, value_parser = ["enumeration", "monte-carlo"], default_value = "enumeration")]
    engine: String,
    #[arg(long, default_value_t = BoundConstants::default().kappa)]
    kappa: f64,
    #[arg(long, default_value_t = BoundConstants::default().c)]
    c: f64,
    #[arg(long = "C", default_value_t = BoundConstants::default().big_c)]
    big_c: f64,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    /// Confidence level for Monte Carlo intervals.
    #[arg(long, default_value_t = 0.99)]
    conf: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct TwoSampleArgs {
    /// Dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Dataset layout: csv-long | csv-two-col.
    #[arg(long, value_parser = ["csv-long", "csv-two-col"], default_value = "csv-long")]
    data_format: String,
    /// Kernel: product | gaussian | tabulated.
    #[arg(long, value_parser = ["product", "gaussian", "tabulated"], default_value = "product")]
    kernel: String,
    /// Bandwidth for the gaussian kernel.
    #[arg(long, default_value_t = 1.0)]
    bandwidth: f64,
    /// Kernel table CSV (with --kernel tabulated).
    #[arg(long)]
    kernel_matrix: Option<PathBuf>,
    /// Significance levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<f64>,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 999)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON file with calibrated constants (fields kappa, c, C).
    #[arg(long)]
    constants_from: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Which constants to calibrate: kappa | c | both.
    #[arg(long, value_parser = ["kappa", "c", "both"], default_value = "both")]
    constant: String,
    /// Instance ensemble.
    #[arg(long, default_value = "pm")]
    ensemble: String,
    /// Instance sizes (repeatable).
    #[arg(long = "n", required = true)]
    ns: Vec<usize>,
    /// Instances generated per size.
    #[arg(long, default_value_t = 5)]
    per_n: usize,
    /// Magnitude for the pm ensemble.
    #[arg(long = "M", default_value_t = 1.0)]
    magnitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed probability constant for the c criterion.
    #[arg(long = "C", default_value_t = BoundConstants::default().big_c)]
    big_c: f64,
    /// Grid point x > 0 for the c criterion (repeatable).
    #[arg(long = "x", default_values_t = [1.0, 2.0, 4.0])]
    xs: Vec<f64>,
    /// Tail mode for the c criterion.
    #[arg(long, value_parser = ["one-sided", "absolute"], default_value = "one-sided")]
    mode: String,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Sampling scheme: swr | iid | coupled.
    #[arg(long, value_parser = ["swr", "iid", "coupled"], default_value = "swr")]
    scheme: String,
    #[arg(long)]
    n: usize,
    /// Number of draws.
    #[arg(long, default_value_t = 10)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    /// What to enumerate: chaos | signs | stopping-time.
    #[arg(long, value_parser = ["chaos", "signs", "stopping-time"], default_value = "chaos")]
    law: String,
    /// Scheme for chaos/signs laws: swr | iid | coupled.
    #[arg(long, value_parser = ["swr", "iid", "coupled"], default_value = "swr")]
    scheme: String,
    #[command(flatten)]
    source: MatrixSource,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parse argv, honor the worker-count cap, run the subcommand.
pub fn run<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::parse_from(argv);
    init_thread_pool();
    dispatch(cli)
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        if let Ok(threads) = raw.parse::<usize>() {
            if threads >= 1 {
                // Ignore failure: the pool may already be initialized in-process.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenMatrix(args) => cmd_gen_matrix(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Compare(args) => cmd_compare(args),
        Command::DiagnoseCoupling(args) => cmd_diagnose_coupling(args),
        Command::TwoSample(args) => cmd_two_sample(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Enumerate(args) => cmd_enumerate(args),
    }
}

fn cmd_gen_matrix(args: GenMatrixArgs) -> Result<()> {
    let matrix = Ensemble::from_name(&args.ensemble, args.magnitude)?.generate(args.n, args.seed)?;
    emit(args.out.as_deref(), matrix.to_csv_string())
}

fn parse_policy(policy: &str, delta: Option<usize>, target_prob: f64) -> Result<DeltaPolicy> {
    match policy {
        "default" => Ok(DeltaPolicy::DefaultSqrt),
        "optimized" => {
            if !(target_prob > 0.0 && target_prob <= 1.0) {
                return Err(Error::InvalidConfidence(target_prob));
            }
            Ok(DeltaPolicy::Optimized {
                target_prob,
            })
        }
        "fixed" => {
            let delta = delta.ok_or_else(|| Error::Parse {
                context: "--delta".to_string(),
                message: "required with --delta-policy fixed".to_string(),
            })?;
            Ok(DeltaPolicy::Fixed(delta))
        }
        other => Err(Error::Parse {
            context: "--delta-policy".to_string(),
            message: format!("unknown policy {other:?}"),
        }),
    }
}

#[derive(Serialize)]
struct BoundRow {
    policy: String,
    meets_target: Option<bool>,
    #[serde(flatten)]
    report: BoundReport,
}

fn cmd_bound(args: BoundArgs) -> Result<()> {
    let matrix = args.source.load()?;
    let policy = parse_policy(&args.delta_policy, args.delta, args.target_prob)?;
    let mut rows = Vec::with_capacity(args.xs.len());
    for &x in &args.xs {
        let (delta, meets_target) = match policy {
            DeltaPolicy::DefaultSqrt => (default_delta_checked(matrix.n(), x)?, None),
            DeltaPolicy::Fixed(d) => (d, None),
            DeltaPolicy::Optimized { target_prob } => {
                let DeltaSearch {
                    delta, meets_target, ..
                } = optimize_delta(&matrix, x, args.kappa, target_prob)?;
                (delta, Some(meets_target))
            }
        };
        rows.push(BoundRow {
            policy: args.delta_policy.clone(),
            meets_target,
            report: term_breakdown(&matrix, x, delta, args.kappa)?,
        });
    }
    match args.output.format.as_str() {
        "json" => emit(args.output.out.as_deref(), to_pretty_json(&rows)?),
        _ => emit(args.output.out.as_deref(), bound_rows_csv(&rows)),
    }
}

fn default_delta_checked(n: usize, x: f64) -> Result<usize> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::NonpositiveX(x));
    }
    Ok(default_delta(n, x))
}

fn bound_rows_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from(
        "x,delta,threshold,probability,probability_raw,rademacher_term,cross_col_term,\
         cross_row_term,tail_term,hoeffding_prob,chaos_prob,y,dominant,policy\n",
    );
    for row in rows {
        let r = &row.report;
        let b = &r.breakdown;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{:?},{}",
            r.x,
            r.delta,
            r.threshold,
            r.probability,
            r.probability_raw,
            b.rademacher_term,
            b.cross_col_term,
            b.cross_row_term,
            b.tail_term,
            b.hoeffding_prob,
            b.chaos_prob,
            b.y.map_or(String::new(), |y| y.to_string()),
            b.dominant,
            row.policy,
        );
    }
    out
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let matrix = args.source.load()?;
    let policy = parse_policy(&args.delta_policy, args.delta, args.target_prob)?;
    let constants = BoundConstants {
        kappa: args.kappa,
        c: args.c,
        big_c: args.big_c,
    };
    let scheme = Scheme::parse(&args.scheme)?;
    let mode = TailMode::parse(&args.mode)?;
    let engine = match args.engine.as_str() {
        "enumeration" => Engine::Enumeration {
            caps: Default::default(),
        },
        _ => Engine::MonteCarlo {
            reps: args.reps,
            rng: RngSpec::new(args.source.seed, "compare"),
            conf: args.conf,
        },
    };
    let families: &[BoundFamily] = match args.family.as_str() {
        "split" => &[BoundFamily::Split],
        "simplified" => &[BoundFamily::Simplified],
        _ => &[BoundFamily::Split, BoundFamily::Simplified],
    };
    let mut rows: Vec<ComparisonRow> = Vec::new();
    for &family in families {
        rows.extend(compare_bounds(
            &matrix, &args.xs, policy, &constants, scheme, mode, family, &engine,
        )?);
    }
    match args.output.format.as_str() {
        "json" => emit(args.output.out.as_deref(), to_pretty_json(&rows)?),
        _ => emit(args.output.out.as_deref(), comparison_rows_csv(&rows)),
    }
}

fn comparison_rows_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "x,delta,family,mode,scheme,bound_threshold,bound_prob,bound_prob_raw,\
         empirical_prob,ci_low,ci_high,source,violation,degenerate_threshold\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.x,
            r.delta,
            json_token(&r.family),
            r.mode,
            r.scheme,
            r.bound_threshold,
            r.bound_prob,
            r.bound_prob_raw,
            r.empirical_prob,
            r.ci_low.map_or(String::new(), |v| v.to_string()),
            r.ci_high.map_or(String::new(), |v| v.to_string()),
            json_token(&r.source),
            r.violation,
            r.degenerate_threshold,
        );
    }
    out
}

fn json_token<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

#[derive(Serialize)]
struct CouplingDiagnostics {
    n: usize,
    /// Total variation between the coupled law and the uniform
    /// without-replacement law. Zero at n = 2; strictly positive for
    /// larger n, so the coupling is reported, never assumed exact in law.
    tv_coupled_vs_exact: f64,
    all_coupled_outcomes_balanced: bool,
    stopping_time_rows: Vec<StoppingTimeRow>,
}

#[derive(Serialize)]
struct StoppingTimeRow {
    delta: usize,
    exact_prob_t_small: f64,
    hoeffding_bound: f64,
    dominated: bool,
}

fn cmd_diagnose_coupling(args: DiagnoseArgs) -> Result<()> {
    let n = args.n;
    let coupled = coupled_law(n)?;
    let exact = enumerate_balanced(n)?;
    let t_law = exact_t_law(n)?;
    let rows: Vec<StoppingTimeRow> = (0..=n)
        .map(|delta| {
            let exact_prob: f64 = t_law
                .support()
                .iter()
                .filter(|(t, _)| *t + delta <= n)
                .map(|(_, p)| p)
                .sum::<f64>()
                + 0.0;
            let bound = hoeffding_t_bound(n, delta).expect("delta in range");
            StoppingTimeRow {
                delta,
                exact_prob_t_small: exact_prob,
                hoeffding_bound: bound,
                dominated: exact_prob <= bound,
            }
        })
        .collect();
    let diag = CouplingDiagnostics {
        n,
        tv_coupled_vs_exact: tv_distance(&coupled, &exact),
        all_coupled_outcomes_balanced: coupled.support().iter().all(|(v, _)| {
            v.signs().iter().map(|&s| i64::from(s)).sum::<i64>() == 0
        }),
        stopping_time_rows: rows,
    };
    match args.output.format.as_str() {
        "json" => emit(args.output.out.as_deref(), to_pretty_json(&diag)?),
        _ => {
            let mut out = String::from("delta,exact_prob_t_small,hoeffding_bound,dominated\n");
            for r in &diag.stopping_time_rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.delta, r.exact_prob_t_small, r.hoeffding_bound, r.dominated
                );
            }
            let _ = writeln!(out, "tv,{},,", diag.tv_coupled_vs_exact);
            emit(args.output.out.as_deref(), out)
        }
    }
}

fn cmd_two_sample(args: TwoSampleArgs) -> Result<()> {
    let format = DatasetFormat::parse(&args.data_format)?;
    let data = load_dataset(&args.data, format)?;
    let kernel = match args.kernel.as_str() {
        "product" => Kernel::Product,
        "gaussian" => Kernel::Gaussian {
            bandwidth: args.bandwidth,
        },
        _ => {
            let path = args.kernel_matrix.as_ref().ok_or_else(|| Error::Parse {
                context: "--kernel-matrix".to_string(),
                message: "required with --kernel tabulated".to_string(),
            })?;
            Kernel::Tabulated(CoefficientMatrix::load_csv(path, false)?)
        }
    };
    let constants = match &args.constants_from {
        Some(path) => Some(read_constants(path)?),
        None => None,
    };
    let rng = RngSpec::new(args.seed, "two-sample");
    let result = perm_test(
        &data,
        &kernel,
        args.reps,
        &rng,
        &args.levels,
        constants.as_ref(),
    )?;
    match args.output.format.as_str() {
        "json" => emit(args.output.out.as_deref(), to_pretty_json(&result)?),
        _ => emit(args.output.out.as_deref(), perm_result_csv(&result)),
    }
}

fn perm_result_csv(result: &PermTestResult) -> String {
    let mut out = String::from("key,value\n");
    let _ = writeln!(out, "u_obs,{}", result.u_obs);
    let _ = writeln!(out, "p_value,{}", result.p_value);
    for q in &result.mc_quantiles {
        let _ = writeln!(out, "critical_{},{}", q.level, q.value);
    }
    if let Some(b) = result.bound_critical {
        let _ = writeln!(out, "bound_critical,{b}");
    }
    let _ = writeln!(out, "reps,{}", result.reps);
    let _ = writeln!(out, "seed,{}", result.seed);
    out
}

fn read_constants(path: &Path) -> Result<BoundConstants> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let defaults = BoundConstants::default();
    let field = |name: &str, fallback: f64| -> f64 {
        value.get(name).and_then(|v| v.as_f64()).unwrap_or(fallback)
    };
    let constants = BoundConstants {
        kappa: field("kappa", defaults.kappa),
        c: field("c", defaults.c),
        big_c: field("C", defaults.big_c),
    };
    constants.validate()?;
    Ok(constants)
}

#[derive(Serialize)]
struct CalibrationOutput {
    ensemble: String,
    ns: Vec<usize>,
    per_n: usize,
    seed: u64,
    kappa: Option<f64>,
    c: Option<f64>,
    #[serde(rename = "C")]
    big_c: f64,
    reports: Vec<CalibrationReport>,
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    if args.ns.is_empty() || args.per_n == 0 {
        return Err(Error::NoInstances);
    }
    let ensemble = Ensemble::from_name(&args.ensemble, args.magnitude)?;
    let mut instances = Vec::with_capacity(args.ns.len() * args.per_n);
    for &n in &args.ns {
        for k in 0..args.per_n {
            instances.push(ensemble.generate(n, args.seed.wrapping_add(k as u64))?);
        }
    }
    let mode = TailMode::parse(&args.mode)?;
    let mut reports = Vec::new();
    let mut kappa = None;
    let mut c = None;
    if args.constant == "kappa" || args.constant == "both" {
        let report = calibrate_kappa(&instances, args.tolerance)?;
        kappa = Some(report.value);
        reports.push(report);
    }
    if args.constant == "c" || args.constant == "both" {
        let report = calibrate_c(&instances, args.big_c, &args.xs, mode, args.tolerance)?;
        c = Some(report.value);
        reports.push(report);
    }
    let output = CalibrationOutput {
        ensemble: args.ensemble.clone(),
        ns: args.ns.clone(),
        per_n: args.per_n,
        seed: args.seed,
        kappa,
        c,
        big_c: args.big_c,
        reports,
    };
    match args.output.format.as_str() {
        "json" => emit(args.output.out.as_deref(), to_pretty_json(&output)?),
        _ => {
            let mut out = String::from("constant,value\n");
            if let Some(k) = output.kappa {
                let _ = writeln!(out, "kappa,{k}");
            }
            if let Some(c) = output.c {
                let _ = writeln!(out, "c,{c}");
            }
            emit(args.output.out.as_deref(), out)
        }
    }
}

#[derive(Serialize)]
struct SampleRow {
    replicate: u64,
    signs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stopping_time: Option<usize>,
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let scheme = Scheme::parse(&args.scheme)?;
    if args.reps == 0 {
        return Err(Error::NoReplicates);
    }
    let rng = RngSpec::new(args.seed, "sample");
    let mut rows = Vec::with_capacity(args.reps as usize);
    for r in 0..args.reps {
        let row = match scheme {
            Scheme::WithoutReplacement => SampleRow {
                replicate: r,
                signs: draw_without_replacement(args.n, &rng, r)?.to_string(),
                path: None,
                stopping_time: None,
            },
            Scheme::IidRademacher => SampleRow {
                replicate: r,
                signs: draw_iid(args.n, &rng, r)?.to_string(),
                path: None,
                stopping_time: None,
            },
            Scheme::Coupled => {
                let d = draw_coupled(args.n, &rng, r)?;
                SampleRow {
                    replicate: r,
                    signs: d.coupled.to_string(),
                    path: Some(d.path.to_string()),
                    stopping_time: Some(d.stopping_time),
                }
            }
        };
        rows.push(row);
    }
    match args.output.format.as_str() {
        "json" => emit(args.output.out.as_deref(), to_pretty_json(&rows)?),
        _ => {
            let mut out = String::from("replicate,signs,path,stopping_time\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.replicate,
                    r.signs,
                    r.path.as_deref().unwrap_or(""),
                    r.stopping_time.map_or(String::new(), |t| t.to_string()),
                );
            }
            emit(args.output.out.as_deref(), out)
        }
    }
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<()> {
    let scheme = Scheme::parse(&args.scheme)?;
    let (json, csv) = match args.law.as_str() {
        "chaos" => {
            let matrix = args.source.load()?;
            let law = exact_chaos_law(&matrix, scheme)?;
            (law.to_json(), law.to_csv_string())
        }
        "signs" => {
            let n = args.source.n.ok_or_else(|| Error::Parse {
                context: "--n".to_string(),
                message: "required for the sign-vector law".to_string(),
            })?;
            let law = match scheme {
                Scheme::Coupled => coupled_law(n)?,
                _ => enumerate_balanced(n)?,
            };
            (law.to_json(), law.to_csv_string())
        }
        _ => {
            let n = args.source.n.ok_or_else(|| Error::Parse {
                context: "--n".to_string(),
                message: "required for the stopping-time law".to_string(),
            })?;
            let law = exact_t_law(n)?;
            (law.to_json(), law.to_csv_string())
        }
    };
    match args.output.format.as_str() {
        "json" => emit(args.output.out.as_deref(), format!("{json:#}\n")),
        _ => emit(args.output.out.as_deref(), csv),
    }
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(format!("{}\n", serde_json::to_string_pretty(value)?))
}

/// Write to stdout, or atomically to a file: the content lands in a
/// temporary sibling first and is renamed into place, so a failed run
/// never leaves a partial file.
fn emit(out: Option<&Path>, content: String) -> Result<()> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
            let file_name = path
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| "out".to_string());
            let tmp_name = format!(".{file_name}.tmp-{}", std::process::id());
            let tmp = match dir {
                Some(d) => d.join(&tmp_name),
                None => PathBuf::from(&tmp_name),
            };
            std::fs::write(&tmp, content)?;
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
    }
}
