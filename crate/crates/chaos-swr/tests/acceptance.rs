//! Acceptance suite: one test per release criterion, each printing an
//! explicit pass/fail line (visible with `--nocapture`). Every tolerance is
//! pinned here, not configured elsewhere.
//!
//! Run with `cargo test -p chaos-swr --test acceptance`.

use chaos_swr::bounds::{
    default_delta, hoeffding_t_bound, hoeffding_t_bound_raw, split_threshold, term_breakdown,
};
use chaos_swr::chaos::eval_chaos;
use chaos_swr::coeff::CoefficientMatrix;
use chaos_swr::ensembles::Ensemble;
use chaos_swr::montecarlo::{calibrate_c, calibrate_kappa, mc_tail};
use chaos_swr::oracle::{
    coupled_law, enumerate_balanced, exact_chaos_law, exact_mean, exact_t_law, exact_tail,
    tv_distance, TailMode,
};
use chaos_swr::samplers::{couple, RademacherPath, RngSpec, Scheme};
use chaos_swr::two_sample::{
    kernel_matrix, load_dataset, perm_test, u_statistic, DatasetFormat, Kernel, TwoSampleDataset,
};

fn criterion(id: &str, what: &str, check: impl FnOnce() -> Result<(), String>) {
    match check() {
        Ok(()) => println!("[acceptance] PASS {id}: {what}"),
        Err(msg) => {
            println!("[acceptance] FAIL {id}: {what} -- {msg}");
            panic!("criterion {id} failed: {msg}");
        }
    }
}

fn all_ones(n: usize) -> CoefficientMatrix {
    CoefficientMatrix::from_fn(n, |_, _| 1.0).unwrap()
}

fn unit_pair() -> CoefficientMatrix {
    CoefficientMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]], true).unwrap()
}

#[test]
fn c01_degenerate_chaos_identity() {
    criterion(
        "c01",
        "all-ones n=4 swr law is a point mass at -4 and the mean formula agrees",
        || {
            let a = all_ones(4);
            let law = exact_chaos_law(&a, Scheme::WithoutReplacement)
                .map_err(|e| e.to_string())?;
            if law.support() != [(-4.0, 1.0)] {
                return Err(format!("law is {:?}", law.support()));
            }
            let mean = exact_mean(&a);
            if mean != -4.0 {
                return Err(format!("exact_mean returned {mean}"));
            }
            Ok(())
        },
    );
}

#[test]
fn c02_hoeffding_dominates_exact_stopping_time_tail() {
    criterion(
        "c02",
        "exact P(T <= n-delta) <= 2 exp(-delta^2/(2(n-delta))) for even n <= 16, delta in [1, n-1]",
        || {
            for n in (2..=16).step_by(2) {
                let law = exact_t_law(n).map_err(|e| e.to_string())?;
                for delta in 1..n {
                    let exact: f64 = law
                        .support()
                        .iter()
                        .filter(|(t, _)| *t + delta <= n)
                        .map(|(_, p)| p)
                        .sum();
                    let bound = hoeffding_t_bound(n, delta).map_err(|e| e.to_string())?;
                    if exact > bound {
                        return Err(format!(
                            "n={n} delta={delta}: exact {exact} > bound {bound}"
                        ));
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn c03_mean_formula_matches_enumeration() {
    criterion(
        "c03",
        "exact_mean matches the enumerated swr mean within 1e-10 relative on 50 seeded matrices",
        || {
            let sizes = [4usize, 6, 8, 10];
            for i in 0..50u64 {
                let n = sizes[(i % 4) as usize];
                let a = Ensemble::Uniform.generate(n, 900 + i).map_err(|e| e.to_string())?;
                let law = exact_chaos_law(&a, Scheme::WithoutReplacement)
                    .map_err(|e| e.to_string())?;
                let formula = exact_mean(&a);
                let enumerated = law.mean();
                let err = (formula - enumerated).abs();
                if err > 1e-10 * formula.abs().max(1.0) {
                    return Err(format!(
                        "matrix {i} (n={n}): formula {formula} vs enumeration {enumerated}"
                    ));
                }
            }
            Ok(())
        },
    );
}

#[test]
fn c04_kappa_calibration_closed_form() {
    criterion(
        "c04",
        "calibrate_kappa on the n=2 unit pair returns sqrt(2)/ln 2 within 1e-6",
        || {
            let report = calibrate_kappa(&[unit_pair()], 1e-6).map_err(|e| e.to_string())?;
            let expected = 2.0f64.sqrt() / 2.0f64.ln();
            let err = (report.value - expected).abs();
            if err > 1e-6 {
                return Err(format!(
                    "kappa {} vs closed form {expected} (err {err:e})",
                    report.value
                ));
            }
            Ok(())
        },
    );
}

#[test]
fn c05_calibrated_rademacher_bound_holds_exactly() {
    criterion(
        "c05",
        "with calibrated kappa, P(|Z'| >= kappa sigma x) <= min(1, 2e^-x) on all 20 instances",
        || {
            let mut instances = Vec::with_capacity(20);
            let sizes = [4usize, 8, 12];
            for i in 0..20u64 {
                let n = sizes[(i % 3) as usize];
                let e = match i % 4 {
                    0 => Ensemble::Uniform,
                    1 => Ensemble::Gaussian,
                    2 => Ensemble::Pm { magnitude: 1.0 },
                    _ => Ensemble::Pm { magnitude: 2.0 },
                };
                instances.push(e.generate(n, 300 + i).map_err(|e| e.to_string())?);
            }
            let kappa = calibrate_kappa(&instances, 1e-6)
                .map_err(|e| e.to_string())?
                .value;
            for (i, a) in instances.iter().enumerate() {
                let law =
                    exact_chaos_law(a, Scheme::IidRademacher).map_err(|e| e.to_string())?;
                let sigma = a.sigma();
                for &x in &[0.5, 1.0, 2.0, 4.0, 8.0] {
                    let threshold = kappa * sigma * x;
                    let tail = exact_tail(&law, threshold, TailMode::Absolute);
                    let bound = (2.0 * (-x).exp()).min(1.0);
                    if tail > bound {
                        return Err(format!(
                            "instance {i}, x={x}: tail {tail} > bound {bound} (kappa {kappa})"
                        ));
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn c06_split_bound_internal_consistency() {
    criterion(
        "c06",
        "threshold = u+v+w+z (1e-12 rel), homogeneity (1e-9 rel) on 100 tuples, delta=0 exact",
        || {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
            for trial in 0..100 {
                let n = 4 + 2 * (trial % 4);
                let a = CoefficientMatrix::from_fn(n, |_, _| rng.random_range(-2.0..2.0))
                    .map_err(|e| e.to_string())?;
                let lambda: f64 = rng.random_range(0.0..4.0);
                let x: f64 = rng.random_range(0.05..8.0);
                let delta = rng.random_range(0..=n);
                let kappa: f64 = rng.random_range(0.5..6.0);

                let report = term_breakdown(&a, x, delta, kappa).map_err(|e| e.to_string())?;
                let b = &report.breakdown;
                let sum =
                    b.rademacher_term + b.cross_col_term + b.cross_row_term + b.tail_term;
                if (report.threshold - sum).abs() > 1e-12 * report.threshold.abs().max(1.0) {
                    return Err(format!(
                        "trial {trial}: threshold {} != term sum {sum}",
                        report.threshold
                    ));
                }

                let scaled = CoefficientMatrix::from_fn(n, |i, j| lambda * a.get(i, j))
                    .map_err(|e| e.to_string())?;
                let t = split_threshold(&a, x, delta, kappa).map_err(|e| e.to_string())?;
                let ts = split_threshold(&scaled, x, delta, kappa).map_err(|e| e.to_string())?;
                if (ts - lambda * t).abs() > 1e-9 * ts.abs().max(lambda * t).max(1e-300) {
                    return Err(format!(
                        "trial {trial}: scaled threshold {ts} vs lambda*t {}",
                        lambda * t
                    ));
                }

                let t0 = split_threshold(&a, x, 0, kappa).map_err(|e| e.to_string())?;
                if t0 != kappa * x * a.sigma() {
                    return Err(format!("trial {trial}: delta=0 threshold {t0} not exact"));
                }
            }
            Ok(())
        },
    );
}

#[test]
fn c07_default_delta_inequality() {
    criterion(
        "c07",
        "exp(-d^2/(2(n-d))) <= e^-x at d = default_delta(n, x) whenever sqrt(2nx) <= n",
        || {
            let xs = [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];
            for n in (8..=256).step_by(2) {
                for &x in &xs {
                    if (2.0 * n as f64 * x).sqrt() > n as f64 {
                        continue;
                    }
                    let d = default_delta(n, x);
                    let exp_term = hoeffding_t_bound_raw(n, d).map_err(|e| e.to_string())? / 2.0;
                    if exp_term > (-x).exp() {
                        return Err(format!(
                            "n={n} x={x} delta={d}: {exp_term} > {}",
                            (-x).exp()
                        ));
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn c08_coupling_diagnostics() {
    criterion(
        "c08",
        "tv=0 at n=2, tv=1/6 at n=4, coupled outcomes balanced, prefix agreement up to n=12",
        || {
            let tv2 = tv_distance(
                &coupled_law(2).map_err(|e| e.to_string())?,
                &enumerate_balanced(2).map_err(|e| e.to_string())?,
            );
            if tv2 != 0.0 {
                return Err(format!("tv at n=2 is {tv2}"));
            }

            let tv4 = tv_distance(
                &coupled_law(4).map_err(|e| e.to_string())?,
                &enumerate_balanced(4).map_err(|e| e.to_string())?,
            );
            if (tv4 - 1.0 / 6.0).abs() > 1e-12 {
                return Err(format!("tv at n=4 is {tv4}, expected 1/6"));
            }

            for n in (2..=12).step_by(2) {
                let law = coupled_law(n).map_err(|e| e.to_string())?;
                for (v, _) in law.support() {
                    if v.signs().iter().map(|&s| i64::from(s)).sum::<i64>() != 0 {
                        return Err(format!("unbalanced coupled outcome {v} at n={n}"));
                    }
                }
                // Every path prefix of length n-1 determines the draw; the
                // trailing entry is never read.
                for mask in 0u64..(1 << (n - 1)) {
                    let mut signs = vec![1i8; n];
                    for (t, s) in signs.iter_mut().enumerate().take(n - 1) {
                        *s = if mask >> t & 1 == 1 { 1 } else { -1 };
                    }
                    let path = RademacherPath::new(signs).map_err(|e| e.to_string())?;
                    let draw = couple(&path);
                    let t = draw.stopping_time;
                    if draw.coupled.signs()[..t] != path.signs()[..t] {
                        return Err(format!(
                            "prefix disagreement at n={n}, path {path}: T={t}, coupled {}",
                            draw.coupled
                        ));
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn c09_monte_carlo_determinism_and_coverage() {
    criterion(
        "c09",
        "mc_tail byte-identical across 1/2/8 workers; CP intervals cover exact in >= 96% of 200 runs",
        || {
            let a = Ensemble::Gaussian.generate(8, 17).map_err(|e| e.to_string())?;
            let rng = RngSpec::new(4242, "acceptance-workers");
            let run = || {
                mc_tail(
                    &a,
                    2.0,
                    TailMode::Absolute,
                    Scheme::WithoutReplacement,
                    4_000,
                    &rng,
                    0.99,
                )
                .map(|est| serde_json::to_string(&est).expect("serializable"))
            };
            let mut outputs = Vec::new();
            for threads in [1usize, 2, 8] {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| e.to_string())?;
                outputs.push(pool.install(run).map_err(|e| e.to_string())?);
            }
            if outputs[0] != outputs[1] || outputs[1] != outputs[2] {
                return Err("worker count changed the serialized estimate".to_string());
            }

            // Pinned coverage suite: 10 enumerable instances x 20 runs.
            let sizes = [6usize, 8, 10];
            let mut suite = Vec::new();
            for i in 0..10u64 {
                let n = sizes[(i % 3) as usize];
                let e = match i % 3 {
                    0 => Ensemble::Uniform,
                    1 => Ensemble::Gaussian,
                    _ => Ensemble::Pm { magnitude: 1.0 },
                };
                suite.push(e.generate(n, 600 + i).map_err(|e| e.to_string())?);
            }
            let levels = [0.1, 0.25, 0.5, 0.75, 0.9];
            let mut covered = 0usize;
            for run_idx in 0..200u64 {
                let a = &suite[(run_idx % 10) as usize];
                let scheme = match run_idx % 3 {
                    0 => Scheme::WithoutReplacement,
                    1 => Scheme::IidRademacher,
                    _ => Scheme::Coupled,
                };
                let mode = if run_idx % 2 == 0 {
                    TailMode::Absolute
                } else {
                    TailMode::OneSided
                };
                let law = exact_chaos_law(a, scheme).map_err(|e| e.to_string())?;
                let t = law
                    .quantile(levels[(run_idx % 5) as usize])
                    .map_err(|e| e.to_string())?;
                let exact = exact_tail(&law, t, mode);
                let rng = RngSpec::new(7000 + run_idx, "acceptance-coverage");
                let est = mc_tail(a, t, mode, scheme, 2_000, &rng, 0.99)
                    .map_err(|e| e.to_string())?;
                if est.ci_low <= exact && exact <= est.ci_high {
                    covered += 1;
                }
            }
            if covered < 192 {
                return Err(format!("coverage {covered}/200 below 192/200"));
            }
            println!("[acceptance] c09 coverage: {covered}/200");
            Ok(())
        },
    );
}

#[test]
fn c10_two_sample_identity_and_golden_pipeline() {
    criterion(
        "c10",
        "u_statistic equals the chaos at block signs exactly; zero kernel p=1; golden JSON pinned",
        || {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2023);
            for trial in 0..100 {
                let p = rng.random_range(2..7);
                let dim = rng.random_range(1..3);
                let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<f64>> {
                    (0..p)
                        .map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect())
                        .collect()
                };
                let data = TwoSampleDataset::new(draw(&mut rng), draw(&mut rng))
                    .map_err(|e| e.to_string())?;
                let kernel = if trial % 2 == 0 {
                    Kernel::Product
                } else {
                    Kernel::Gaussian { bandwidth: 0.9 }
                };
                let u = u_statistic(&data, &kernel).map_err(|e| e.to_string())?;
                let k = kernel_matrix(&data, &kernel).map_err(|e| e.to_string())?;
                let z = eval_chaos(&k, &data.block_signs()).map_err(|e| e.to_string())?;
                if u != z {
                    return Err(format!("trial {trial}: u {u} != chaos {z}"));
                }
            }

            let zero_table =
                CoefficientMatrix::from_fn(4, |_, _| 0.0).map_err(|e| e.to_string())?;
            let data = TwoSampleDataset::from_scalars(&[1.0, 2.0], &[3.0, 4.0])
                .map_err(|e| e.to_string())?;
            let result = perm_test(
                &data,
                &Kernel::Tabulated(zero_table),
                99,
                &RngSpec::new(1, "two-sample"),
                &[0.05],
                None,
            )
            .map_err(|e| e.to_string())?;
            if result.p_value != 1.0 {
                return Err(format!("zero-kernel p-value {}", result.p_value));
            }

            let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
            let data = load_dataset(
                root.join("tests/fixtures/two_sample.csv"),
                DatasetFormat::CsvLong,
            )
            .map_err(|e| e.to_string())?;
            let result = perm_test(
                &data,
                &Kernel::Gaussian { bandwidth: 1.0 },
                199,
                &RngSpec::new(42, "two-sample"),
                &[0.05, 0.01],
                None,
            )
            .map_err(|e| e.to_string())?;
            let produced = format!(
                "{}\n",
                serde_json::to_string_pretty(&result).map_err(|e| e.to_string())?
            );
            let golden =
                std::fs::read_to_string(root.join("tests/fixtures/two_sample_golden.json"))
                    .map_err(|e| e.to_string())?;
            if produced != golden {
                return Err(format!(
                    "fixture output drifted from golden:\n{produced}\nvs\n{golden}"
                ));
            }
            Ok(())
        },
    );
}

#[test]
fn c11_simplified_bound_order_of_magnitude() {
    criterion(
        "c11",
        "calibrated c dominates exact (1-2e^-x)-quantiles of |Z|/(nM(x+log n)) on pm ensembles",
        || {
            let mut instances = Vec::new();
            for &n in &[8usize, 12, 16] {
                for &m in &[1.0f64, 2.0] {
                    for seed in 0..2u64 {
                        instances.push(
                            Ensemble::Pm { magnitude: m }
                                .generate(n, 100 + seed)
                                .map_err(|e| e.to_string())?,
                        );
                    }
                }
            }
            let xs = [2.0, 4.0, 8.0];
            let c = calibrate_c(&instances, 2.0, &xs, TailMode::Absolute, 1e-9)
                .map_err(|e| e.to_string())?
                .value;
            if c <= 0.0 {
                return Err(format!("calibrated c = {c} is not positive"));
            }

            println!("[acceptance] c11 ratio table (c = {c:.6}):");
            for (i, a) in instances.iter().enumerate() {
                let n = a.n();
                let m = a.max_abs();
                let law = exact_chaos_law(a, Scheme::WithoutReplacement)
                    .map_err(|e| e.to_string())?;
                let mut abs_atoms: Vec<(f64, f64)> = law
                    .support()
                    .iter()
                    .map(|(v, p)| (v.abs(), *p))
                    .collect();
                abs_atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                for &x in &xs {
                    if x < (n as f64).ln() {
                        continue;
                    }
                    let level = 1.0 - 2.0 * (-x).exp();
                    let mut cum = 0.0;
                    let mut quantile = abs_atoms.last().expect("nonempty law").0;
                    for &(v, p) in &abs_atoms {
                        cum += p;
                        if cum >= level {
                            quantile = v;
                            break;
                        }
                    }
                    let scale = n as f64 * m * (x + (n as f64).ln());
                    let ratio = quantile / scale;
                    println!(
                        "[acceptance]   instance {i:2} n={n:2} M={m} x={x}: quantile {quantile:10.4} ratio {ratio:.6}"
                    );
                    if ratio > c {
                        return Err(format!(
                            "instance {i} (n={n}, M={m}), x={x}: ratio {ratio} above c {c}"
                        ));
                    }
                }
            }
            Ok(())
        },
    );
}
