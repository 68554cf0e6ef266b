//! Compare cut-parameter policies for the split bound: the closed-form
//! default `ceil(sqrt(2nx))` against an exhaustive scan that minimizes the
//! threshold subject to a probability target.
//!
//! ```bash
//! cargo run -p chaos-swr --example delta_tuning
//! ```

use chaos_swr::bounds::{default_delta, optimize_delta, split_probability, split_threshold};
use chaos_swr::ensembles::Ensemble;

fn main() -> chaos_swr::Result<()> {
    let a = Ensemble::Gaussian.generate(24, 7)?;
    let kappa = 2.5;
    let target = 0.5;
    println!("gaussian instance n = {}, kappa = {kappa}, target P <= {target}\n", a.n());

    println!("    x | default d -> threshold (P-bound)  | optimized d -> threshold (P-bound)");
    for x in [1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0] {
        let d0 = default_delta(a.n(), x);
        let t0 = split_threshold(&a, x, d0, kappa)?;
        let p0 = split_probability(a.n(), d0, x)?;
        let search = optimize_delta(&a, x, kappa, target)?;
        let flag = if search.meets_target { "" } else { " (target unreachable)" };
        println!(
            "{x:5.1} | {d0:9} -> {t0:9.3} ({p0:.4})       | {:9} -> {:9.3} ({:.4}){flag}",
            search.delta, search.report.threshold, search.report.probability,
        );
    }

    println!(
        "\nThe scan can only improve on the default where the default is feasible;\n\
         where no cut reaches the target, it returns the probability minimizer, flagged."
    );
    Ok(())
}
