//! Evaluate the tail bounds as plain functions: the four-term split bound
//! with its per-term breakdown, and the simplified `c n M (x + log n)`
//! bound, side by side over an x grid.
//!
//! ```bash
//! cargo run -p chaos-swr --example bounds_report
//! ```

use chaos_swr::bounds::{default_delta, term_breakdown, simplified_bound};
use chaos_swr::ensembles::Ensemble;
use chaos_swr::BoundConstants;

fn main() -> chaos_swr::Result<()> {
    let a = Ensemble::Pm { magnitude: 1.0 }.generate(16, 1)?;
    let constants = BoundConstants::default();
    println!(
        "pm instance: n = {}, sigma = {:.4}, M = {}",
        a.n(),
        a.sigma(),
        a.max_abs()
    );
    println!("constants: kappa = {} (non-normative default)\n", constants.kappa);

    println!("    x | delta | threshold | P-bound | dominant term (u / v+w / z)");
    for x in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let delta = default_delta(a.n(), x);
        let report = term_breakdown(&a, x, delta, constants.kappa)?;
        let b = &report.breakdown;
        println!(
            "{x:5.1} | {delta:5} | {:9.3} | {:7.4} | {:?}: u={:.2} v+w={:.2} z={:.2}",
            report.threshold,
            report.probability,
            b.dominant,
            b.rademacher_term,
            b.cross_col_term + b.cross_row_term,
            b.tail_term,
        );
    }

    // The simplified bound trades the split structure for one scale,
    // n * max|a| * (x + log n).
    println!("\n    x | simplified threshold | P-bound");
    for x in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let (threshold, probability) = simplified_bound(a.n(), a.max_abs(), x, &constants)?;
        println!("{x:5.1} | {threshold:20.3} | {probability:7.4}");
    }

    // Everything serializes with stable field names for downstream tools.
    let report = term_breakdown(&a, 2.0, default_delta(a.n(), 2.0), constants.kappa)?;
    println!("\nJSON form:\n{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}
