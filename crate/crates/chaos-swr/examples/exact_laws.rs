//! Enumerate the exact law of the chaos under all three sampling schemes
//! and read tails and means off it.
//!
//! ```bash
//! cargo run -p chaos-swr --example exact_laws
//! ```

use chaos_swr::ensembles::Ensemble;
use chaos_swr::oracle::{exact_chaos_law, exact_mean, exact_tail, TailMode};
use chaos_swr::{CoefficientMatrix, Scheme};

fn main() -> chaos_swr::Result<()> {
    // A point-mass case first: for the all-ones matrix every balanced sign
    // vector gives the same value, since (sum eps)^2 - n = -n.
    let ones = CoefficientMatrix::from_fn(4, |_, _| 1.0)?;
    let law = exact_chaos_law(&ones, Scheme::WithoutReplacement)?;
    println!("all-ones n=4, without replacement: {:?}", law.support());
    println!("mean formula -sum(a)/(n-1) = {}", exact_mean(&ones));

    // A generic instance: the three schemes give visibly different laws.
    let a = Ensemble::Uniform.generate(8, 42)?;
    println!("\nuniform[-1,1) instance, n = 8:");
    for scheme in [
        Scheme::WithoutReplacement,
        Scheme::IidRademacher,
        Scheme::Coupled,
    ] {
        let law = exact_chaos_law(&a, scheme)?;
        let spread = law.support().last().unwrap().0 - law.support().first().unwrap().0;
        println!(
            "  {scheme:>7}: {:4} atoms, mean {:+.4}, spread {:.4}, P(Z >= 2) = {:.4}",
            law.len(),
            law.mean(),
            spread,
            exact_tail(&law, 2.0, TailMode::OneSided),
        );
    }

    // Laws serialize to CSV (outcome, probability) and JSON.
    let pair = CoefficientMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]], true)?;
    let law = exact_chaos_law(&pair, Scheme::IidRademacher)?;
    println!("\nunit pair, iid scheme, as CSV:\n{}", law.to_csv_string());
    Ok(())
}
