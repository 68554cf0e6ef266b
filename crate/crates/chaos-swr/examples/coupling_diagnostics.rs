//! Inspect the stopping-time coupling: how an i.i.d. sign path is stopped
//! and completed into a balanced vector, how far the induced law is from
//! the uniform without-replacement law, and how sharp the exponential
//! control of the stopping time is.
//!
//! ```bash
//! cargo run -p chaos-swr --example coupling_diagnostics
//! ```

use chaos_swr::bounds::hoeffding_t_bound;
use chaos_swr::oracle::{coupled_law, enumerate_balanced, exact_t_law, tv_distance};
use chaos_swr::samplers::{couple, RademacherPath};

fn main() -> chaos_swr::Result<()> {
    // Trace one path by hand: T is the first time a sign count hits n/2,
    // everything after T is filled with the opposite of the sign at T.
    let path = RademacherPath::new(vec![1, -1, 1, 1, -1, 1])?;
    let draw = couple(&path);
    println!("path    {path}");
    println!("T       {}", draw.stopping_time);
    println!("coupled {}", draw.coupled);

    // The coupled law is balanced but NOT uniform for n > 2; the total
    // variation gap is exactly 1/6 at n = 4 and grows from there. The gap
    // is reported rather than assumed away: the coupling argument only
    // needs agreement with the i.i.d. path up to time T.
    println!("\n n | outcomes | tv(coupled, uniform)");
    for n in [2usize, 4, 6, 8, 10] {
        let coupled = coupled_law(n)?;
        let uniform = enumerate_balanced(n)?;
        println!(
            "{n:2} | {:8} | {:.6}",
            coupled.len(),
            tv_distance(&coupled, &uniform)
        );
    }

    // Exact P(T <= n - delta) against its exponential bound.
    let n = 12;
    let t_law = exact_t_law(n)?;
    println!("\nn = {n}: exact P(T <= n-delta) vs 2 exp(-delta^2/(2(n-delta)))");
    println!("delta | exact      | bound");
    for delta in 1..n {
        let exact: f64 = t_law
            .support()
            .iter()
            .filter(|(t, _)| *t + delta <= n)
            .map(|(_, p)| p)
            .sum();
        let bound = hoeffding_t_bound(n, delta)?;
        println!("{delta:5} | {exact:.8} | {bound:.8}");
    }
    Ok(())
}
