//! Expected utility in a Max-polymatrix game, three ways.
//!
//! Run with `cargo run --example max_expectation`.

use polymatrix::expectation::{brute_expectation, expected_utility, max_sweep_observed, sweep_entries};
use polymatrix::game::{monte_carlo_estimate, random_game, random_product_distribution, Aggregator};

fn main() -> polymatrix::Result<()> {
    let counts = [3, 4, 2, 3, 4];
    let game = random_game(&counts, -1.0, 1.0, Aggregator::Max, 11)?;
    let x = random_product_distribution(&counts, 12);

    let fast = expected_utility(&game, 0, &x)?;
    let brute = brute_expectation(&game, 0, &x)?;
    let mc = monte_carlo_estimate(&game, 0, &x, 200_000, 13)?;
    println!("sweep       {fast:.12}");
    println!("enumeration {brute:.12}  (|diff| = {:.1e})", (fast - brute).abs());
    println!("monte carlo {:.12}  (+/- {:.1e})", mc.mean, mc.std_error);

    // the sweep for player 0 fixed at action 0, one line per processed entry
    println!("\nsweep trace for action 0 (value, opponent slot, action -> residuals)");
    let entries = sweep_entries(&game, 0, 0, &x);
    max_sweep_observed(entries, |state| {
        let (v, q, j) = state.threshold.expect("set after each entry");
        let residual: Vec<String> = state.residual.iter().map(|c| format!("{c:.3}")).collect();
        println!("  {v:+.4}  q{q} a{j} -> [{}]", residual.join(", "));
    });
    Ok(())
}
