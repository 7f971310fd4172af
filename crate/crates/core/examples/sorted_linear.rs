//! Sorted-linear aggregation: utility is a weighted sum of the payoffs in
//! descending order. Coefficients with at most three leading terms have a
//! polynomial expectation; longer ones fall back to enumeration.
//!
//! Run with `cargo run --example sorted_linear`.

use polymatrix::expectation::{brute_expectation, expected_utility, topk_expectation};
use polymatrix::game::{random_game, random_product_distribution, Aggregator};
use polymatrix::Error;

fn main() -> polymatrix::Result<()> {
    let counts = [2, 3, 3, 2, 3];
    let x = random_product_distribution(&counts, 5);
    let cases = [
        ("max", vec![1.0, 0.0, 0.0, 0.0]),
        ("second highest", vec![0.0, 1.0, 0.0, 0.0]),
        ("top two averaged", vec![0.5, 0.5, 0.0, 0.0]),
        ("top three, decaying", vec![1.0, 0.5, 0.25, 0.0]),
        ("all four (enumeration)", vec![0.4, 0.3, 0.2, 0.1]),
    ];
    for (name, coeffs) in cases {
        let game = random_game(&counts, 0.0, 10.0, Aggregator::SortedLinear(coeffs), 4)?;
        let fast = expected_utility(&game, 0, &x)?;
        let brute = brute_expectation(&game, 0, &x)?;
        println!("{name:<24} {fast:>14.10}  |diff| {:.1e}", (fast - brute).abs());
    }

    let game = random_game(
        &counts,
        0.0,
        10.0,
        Aggregator::SortedLinear(vec![0.4, 0.3, 0.2, 0.1]),
        4,
    )?;
    match topk_expectation(&game, 0, 0, &x, &[0.4, 0.3, 0.2, 0.1], 3) {
        Err(Error::Resource(msg)) => println!("\ndirect chain enumeration refused: {msg}"),
        other => println!("\nunexpected: {other:?}"),
    }
    Ok(())
}
