//! Running time of the fast expectation as the player count doubles, next to
//! brute-force enumeration where it is still affordable.
//!
//! Run with `cargo run --release --example scaling`.

use polymatrix::bench::{doubling_ratios, run_bench, to_csv, BenchConfig};
use polymatrix::game::Aggregator;

fn main() -> polymatrix::Result<()> {
    let small = BenchConfig {
        ns: vec![2, 3, 4, 5, 6],
        ms: vec![3],
        seeds: vec![0, 1],
        ..BenchConfig::default()
    };
    print!("{}", to_csv(&run_bench(&small)?));

    let large = BenchConfig {
        ns: vec![10, 20, 40, 80],
        ms: vec![10],
        aggregator: Aggregator::Max,
        seeds: vec![0, 1, 2],
        brute_guard: 0,
        ..BenchConfig::default()
    };
    let records = run_bench(&large)?;
    print!("\n{}", to_csv(&records));
    println!();
    for r in doubling_ratios(&records) {
        println!(
            "n {:>2} -> {:>2} at m = {}: time x{:.2}",
            r.n_from, r.n_to, r.m, r.ratio
        );
    }
    Ok(())
}
