//! Checking equilibrium constraints, and the witness when one fails.
//!
//! Run with `cargo run --example verify_ce`.

use polymatrix::equilibrium::{regret_from_product, verify_ce, MixtureDistribution};
use polymatrix::game::{
    random_game, random_product_distribution, Aggregator, ExplicitDistribution, PayoffMatrix, PolymatrixGame,
    StrategyProfile,
};

fn main() -> polymatrix::Result<()> {
    // player 0 gains 1 by switching from 0 to 1 whenever player 1 plays 0
    let game = PolymatrixGame::new(
        vec![2, 2],
        vec![
            ((0, 1), PayoffMatrix::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0]])?),
            ((1, 0), PayoffMatrix::filled(2, 2, 0.0)),
        ],
        Aggregator::Sum,
    )?;
    let d = ExplicitDistribution::new([(StrategyProfile(vec![0, 0]), 0.5), (StrategyProfile(vec![0, 1]), 0.5)])?;
    let verdict = verify_ce(&game, &d.into(), 1e-6)?;
    println!("is_ce {}, witness {:?}", verdict.is_ce, verdict.report.witness);
    for e in &verdict.report.entries {
        println!("  g(p={}, i={}, j={}) = {:+.3}", e.p, e.i, e.j, e.g);
    }

    // a mixture is checked component by component; its expansion gives the same table
    let counts = [2, 3, 2];
    let game = random_game(&counts, 0.0, 1.0, Aggregator::Max, 8)?;
    let mixture = MixtureDistribution::new(
        (0..3)
            .map(|k| (1.0 / 3.0, random_product_distribution(&counts, 30 + k)))
            .collect(),
    )?;
    let lazy = verify_ce(&game, &mixture.clone().into(), 1e-6)?.report;
    let expanded = verify_ce(&game, &mixture.expand().into(), 1e-6)?.report;
    let diff = lazy
        .entries
        .iter()
        .zip(&expanded.entries)
        .map(|(a, b)| (a.g - b.g).abs())
        .fold(0.0, f64::max);
    println!("\nmixture vs expansion: largest difference {diff:.1e}");

    let x = random_product_distribution(&counts, 99);
    println!(
        "a random product distribution violates by {:.4}",
        regret_from_product(&game, &x)?.max_violation
    );
    Ok(())
}
