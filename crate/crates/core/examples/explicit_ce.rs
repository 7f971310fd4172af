//! A correlated equilibrium from the full LP over every strategy profile.
//!
//! Three players in a cycle of matching pennies: player 0 wants to match
//! player 1, player 1 wants to match player 2, and player 2 wants to differ
//! from player 0. No profile is stable on its own, so the equilibrium mixes.
//!
//! Run with `cargo run --example explicit_ce`.

use polymatrix::equilibrium::{solve_ce_explicit, verify_ce};
use polymatrix::game::{random_game, Aggregator, PayoffMatrix, PolymatrixGame};

fn main() -> polymatrix::Result<()> {
    let matching = PayoffMatrix::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]])?;
    let mismatching = matching.map(|v| -v);
    let zero = PayoffMatrix::filled(2, 2, 0.0);
    let game = PolymatrixGame::new(
        vec![2, 2, 2],
        vec![
            ((0, 1), matching.clone()),
            ((0, 2), zero.clone()),
            ((1, 0), zero.clone()),
            ((1, 2), matching),
            ((2, 0), mismatching),
            ((2, 1), zero),
        ],
        Aggregator::Sum,
    )?;
    let d = solve_ce_explicit(&game)?;
    println!(
        "cyclic pennies: support of {} profiles out of {}",
        d.len(),
        game.profile_count()
    );
    for (s, prob) in d.atoms() {
        println!("  {:?}  {prob:.6}", s.as_slice());
    }
    let verdict = verify_ce(&game, &d.into(), 1e-9)?;
    println!(
        "is_ce {} (max violation {:.1e})",
        verdict.is_ce, verdict.report.max_violation
    );

    let game = random_game(&[3, 2, 3, 2], -1.0, 1.0, Aggregator::Min, 21)?;
    let d = solve_ce_explicit(&game)?;
    let verdict = verify_ce(&game, &d.clone().into(), 1e-9)?;
    println!(
        "\nrandom 4-player Min game: {} of {} profiles in the support, is_ce {}",
        d.len(),
        game.profile_count(),
        verdict.is_ce
    );
    Ok(())
}
