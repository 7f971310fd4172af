//! A correlated equilibrium as a mixture of product distributions, built one
//! separating component at a time, never materializing the joint table.
//!
//! Run with `cargo run --example mixture_ce`.

use polymatrix::equilibrium::{solve_ce_mixture, verify_ce};
use polymatrix::game::{random_game, Aggregator};

fn main() -> polymatrix::Result<()> {
    let counts = [3, 3, 2, 3, 2, 3, 2, 3];
    let game = random_game(&counts, 0.0, 1.0, Aggregator::Max, 3)?;
    println!("{} players, {} joint profiles", game.n(), game.profile_count());

    let out = solve_ce_mixture(&game, 1e-6, 200)?;
    for (k, cut) in out.cuts.iter().enumerate() {
        println!(
            "round {:>2}: certificate gap {:.3e}, new component pairs to {:+.1e}",
            k + 1,
            cut.gap,
            cut.pairing
        );
    }
    println!(
        "accepted after {} rounds; {} of {} generated components carry weight",
        out.rounds,
        out.mixture.len(),
        out.generated
    );
    for (w, x) in out.mixture.components() {
        let marginals: Vec<String> = x.marginals().iter().map(|m| format!("{m:.2?}")).collect();
        println!("  {w:.4}  {}", marginals.join(" "));
    }
    let verdict = verify_ce(&game, &out.mixture.into(), 1e-6)?;
    println!(
        "is_ce {} (max violation {:.1e})",
        verdict.is_ce, verdict.report.max_violation
    );
    Ok(())
}
