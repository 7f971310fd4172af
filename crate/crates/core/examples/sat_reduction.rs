//! Satisfiability as an expected utility: the fraction of satisfying
//! assignments is the expected payoff of a single-strategy player whose
//! utility is the formula evaluated on the other players' choices.
//!
//! Run with `cargo run --example sat_reduction`.

use polymatrix::hardness::{decide_sat_via_expectation, parse_dimacs, random_3cnf, reduce_3sat};

fn main() -> polymatrix::Result<()> {
    let f = parse_dimacs(
        "c two pigeons, one hole\n\
         p cnf 2 3\n\
         1 0\n\
         2 0\n\
         -1 -2 0\n",
    )?;
    let r = reduce_3sat(&f)?;
    println!("{f}");
    println!("  game with strategy counts {:?}", r.game.strategy_counts());
    println!("  {:?}", decide_sat_via_expectation(&f)?);

    println!("\nrandom 3-CNF over 8 variables:");
    for clauses in [8, 24, 34, 40, 60] {
        let f = random_3cnf(8, clauses, clauses as u64)?;
        let d = decide_sat_via_expectation(&f)?;
        let models = d.expectation * 256.0;
        let verdict = if d.satisfiable { "SAT" } else { "UNSAT" };
        println!("  {clauses:>2} clauses: {verdict:<5} {models:>3} of 256 assignments");
    }
    Ok(())
}
