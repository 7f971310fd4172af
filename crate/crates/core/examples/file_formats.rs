//! Writing and reading the JSON files the command line works with.
//!
//! Run with `cargo run --example file_formats`.

use polymatrix::equilibrium::MixtureDistribution;
use polymatrix::format::{decode_game, encode_game, encode_mixture, encode_product};
use polymatrix::game::{random_game, Aggregator, Formula, ProductDistribution};

fn main() -> polymatrix::Result<()> {
    let formula = Formula::Or(vec![Formula::Var(0), Formula::Not(Box::new(Formula::Var(1)))]);
    let game = random_game(&[2, 2, 1], 0.0, 1.0, Aggregator::BooleanFormula(formula), 1)?;
    let bytes = encode_game(&game);
    print!("{}", String::from_utf8_lossy(&bytes));
    assert_eq!(decode_game(&bytes)?, game);

    let x = ProductDistribution::new(vec![vec![0.25, 0.75], vec![1.0, 0.0], vec![1.0]])?;
    print!("{}", String::from_utf8_lossy(&encode_product(&x)));
    let m = MixtureDistribution::new(vec![(0.5, x), (0.5, ProductDistribution::uniform(&[2, 2, 1]))])?;
    print!("{}", String::from_utf8_lossy(&encode_mixture(&m)));

    let broken = String::from_utf8_lossy(&bytes).replace("boolean_formula", "parity");
    println!("{}", decode_game(broken.as_bytes()).unwrap_err());
    Ok(())
}
