//! Polymatrix games with non-linear payoff aggregation.
//!
//! Each player plays a two-player game against every other player and its
//! utility combines the resulting payoffs through an [`game::Aggregator`]:
//! sum, max, min, a linear function of the sorted payoffs, or a boolean
//! formula. The crate computes expected utilities under product
//! distributions ([`expectation`]), checks and computes correlated equilibria
//! ([`equilibrium`]), and turns 3-SAT into an expectation question
//! ([`hardness`]).
//!
//! ```
//! use polymatrix::expectation::{brute_expectation, expected_utility};
//! use polymatrix::game::{random_game, random_product_distribution, Aggregator};
//!
//! let game = random_game(&[3, 2, 4, 2], 0.0, 1.0, Aggregator::Max, 7).unwrap();
//! let x = random_product_distribution(game.strategy_counts(), 8);
//! let fast = expected_utility(&game, 0, &x).unwrap();
//! assert!((fast - brute_expectation(&game, 0, &x).unwrap()).abs() < 1e-12);
//! ```

pub mod bench;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod expectation;
pub mod format;
pub mod game;
pub mod hardness;

pub use error::{Error, Result};
