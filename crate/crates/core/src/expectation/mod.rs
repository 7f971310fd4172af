//! Expected utility under product distributions.
//!
//! [`conditional_action_expectations`] computes, for each of `p`'s actions `i`,
//! the expected utility when `p` plays `i` and every opponent draws
//! independently from its marginal. The route depends on the aggregator:
//!
//! | aggregator | route | cost per player |
//! |---|---|---|
//! | `Sum` | linearity of expectation | `O(n m^2)` |
//! | `Max` | descending sweep ([`max_sweep`]) | `O(n^2 m^2 + n m^2 log m)` |
//! | `Min` | sweep on negated payoffs | same as `Max` |
//! | `SortedLinear`, `K <= k_max` | chain enumeration | `O(m (nm)^K n)` |
//! | anything else | opponent-profile enumeration | `O(m^n)` |

mod brute;
mod sweep;
mod topk;

pub use brute::{brute_expectation, brute_expectation_with_guard, ENUMERATION_GUARD};
pub use sweep::{max_sweep, max_sweep_observed, sort_entries, SweepEntry, SweepState};

use crate::error::{Error, Result};
use crate::game::{leading_terms, Aggregator, PolymatrixGame, ProductDistribution};

/// Limits for the polynomial and enumeration routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpectationConfig {
    /// Largest number of leading sorted-linear coefficients handled by chain enumeration.
    pub k_max: usize,
    /// Largest number of (opponent) profiles any brute-force route may enumerate.
    pub enumeration_guard: u128,
}

impl Default for ExpectationConfig {
    fn default() -> Self {
        Self {
            k_max: 3,
            enumeration_guard: ENUMERATION_GUARD,
        }
    }
}

/// Expected utility of one player for each of its actions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalExpectations {
    pub player: usize,
    /// `values[i] = E[U(p, (i, s_-p))]`.
    pub values: Vec<f64>,
}

/// Sweep entries for player `p` fixed at action `i`.
pub fn sweep_entries(game: &PolymatrixGame, p: usize, i: usize, x: &ProductDistribution) -> Vec<SweepEntry> {
    let mut entries = Vec::with_capacity((game.n() - 1) * game.m());
    collect_entries(game, p, i, x, 1.0, &mut entries);
    entries
}

fn collect_entries(
    game: &PolymatrixGame,
    p: usize,
    i: usize,
    x: &ProductDistribution,
    sign: f64,
    out: &mut Vec<SweepEntry>,
) {
    out.clear();
    for (opponent, q) in game.opponents(p).enumerate() {
        let row = game.payoff(p, q).row(i);
        for (action, (&value, &prob)) in row.iter().zip(x.marginal(q)).enumerate() {
            out.push(SweepEntry {
                opponent,
                action,
                value: sign * value,
                prob,
            });
        }
    }
}

pub fn conditional_action_expectations(
    game: &PolymatrixGame,
    p: usize,
    x: &ProductDistribution,
) -> Result<ConditionalExpectations> {
    conditional_action_expectations_with(game, p, x, &ExpectationConfig::default())
}

pub fn conditional_action_expectations_with(
    game: &PolymatrixGame,
    p: usize,
    x: &ProductDistribution,
    config: &ExpectationConfig,
) -> Result<ConditionalExpectations> {
    game.check_player(p)?;
    x.check_shape(game)?;
    let actions = game.strategy_counts()[p];
    let values = match game.aggregator() {
        Aggregator::Sum => (0..actions).map(|i| sum_conditional(game, p, i, x)).collect(),
        Aggregator::Max => sweep_all(game, p, x, 1.0),
        Aggregator::Min => sweep_all(game, p, x, -1.0).into_iter().map(|v| -v).collect(),
        Aggregator::SortedLinear(coeffs) if leading_terms(coeffs) <= config.k_max => {
            let k = leading_terms(coeffs);
            (0..actions)
                .map(|i| topk::sorted_linear_expectation(sweep_entries(game, p, i, x), coeffs, k))
                .collect()
        }
        Aggregator::SortedLinear(_) | Aggregator::BooleanFormula(_) => (0..actions)
            .map(|i| brute::conditional_brute(game, p, i, x, config.enumeration_guard))
            .collect::<Result<_>>()?,
    };
    Ok(ConditionalExpectations { player: p, values })
}

fn sum_conditional(game: &PolymatrixGame, p: usize, i: usize, x: &ProductDistribution) -> f64 {
    game.opponents(p)
        .map(|q| {
            let row = game.payoff(p, q).row(i);
            row.iter().zip(x.marginal(q)).map(|(u, w)| u * w).sum::<f64>()
        })
        .sum()
}

fn sweep_all(game: &PolymatrixGame, p: usize, x: &ProductDistribution, sign: f64) -> Vec<f64> {
    let opponents = game.n() - 1;
    let mut entries = Vec::with_capacity(opponents * game.m());
    let mut scratch = sweep::Scratch::default();
    (0..game.strategy_counts()[p])
        .map(|i| {
            collect_entries(game, p, i, x, sign, &mut entries);
            sweep::max_sweep_merged(&entries, &mut scratch, opponents)
        })
        .collect()
}

/// Expected sorted-linear aggregate for `p` fixed at action `i`.
///
/// Fails with [`Error::Resource`] when the coefficients have more than
/// `k_max` leading terms.
pub fn topk_expectation(
    game: &PolymatrixGame,
    p: usize,
    i: usize,
    x: &ProductDistribution,
    coeffs: &[f64],
    k_max: usize,
) -> Result<f64> {
    game.check_player(p)?;
    x.check_shape(game)?;
    if i >= game.strategy_counts()[p] {
        return Err(Error::Input(format!("action {i} out of range for player {p}")));
    }
    if coeffs.len() != game.n() - 1 {
        return Err(Error::Input(format!(
            "{} coefficients for {} opponents",
            coeffs.len(),
            game.n() - 1
        )));
    }
    let k = leading_terms(coeffs);
    if k > k_max {
        return Err(Error::Resource(format!(
            "{k} leading coefficients exceed limit {k_max}"
        )));
    }
    Ok(topk::sorted_linear_expectation(sweep_entries(game, p, i, x), coeffs, k))
}

/// `E_{s ~ x}[U(p, s)]` using the fastest route for the game's aggregator.
pub fn expected_utility(game: &PolymatrixGame, p: usize, x: &ProductDistribution) -> Result<f64> {
    expected_utility_with(game, p, x, &ExpectationConfig::default())
}

pub fn expected_utility_with(
    game: &PolymatrixGame,
    p: usize,
    x: &ProductDistribution,
    config: &ExpectationConfig,
) -> Result<f64> {
    let e = conditional_action_expectations_with(game, p, x, config)?;
    Ok(x.marginal(p).iter().zip(&e.values).map(|(w, v)| w * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{random_game, random_product_distribution, PayoffMatrix};

    /// Player 0 faces opponents whose payoff rows are all `(0, 1)`.
    fn coin_game(n: usize, aggregator: Aggregator) -> PolymatrixGame {
        let mut mats = Vec::new();
        for p in 0..n {
            for q in (0..n).filter(|&q| q != p) {
                mats.push((
                    (p, q),
                    PayoffMatrix::from_rows(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap(),
                ));
            }
        }
        PolymatrixGame::new(vec![2; n], mats, aggregator).unwrap()
    }

    fn oracle(game: &PolymatrixGame, p: usize, i: usize, x: &ProductDistribution) -> f64 {
        brute::conditional_brute(game, p, i, x, u128::MAX).unwrap()
    }

    #[test]
    fn sum_single_opponent_half() {
        let g = coin_game(2, Aggregator::Sum);
        let x = ProductDistribution::uniform(&[2, 2]);
        assert_eq!(
            conditional_action_expectations(&g, 0, &x).unwrap().values,
            vec![0.5, 0.5]
        );
    }

    #[test]
    fn max_of_two_coins() {
        let g = coin_game(3, Aggregator::Max);
        let x = ProductDistribution::uniform(&[2, 2, 2]);
        assert_eq!(expected_utility(&g, 0, &x).unwrap(), 0.75);
        assert_eq!(brute_expectation(&g, 0, &x).unwrap(), 0.75);
        let min = g.with_aggregator(Aggregator::Min);
        assert_eq!(expected_utility(&min, 0, &x).unwrap(), 0.25);
    }

    #[test]
    fn max_of_constant_rows() {
        let g = random_game(&[3, 2, 4, 2], 2.5, 2.5, Aggregator::Max, 1).unwrap();
        let x = random_product_distribution(g.strategy_counts(), 2);
        let e = conditional_action_expectations(&g, 1, &x).unwrap();
        for v in e.values {
            assert!((v - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn point_mass_player_selects_action() {
        let g = random_game(&[3, 3, 3], -1.0, 1.0, Aggregator::Max, 5).unwrap();
        let x = random_product_distribution(g.strategy_counts(), 6)
            .with_marginal(0, vec![0.0, 1.0, 0.0])
            .unwrap();
        let e = conditional_action_expectations(&g, 0, &x).unwrap();
        assert_eq!(expected_utility(&g, 0, &x).unwrap(), e.values[1]);
    }

    #[test]
    fn max_matches_conditional_brute_with_three_opponents() {
        for seed in 0..20 {
            let g = random_game(&[2, 3, 2, 4], -1.0, 1.0, Aggregator::Max, seed).unwrap();
            let x = random_product_distribution(g.strategy_counts(), seed + 100);
            for p in 0..4 {
                let e = conditional_action_expectations(&g, p, &x).unwrap();
                for (i, v) in e.values.iter().enumerate() {
                    assert!((v - oracle(&g, p, i, &x)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn topk_reduces_to_max_and_sum() {
        let g = random_game(&[2, 3, 3, 2], -2.0, 3.0, Aggregator::Max, 9).unwrap();
        let x = random_product_distribution(g.strategy_counts(), 10);
        let max = conditional_action_expectations(&g, 0, &x).unwrap();
        let sum = conditional_action_expectations(&g.with_aggregator(Aggregator::Sum), 0, &x).unwrap();
        for i in 0..2 {
            let top = topk_expectation(&g, 0, i, &x, &[1.0, 0.0, 0.0], 3).unwrap();
            assert!((top - max.values[i]).abs() < 1e-12);
            let all = topk_expectation(&g, 0, i, &x, &[1.0, 1.0, 1.0], 3).unwrap();
            assert!((all - sum.values[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn second_highest_on_four_players_matches_brute() {
        let coeffs = vec![0.0, 1.0, 0.0];
        for seed in 0..10 {
            let g = random_game(&[3, 2, 4, 3], 0.0, 1.0, Aggregator::SortedLinear(coeffs.clone()), seed).unwrap();
            let x = random_product_distribution(g.strategy_counts(), seed ^ 0xff);
            for i in 0..3 {
                let v = topk_expectation(&g, 0, i, &x, &coeffs, 3).unwrap();
                assert!((v - oracle(&g, 0, i, &x)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn topk_limit_is_a_resource_error() {
        let coeffs = vec![0.0, 0.0, 1.0];
        let g = random_game(&[2, 2, 2, 2], 0.0, 1.0, Aggregator::SortedLinear(coeffs.clone()), 0).unwrap();
        let x = ProductDistribution::uniform(g.strategy_counts());
        assert!(matches!(
            topk_expectation(&g, 0, 0, &x, &coeffs, 2),
            Err(Error::Resource(_))
        ));
        // dispatch falls back to enumeration instead
        let config = ExpectationConfig {
            k_max: 2,
            ..Default::default()
        };
        let e = conditional_action_expectations_with(&g, 0, &x, &config).unwrap();
        assert!((e.values[0] - oracle(&g, 0, 0, &x)).abs() < 1e-12);
        let tiny = ExpectationConfig {
            k_max: 2,
            enumeration_guard: 4,
        };
        assert!(matches!(
            conditional_action_expectations_with(&g, 0, &x, &tiny),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn all_zero_coefficients_give_zero() {
        let g = random_game(&[2, 2, 2], 0.0, 1.0, Aggregator::SortedLinear(vec![0.0, 0.0]), 0).unwrap();
        let x = ProductDistribution::uniform(g.strategy_counts());
        assert_eq!(expected_utility(&g, 1, &x).unwrap(), 0.0);
    }

    #[test]
    fn brute_guard() {
        let g = coin_game(4, Aggregator::Max);
        let x = ProductDistribution::uniform(g.strategy_counts());
        assert!(matches!(
            brute_expectation_with_guard(&g, 0, &x, 15),
            Err(Error::Resource(_))
        ));
        assert_eq!(brute_expectation_with_guard(&g, 0, &x, 16).unwrap(), 0.875);
    }

    #[test]
    fn shape_mismatch_is_input_error() {
        let g = coin_game(3, Aggregator::Max);
        let x = ProductDistribution::uniform(&[2, 2]);
        assert!(matches!(expected_utility(&g, 0, &x), Err(Error::Input(_))));
        assert!(matches!(
            expected_utility(&g, 5, &ProductDistribution::uniform(&[2, 2, 2])),
            Err(Error::Input(_))
        ));
    }
}
