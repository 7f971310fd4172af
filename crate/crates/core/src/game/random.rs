//! Seeded instance generation and a sampling cross-check.
//!
//! All generators use ChaCha8 seeded through `seed_from_u64`, so outputs are
//! pure functions of their arguments.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::{Aggregator, PayoffMatrix, PolymatrixGame, ProductDistribution};
use crate::error::{Error, Result};

/// Random game whose entries are uniform in `[low, high]`, or uniform in
/// `{0, 1}` under a boolean-formula aggregator.
///
/// Matrices are filled in `(p, q)` order, row-major.
pub fn random_game(
    strategy_counts: &[usize],
    payoff_low: f64,
    payoff_high: f64,
    aggregator: Aggregator,
    seed: u64,
) -> Result<PolymatrixGame> {
    let n = strategy_counts.len();
    if n < 2 {
        return Err(Error::Input(format!("need at least 2 players, got {n}")));
    }
    if strategy_counts.contains(&0) {
        return Err(Error::Input("every player needs at least one strategy".into()));
    }
    if !payoff_low.is_finite() || !payoff_high.is_finite() || payoff_low > payoff_high {
        return Err(Error::Input(format!("bad payoff range [{payoff_low}, {payoff_high}]")));
    }
    let boolean = matches!(aggregator, Aggregator::BooleanFormula(_));
    let span = payoff_high - payoff_low;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mats = Vec::with_capacity(n * (n - 1));
    for p in 0..n {
        for q in (0..n).filter(|&q| q != p) {
            let (rows, cols) = (strategy_counts[p], strategy_counts[q]);
            let data = (0..rows * cols)
                .map(|_| {
                    if boolean {
                        if rng.random_bool(0.5) {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        payoff_low + span * rng.random::<f64>()
                    }
                })
                .collect();
            mats.push(((p, q), PayoffMatrix::new(rows, cols, data)?));
        }
    }
    PolymatrixGame::new(strategy_counts.to_vec(), mats, aggregator)
}

/// Independent flat-Dirichlet marginals; every entry is strictly positive.
pub fn random_product_distribution(strategy_counts: &[usize], seed: u64) -> ProductDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let marginals = strategy_counts
        .iter()
        .map(|&t| {
            let draws: Vec<f64> = (0..t)
                .map(|_| loop {
                    let e: f64 = Exp1.sample(&mut rng);
                    if e > 0.0 {
                        break e;
                    }
                })
                .collect();
            let total: f64 = draws.iter().sum();
            draws.into_iter().map(|e| e / total).collect()
        })
        .collect();
    ProductDistribution::new(marginals).expect("normalized exponentials form a distribution")
}

/// Sample mean of `p`'s utility with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub fn monte_carlo_estimate(
    game: &PolymatrixGame,
    p: usize,
    x: &ProductDistribution,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    game.check_player(p)?;
    x.check_shape(game)?;
    if samples == 0 {
        return Err(Error::Input("need at least one sample".into()));
    }
    let samplers = x
        .marginals()
        .iter()
        .map(|m| WeightedIndex::new(m).map_err(|e| Error::Input(format!("marginal: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = vec![0usize; game.n()];
    let mut scratch = Vec::with_capacity(game.n());
    // Welford
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for k in 0..samples {
        for (slot, sampler) in s.iter_mut().zip(&samplers) {
            *slot = sampler.sample(&mut rng);
        }
        let u = game.utility_unchecked(p, &s, &mut scratch)?;
        let delta = u - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (u - mean);
    }
    let variance = if samples > 1 { m2 / (samples - 1) as f64 } else { 0.0 };
    Ok(MonteCarloEstimate {
        mean,
        std_error: (variance / samples as f64).sqrt(),
        samples,
    })
}

/// Mean utility over `samples` independent draws from `x`.
pub fn monte_carlo_expectation(
    game: &PolymatrixGame,
    p: usize,
    x: &ProductDistribution,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    monte_carlo_estimate(game, p, x, samples, seed).map(|e| e.mean)
}
