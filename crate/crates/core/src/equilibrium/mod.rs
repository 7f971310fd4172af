//! Correlated equilibria: regret tables, verification, and two solvers.
//!
//! The regret of recommendation `i` against deviation `j` for player `p` is
//! `g(p,i,j) = sum_{s: s_p = i} d(s) [U(p, s) - U(p, (j, s_-p))]`, and `d` is a
//! correlated equilibrium iff every `g` is nonnegative. For a product
//! distribution `x` this collapses to `x_p(i) (e_p[i] - e_p[j])`, where `e_p`
//! are the conditional expectations from [`crate::expectation`], so mixtures of
//! product distributions can be checked without expanding them.
//!
//! [`solve_ce_explicit`] solves the full LP over all profiles.
//! [`solve_ce_mixture`] generates product distributions one cut at a time:
//! given row weights `alpha` certifying that the current components cannot be
//! mixed into an equilibrium, [`product_from_dual`] builds a product
//! distribution whose regrets pair with `alpha` to exactly zero, which rules
//! that certificate out.

pub mod lp;
pub mod markov;
mod mixture;
mod regret;

pub use lp::{lp_feasibility, solve_matrix_game, FarkasCertificate, Feasibility, LpLimits, MatrixGameSolution};
pub use markov::{balance_residual, stationary_distribution};
pub use mixture::MixtureDistribution;
pub use regret::{
    deviations, regret_from_explicit, regret_from_explicit_with, regret_from_mixture, regret_from_product,
    regret_from_product_with, Deviation, DualWeights, RegretEntry, RegretReport,
};

use crate::error::{Error, Result};
use crate::expectation::ExpectationConfig;
use crate::game::{for_each_profile, ExplicitDistribution, PolymatrixGame, ProductDistribution, StrategyProfile};

/// Largest acceptable violation in a solver's output.
pub const SOLUTION_TOLERANCE: f64 = 1e-7;
/// Allowed drift in the zero-pairing identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;

/// Limits shared by the verifier and both solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub expectation: ExpectationConfig,
    /// Largest profile count the explicit LP will materialize.
    pub explicit_guard: u128,
    pub lp: LpLimits,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            expectation: ExpectationConfig::default(),
            explicit_guard: 100_000,
            lp: LpLimits::default(),
        }
    }
}

/// A joint distribution in either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum JointDistribution {
    Explicit(ExplicitDistribution),
    Mixture(MixtureDistribution),
}

impl From<ExplicitDistribution> for JointDistribution {
    fn from(d: ExplicitDistribution) -> Self {
        JointDistribution::Explicit(d)
    }
}

impl From<MixtureDistribution> for JointDistribution {
    fn from(m: MixtureDistribution) -> Self {
        JointDistribution::Mixture(m)
    }
}

impl From<ProductDistribution> for JointDistribution {
    fn from(x: ProductDistribution) -> Self {
        JointDistribution::Mixture(MixtureDistribution::single(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub report: RegretReport,
    pub is_ce: bool,
}

pub fn verify_ce(game: &PolymatrixGame, dist: &JointDistribution, eps: f64) -> Result<Verdict> {
    verify_ce_with(game, dist, eps, &SolverConfig::default())
}

/// Regret table of `dist` and whether its worst violation is at most `eps`.
/// Mixtures are evaluated component by component, never expanded.
pub fn verify_ce_with(
    game: &PolymatrixGame,
    dist: &JointDistribution,
    eps: f64,
    config: &SolverConfig,
) -> Result<Verdict> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::Input(format!("tolerance {eps} must be nonnegative")));
    }
    let report = match dist {
        JointDistribution::Explicit(d) => regret_from_explicit_with(game, d, config.expectation.enumeration_guard)?,
        JointDistribution::Mixture(m) => regret_from_mixture(game, m, &config.expectation)?,
    };
    let is_ce = report.max_violation <= eps;
    Ok(Verdict { report, is_ce })
}

/// Product distribution whose regrets pair to zero with `alpha`.
///
/// Player `p`'s marginal is the stationary distribution of the chain with
/// rates `alpha_p(i, j)`. Then `sum_{i,j} alpha_p(i,j) x_p(i) (e[i] - e[j])`
/// equals `sum_j e[j] (outflow_j - inflow_j) = 0` whatever `e` is.
pub fn product_from_dual(strategy_counts: &[usize], alpha: &DualWeights) -> Result<ProductDistribution> {
    if alpha.strategy_counts() != strategy_counts {
        return Err(Error::Input("dual weights do not match game shape".into()));
    }
    let marginals = (0..strategy_counts.len())
        .map(|p| stationary_distribution(&alpha.rates(p)))
        .collect::<Result<Vec<_>>>()?;
    ProductDistribution::new(marginals)
}

/// Correlated equilibrium from the LP over every profile.
pub fn solve_ce_explicit(game: &PolymatrixGame) -> Result<ExplicitDistribution> {
    solve_ce_explicit_with(game, &SolverConfig::default())
}

pub fn solve_ce_explicit_with(game: &PolymatrixGame, config: &SolverConfig) -> Result<ExplicitDistribution> {
    let profiles = game.profile_count();
    if profiles > config.explicit_guard {
        return Err(Error::Resource(format!(
            "{profiles} profiles exceed explicit solver guard {}",
            config.explicit_guard
        )));
    }
    let devs = deviations(game.strategy_counts());
    let row_of = |p: usize, i: usize, j: usize| devs.iter().position(|d| *d == Deviation { p, i, j });
    let mut columns: Vec<StrategyProfile> = Vec::with_capacity(profiles as usize);
    let mut a = vec![Vec::with_capacity(profiles as usize); devs.len()];
    let mut scratch = Vec::with_capacity(game.n());
    let mut deviated = vec![0; game.n()];
    for_each_profile(game.strategy_counts(), |s| {
        for row in a.iter_mut() {
            row.push(0.0);
        }
        let col = columns.len();
        deviated.copy_from_slice(s);
        for p in 0..game.n() {
            let i = s[p];
            let base = game.utility_unchecked(p, s, &mut scratch)?;
            for j in (0..game.strategy_counts()[p]).filter(|&j| j != i) {
                deviated[p] = j;
                let alt = game.utility_unchecked(p, &deviated, &mut scratch)?;
                a[row_of(p, i, j).expect("deviation listed")][col] = base - alt;
            }
            deviated[p] = i;
        }
        columns.push(StrategyProfile(s.to_vec()));
        Ok(())
    })?;
    let rhs = vec![0.0; devs.len()];
    let d = match lp::lp_feasibility_with(&a, &rhs, &config.lp)? {
        Feasibility::Feasible(d) => d,
        Feasibility::Infeasible(cert) => {
            return Err(Error::Numerical(format!(
                "equilibrium LP reported infeasible with gap {:e}",
                cert.gap
            )))
        }
    };
    let mut worst = f64::NAN;
    for floor in [NEGLIGIBLE_WEIGHT, 0.0] {
        let kept: Vec<_> = columns.iter().zip(&d).filter(|(_, w)| **w > floor).collect();
        let total: f64 = kept.iter().map(|(_, w)| **w).sum();
        if total.is_nan() || total <= 0.0 {
            continue;
        }
        let dist = ExplicitDistribution::new(kept.into_iter().map(|(s, w)| (s.clone(), w / total)))?;
        let report = regret_from_explicit_with(game, &dist, u128::MAX)?;
        if report.max_violation <= SOLUTION_TOLERANCE {
            return Ok(dist);
        }
        worst = report.max_violation;
    }
    Err(Error::Numerical(format!(
        "explicit solution violates a constraint by {worst:e}"
    )))
}

/// Component weights at or below this are dropped when that keeps the mixture valid.
const NEGLIGIBLE_WEIGHT: f64 = 1e-12;

/// Components whose weight exceeds `floor`, renormalized.
fn mixture_above(
    weights: &[f64],
    components: &[ProductDistribution],
    floor: f64,
) -> Result<Option<MixtureDistribution>> {
    let kept: Vec<(f64, ProductDistribution)> = weights
        .iter()
        .zip(components)
        .filter(|(w, _)| **w > floor)
        .map(|(w, x)| (*w, x.clone()))
        .collect();
    let total: f64 = kept.iter().map(|(w, _)| w).sum();
    if kept.is_empty() || total.is_nan() || total <= 0.0 {
        return Ok(None);
    }
    MixtureDistribution::new(kept.into_iter().map(|(w, x)| (w / total, x)).collect()).map(Some)
}

/// Coordinate ascent on `alpha . g_x` from `start`, one player's marginal at a
/// time. The pairing is multilinear in the marginals, so each step moves a
/// player to the best pure strategy. Returns the improved component when it
/// pairs strictly positively with `alpha`.
fn deepen_cut(
    game: &PolymatrixGame,
    alpha: &DualWeights,
    start: &ProductDistribution,
    start_pairing: f64,
    config: &ExpectationConfig,
) -> Result<Option<(ProductDistribution, Vec<f64>)>> {
    const PASSES: usize = 4;
    let counts = game.strategy_counts();
    let mut best = (start.clone(), start_pairing, None::<Vec<f64>>);
    for _ in 0..PASSES {
        let mut improved = false;
        for (p, &t) in counts.iter().enumerate() {
            for a in 0..t {
                let pure = (0..t).map(|k| if k == a { 1.0 } else { 0.0 }).collect();
                let candidate = best.0.with_marginal(p, pure)?;
                let report = regret_from_product_with(game, &candidate, config)?;
                let value = alpha.pair(&report);
                if value > best.1 + 1e-12 {
                    best = (candidate, value, Some(report.values()));
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(match best {
        (x, value, Some(column)) if value > 1e-12 => Some((x, column)),
        _ => None,
    })
}

/// One cut of the mixture solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    /// How far the certificate's best column falls short of the relaxed bound.
    pub gap: f64,
    /// `alpha` paired with the regrets of the component added in response.
    pub pairing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureOutcome {
    pub mixture: MixtureDistribution,
    /// Restricted programs solved.
    pub rounds: usize,
    /// Components generated, including the uniform seed.
    pub generated: usize,
    pub cuts: Vec<Cut>,
    /// The explicit LP produced the answer after the round budget ran out.
    pub used_fallback: bool,
}

pub fn solve_ce_mixture(game: &PolymatrixGame, eps: f64, max_rounds: usize) -> Result<MixtureOutcome> {
    solve_ce_mixture_with(game, eps, max_rounds, &SolverConfig::default())
}

/// Mixture of product distributions that is an `eps`-correlated equilibrium.
///
/// Each round mixes the current components with the restricted LP. If the
/// mixture verifies it is returned; otherwise the LP's optimal row weights
/// become `alpha` and [`product_from_dual`] supplies the next component.
pub fn solve_ce_mixture_with(
    game: &PolymatrixGame,
    eps: f64,
    max_rounds: usize,
    config: &SolverConfig,
) -> Result<MixtureOutcome> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::Input(format!("tolerance {eps} must be nonnegative")));
    }
    let counts = game.strategy_counts();
    let seed = ProductDistribution::uniform(counts);
    let mut columns = vec![regret_from_product_with(game, &seed, &config.expectation)?.values()];
    let mut components = vec![seed];
    let rows = columns[0].len();
    let mut cuts = Vec::new();
    if rows == 0 {
        return Ok(MixtureOutcome {
            mixture: MixtureDistribution::single(components.remove(0)),
            rounds: 0,
            generated: 1,
            cuts,
            used_fallback: false,
        });
    }
    let mut last_gap = f64::NAN;
    for round in 1..=max_rounds {
        // restricted game: rows are deviations, columns are components, shifted by eps
        let m: Vec<Vec<f64>> = (0..rows)
            .map(|r| columns.iter().map(|c| c[r] + eps).collect())
            .collect();
        let sol = lp::solve_matrix_game_with(&m, &config.lp)?;
        let weights = &sol.columns;
        let mixed: Vec<f64> = (0..rows)
            .map(|r| columns.iter().zip(weights).map(|(c, w)| w * c[r]).sum())
            .collect();
        if mixed.iter().all(|&g| g >= -eps) {
            for floor in [NEGLIGIBLE_WEIGHT, 0.0] {
                let Some(mixture) = mixture_above(weights, &components, floor)? else {
                    continue;
                };
                let verdict = verify_ce_with(game, &JointDistribution::Mixture(mixture.clone()), eps, config)?;
                if verdict.is_ce {
                    return Ok(MixtureOutcome {
                        mixture,
                        rounds: round,
                        generated: components.len(),
                        cuts,
                        used_fallback: false,
                    });
                }
            }
        }
        let alpha = DualWeights::from_values(counts, sol.rows.clone())?;
        let best = columns
            .iter()
            .map(|c| c.iter().zip(&sol.rows).map(|(g, a)| g * a).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        last_gap = -eps - best;
        let next = product_from_dual(counts, &alpha)?;
        let column = regret_from_product_with(game, &next, &config.expectation)?.values();
        let pairing: f64 = column.iter().zip(&sol.rows).map(|(g, a)| g * a).sum();
        if pairing.abs() > IDENTITY_TOLERANCE {
            return Err(Error::Numerical(format!(
                "round {round}: new component pairs to {pairing:e} with the certificate"
            )));
        }
        cuts.push(Cut { gap: last_gap, pairing });
        let deeper = deepen_cut(game, &alpha, &next, pairing, &config.expectation)?;
        columns.push(column);
        components.push(next);
        if let Some((x, column)) = deeper {
            columns.push(column);
            components.push(x);
        }
    }
    if game.profile_count() <= config.explicit_guard {
        let d = solve_ce_explicit_with(game, config)?;
        return Ok(MixtureOutcome {
            mixture: MixtureDistribution::from_explicit(counts, &d)?,
            rounds: max_rounds,
            generated: components.len(),
            cuts,
            used_fallback: true,
        });
    }
    Err(Error::Convergence {
        rounds: max_rounds,
        last_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{random_game, random_product_distribution, Aggregator, PayoffMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_player(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, aggregator: Aggregator) -> PolymatrixGame {
        let counts = vec![a.len(), b.len()];
        let mats = vec![
            ((0, 1), PayoffMatrix::from_rows(a).unwrap()),
            ((1, 0), PayoffMatrix::from_rows(b).unwrap()),
        ];
        PolymatrixGame::new(counts, mats, aggregator).unwrap()
    }

    // swapping 0 -> 1 gains exactly 1 when the opponent plays 0, which happens half the time
    fn planted() -> (PolymatrixGame, ExplicitDistribution) {
        let game = two_player(
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            Aggregator::Sum,
        );
        let d = ExplicitDistribution::new([(StrategyProfile(vec![0, 0]), 0.5), (StrategyProfile(vec![0, 1]), 0.5)])
            .unwrap();
        (game, d)
    }

    #[test]
    fn planted_deviation_is_found() {
        let (game, d) = planted();
        let verdict = verify_ce(&game, &d.into(), 1e-6).unwrap();
        assert_eq!(verdict.report.get(0, 0, 1), Some(-0.5));
        assert_eq!(verdict.report.get(0, 1, 0), Some(0.0));
        assert_eq!(verdict.report.max_violation, 0.5);
        assert_eq!(verdict.report.witness, Some(Deviation { p: 0, i: 0, j: 1 }));
        assert!(!verdict.is_ce);
    }

    #[test]
    fn product_from_dual_examples() {
        let counts = [2, 3];
        let x = product_from_dual(&counts, &DualWeights::zeros(&counts)).unwrap();
        assert_eq!(x, ProductDistribution::uniform(&counts));

        let mut alpha = DualWeights::zeros(&counts);
        alpha.set(0, 0, 1, 0.3).unwrap();
        alpha.set(0, 1, 0, 0.1).unwrap();
        let x = product_from_dual(&counts, &alpha).unwrap();
        assert!((x.marginal(0)[0] - 0.25).abs() < 1e-12);
        assert!((x.marginal(0)[1] - 0.75).abs() < 1e-12);
        assert!(x.marginal(1).iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn zero_pairing_on_random_duals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..50 {
            let counts = vec![3, 2, 3];
            let agg = if k % 2 == 0 { Aggregator::Max } else { Aggregator::Sum };
            let game = random_game(&counts, -1.0, 1.0, agg, k).unwrap();
            let len = deviations(&counts).len();
            let values = (0..len)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() })
                .collect();
            let alpha = DualWeights::from_values(&counts, values).unwrap();
            let x = product_from_dual(&counts, &alpha).unwrap();
            let g = regret_from_product(&game, &x).unwrap();
            assert!(alpha.pair(&g).abs() <= IDENTITY_TOLERANCE, "instance {k}");
        }
    }

    #[test]
    fn explicit_dominant_profile() {
        // action 1 dominates for both players
        let game = two_player(
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            vec![vec![0.0, 0.0], vec![2.0, 3.0]],
            Aggregator::Sum,
        );
        let d = solve_ce_explicit(&game).unwrap();
        assert!((d.probability(&[1, 1]) - 1.0).abs() < 1e-9);
        assert!(verify_ce(&game, &d.into(), 1e-6).unwrap().is_ce);
    }

    #[test]
    fn explicit_matching_pennies() {
        let game = two_player(
            vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
            vec![vec![-1.0, 1.0], vec![1.0, -1.0]],
            Aggregator::Sum,
        );
        let uniform = ProductDistribution::uniform(&[2, 2]);
        assert!(verify_ce(&game, &uniform.into(), 0.0).unwrap().is_ce);
        let d = solve_ce_explicit(&game).unwrap();
        assert!(verify_ce(&game, &d.into(), 1e-6).unwrap().is_ce);
    }

    #[test]
    fn explicit_random_max_games_verify() {
        for seed in 0..10 {
            let game = random_game(&[2, 2, 2], 0.0, 1.0, Aggregator::Max, seed).unwrap();
            let d = solve_ce_explicit(&game).unwrap();
            assert!(verify_ce(&game, &d.into(), 1e-6).unwrap().is_ce, "seed {seed}");
        }
    }

    #[test]
    fn explicit_guard() {
        let game = random_game(&[2, 2, 2], 0.0, 1.0, Aggregator::Sum, 0).unwrap();
        let config = SolverConfig {
            explicit_guard: 7,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_ce_explicit_with(&game, &config),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn mixture_constant_game_is_one_round() {
        let game = random_game(&[3, 2, 2], 0.0, 1.0, Aggregator::Max, 1)
            .unwrap()
            .map_payoffs(|_| 4.0);
        let out = solve_ce_mixture(&game, 1e-6, 10).unwrap();
        assert_eq!(out.rounds, 1);
        assert_eq!(out.mixture.len(), 1);
        assert!(out.cuts.is_empty());
    }

    #[test]
    fn mixture_symmetric_sum_game_keeps_uniform() {
        // every matrix is constant along rows, so each player is indifferent
        let game = two_player(
            vec![vec![1.0, 5.0], vec![1.0, 5.0]],
            vec![vec![2.0, -2.0], vec![2.0, -2.0]],
            Aggregator::Sum,
        );
        let out = solve_ce_mixture(&game, 1e-6, 10).unwrap();
        assert_eq!(out.mixture.len(), 1);
        assert_eq!(
            out.mixture.components().next().unwrap().1,
            &ProductDistribution::uniform(&[2, 2])
        );
    }

    #[test]
    fn mixture_solver_closed_loop() {
        for seed in 0..20 {
            let agg = if seed % 2 == 0 {
                Aggregator::Max
            } else {
                Aggregator::Min
            };
            let game = random_game(&[3, 2, 3], -1.0, 1.0, agg, seed).unwrap();
            let out = solve_ce_mixture(&game, 1e-6, 200).unwrap();
            assert!(verify_ce(&game, &out.mixture.clone().into(), 1e-6).unwrap().is_ce);
            assert!(out
                .cuts
                .iter()
                .all(|c| c.gap > 0.0 && c.pairing.abs() <= IDENTITY_TOLERANCE));
        }
    }

    #[test]
    fn mixture_matches_expansion() {
        let game = random_game(&[2, 3, 2], 0.0, 1.0, Aggregator::Max, 3).unwrap();
        let m = MixtureDistribution::new(
            (0..3)
                .map(|k| (1.0 / 3.0, random_product_distribution(&[2, 3, 2], 10 + k)))
                .collect(),
        )
        .unwrap();
        let lhs = verify_ce(&game, &m.clone().into(), 0.0).unwrap().report;
        let rhs = verify_ce(&game, &m.expand().into(), 0.0).unwrap().report;
        for (a, b) in lhs.entries.iter().zip(&rhs.entries) {
            assert!((a.g - b.g).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_eps_rejected() {
        let (game, d) = planted();
        assert!(matches!(verify_ce(&game, &d.into(), -1.0), Err(Error::Input(_))));
    }
}
