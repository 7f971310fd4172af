//! Polymatrix game representation and pointwise utility evaluation.
//!
//! A game with `n` players stores one payoff matrix for every ordered pair
//! `(p, q)`, `p != q`. Entry `[i][j]` of the `(p, q)` matrix is what player `p`
//! earns in its two-player game against `q` when `p` plays `i` and `q` plays
//! `j`. The [`Aggregator`] combines those `n - 1` pairwise payoffs into `p`'s
//! utility.

mod aggregator;
mod distribution;
mod random;

use std::fmt;

pub use aggregator::{leading_terms, Aggregator, Formula};
pub use distribution::{ExplicitDistribution, ProductDistribution, PROBABILITY_TOLERANCE};
pub use random::{
    monte_carlo_estimate, monte_carlo_expectation, random_game, random_product_distribution, MonteCarloEstimate,
};

use crate::error::{Error, Result};

/// Dense row-major payoff matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Input(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Build from nested rows; fails on ragged input.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Input(format!(
                "row {bad} has {} columns, expected {cols}",
                rows[bad].len()
            )));
        }
        let n_rows = rows.len();
        Ok(Self {
            rows: n_rows,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }
}

/// One strategy index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile(pub Vec<usize>);

impl StrategyProfile {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for StrategyProfile {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl std::ops::Deref for StrategyProfile {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// A single broken game invariant, as reported by [`validate_game`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    PlayerCount(usize),
    EmptyStrategySet {
        player: usize,
    },
    MissingMatrix {
        p: usize,
        q: usize,
    },
    Shape {
        p: usize,
        q: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    NonFinite {
        p: usize,
        q: usize,
        i: usize,
        j: usize,
    },
    NonBinary {
        p: usize,
        q: usize,
        i: usize,
        j: usize,
        value: String,
    },
    CoefficientCount {
        expected: usize,
        found: usize,
    },
    NonFiniteCoefficient {
        index: usize,
    },
    FormulaInput {
        index: usize,
        inputs: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PlayerCount(n) => write!(f, "game needs at least 2 players, has {n}"),
            Violation::EmptyStrategySet { player } => {
                write!(f, "player {player} has no strategies")
            }
            Violation::MissingMatrix { p, q } => write!(f, "missing payoff matrix ({p},{q})"),
            Violation::Shape { p, q, expected, found } => write!(
                f,
                "matrix ({p},{q}) has shape {}x{}, expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            Violation::NonFinite { p, q, i, j } => {
                write!(f, "matrix ({p},{q}) entry [{i}][{j}] is not finite")
            }
            Violation::NonBinary { p, q, i, j, value } => write!(
                f,
                "matrix ({p},{q}) entry [{i}][{j}] = {value} is not 0 or 1 under a boolean formula"
            ),
            Violation::CoefficientCount { expected, found } => write!(
                f,
                "sorted-linear aggregator has {found} coefficients, expected {expected}"
            ),
            Violation::NonFiniteCoefficient { index } => {
                write!(f, "sorted-linear coefficient {index} is not finite")
            }
            Violation::FormulaInput { index, inputs } => write!(
                f,
                "formula references input {index} but only {inputs} opponent inputs exist"
            ),
        }
    }
}

/// An `n`-player polymatrix game with a payoff aggregator.
///
/// Construct with [`PolymatrixGame::new`] to get a validated game. Every other
/// operation in this crate assumes validity.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymatrixGame {
    strategy_counts: Vec<usize>,
    // n * n slots, indexed p * n + q; diagonal always None
    payoffs: Vec<Option<PayoffMatrix>>,
    aggregator: Aggregator,
}

impl PolymatrixGame {
    /// Build and validate a game. Fails with [`Error::Input`] listing every violation.
    pub fn new(
        strategy_counts: Vec<usize>,
        payoffs: impl IntoIterator<Item = ((usize, usize), PayoffMatrix)>,
        aggregator: Aggregator,
    ) -> Result<Self> {
        let game = Self::from_parts(strategy_counts, payoffs, aggregator)?;
        let violations = validate_game(&game);
        if violations.is_empty() {
            Ok(game)
        } else {
            let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
            Err(Error::Input(list.join("; ")))
        }
    }

    /// Assemble a game without checking shapes or values; see [`validate_game`].
    ///
    /// Only pairs that cannot be stored at all (out of range, `p == q`, duplicated) are rejected.
    pub fn from_parts(
        strategy_counts: Vec<usize>,
        payoffs: impl IntoIterator<Item = ((usize, usize), PayoffMatrix)>,
        aggregator: Aggregator,
    ) -> Result<Self> {
        let n = strategy_counts.len();
        let mut slots = vec![None; n * n];
        for ((p, q), m) in payoffs {
            if p >= n || q >= n || p == q {
                return Err(Error::Input(format!("invalid payoff pair ({p},{q}) for {n} players")));
            }
            if slots[p * n + q].replace(m).is_some() {
                return Err(Error::Input(format!("duplicate payoff matrix ({p},{q})")));
            }
        }
        Ok(Self {
            strategy_counts,
            payoffs: slots,
            aggregator,
        })
    }

    pub fn n(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    /// Largest strategy count.
    pub fn m(&self) -> usize {
        self.strategy_counts.iter().copied().max().unwrap_or(0)
    }

    pub fn aggregator(&self) -> &Aggregator {
        &self.aggregator
    }

    pub fn payoff(&self, p: usize, q: usize) -> &PayoffMatrix {
        self.payoffs[p * self.n() + q]
            .as_ref()
            .unwrap_or_else(|| panic!("no payoff matrix ({p},{q})"))
    }

    pub fn try_payoff(&self, p: usize, q: usize) -> Option<&PayoffMatrix> {
        let n = self.n();
        if p >= n || q >= n {
            return None;
        }
        self.payoffs[p * n + q].as_ref()
    }

    /// Stored matrices in `(p, q)` order.
    pub fn matrices(&self) -> impl Iterator<Item = ((usize, usize), &PayoffMatrix)> {
        let n = self.n();
        self.payoffs
            .iter()
            .enumerate()
            .filter_map(move |(k, m)| m.as_ref().map(|m| ((k / n, k % n), m)))
    }

    /// Opponents of `p` in slot order.
    pub fn opponents(&self, p: usize) -> impl Iterator<Item = usize> {
        (0..self.n()).filter(move |&q| q != p)
    }

    /// Number of strategy profiles, saturating at `u128::MAX`.
    pub fn profile_count(&self) -> u128 {
        self.strategy_counts
            .iter()
            .fold(1u128, |acc, &t| acc.saturating_mul(t as u128))
    }

    /// Number of opponent profiles seen by `p`.
    pub fn opponent_profile_count(&self, p: usize) -> u128 {
        self.opponents(p)
            .fold(1u128, |acc, q| acc.saturating_mul(self.strategy_counts[q] as u128))
    }

    pub fn with_aggregator(&self, aggregator: Aggregator) -> Self {
        Self {
            aggregator,
            ..self.clone()
        }
    }

    /// Apply `f` to every payoff entry, keeping the aggregator.
    pub fn map_payoffs(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            strategy_counts: self.strategy_counts.clone(),
            payoffs: self.payoffs.iter().map(|m| m.as_ref().map(|m| m.map(&f))).collect(),
            aggregator: self.aggregator.clone(),
        }
    }

    pub(crate) fn check_player(&self, p: usize) -> Result<()> {
        if p >= self.n() {
            return Err(Error::Input(format!(
                "player {p} out of range for {} players",
                self.n()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_profile(&self, s: &[usize]) -> Result<()> {
        if s.len() != self.n() {
            return Err(Error::Input(format!(
                "profile has {} entries, game has {} players",
                s.len(),
                self.n()
            )));
        }
        for (p, (&sp, &t)) in s.iter().zip(&self.strategy_counts).enumerate() {
            if sp >= t {
                return Err(Error::Input(format!("player {p} strategy {sp} out of range (has {t})")));
            }
        }
        Ok(())
    }

    /// Utility of `p` at profile `s`, writing pairwise payoffs into `scratch`.
    /// No bounds checks beyond slice indexing.
    pub(crate) fn utility_unchecked(&self, p: usize, s: &[usize], scratch: &mut Vec<f64>) -> Result<f64> {
        scratch.clear();
        let sp = s[p];
        for q in self.opponents(p) {
            scratch.push(self.payoff(p, q).get(sp, s[q]));
        }
        self.aggregator.apply(scratch)
    }
}

/// Every broken invariant of `game`; empty iff the game is well formed.
pub fn validate_game(game: &PolymatrixGame) -> Vec<Violation> {
    let n = game.n();
    let mut out = Vec::new();
    if n < 2 {
        out.push(Violation::PlayerCount(n));
    }
    for (player, &t) in game.strategy_counts.iter().enumerate() {
        if t == 0 {
            out.push(Violation::EmptyStrategySet { player });
        }
    }
    let boolean = matches!(game.aggregator, Aggregator::BooleanFormula(_));
    for p in 0..n {
        for q in game.opponents(p) {
            let Some(m) = game.try_payoff(p, q) else {
                out.push(Violation::MissingMatrix { p, q });
                continue;
            };
            let expected = (game.strategy_counts[p], game.strategy_counts[q]);
            if (m.rows(), m.cols()) != expected {
                out.push(Violation::Shape {
                    p,
                    q,
                    expected,
                    found: (m.rows(), m.cols()),
                });
                continue;
            }
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let v = m.get(i, j);
                    if !v.is_finite() {
                        out.push(Violation::NonFinite { p, q, i, j });
                    } else if boolean && v != 0.0 && v != 1.0 {
                        out.push(Violation::NonBinary {
                            p,
                            q,
                            i,
                            j,
                            value: v.to_string(),
                        });
                    }
                }
            }
        }
    }
    let inputs = n.saturating_sub(1);
    match &game.aggregator {
        Aggregator::SortedLinear(coeffs) => {
            if coeffs.len() != inputs {
                out.push(Violation::CoefficientCount {
                    expected: inputs,
                    found: coeffs.len(),
                });
            }
            for (index, c) in coeffs.iter().enumerate() {
                if !c.is_finite() {
                    out.push(Violation::NonFiniteCoefficient { index });
                }
            }
        }
        Aggregator::BooleanFormula(formula) => {
            if let Some(index) = formula.max_var().filter(|&k| k >= inputs) {
                out.push(Violation::FormulaInput { index, inputs });
            }
        }
        _ => {}
    }
    out
}

/// Utility of player `p` at profile `s`.
pub fn evaluate_utility(game: &PolymatrixGame, p: usize, s: &[usize]) -> Result<f64> {
    game.check_player(p)?;
    game.check_profile(s)?;
    game.utility_unchecked(p, s, &mut Vec::with_capacity(game.n()))
}

/// Visit every strategy profile of `counts` in lexicographic order.
pub(crate) fn for_each_profile(counts: &[usize], mut visit: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if counts.contains(&0) {
        return Ok(());
    }
    let mut s = vec![0usize; counts.len()];
    loop {
        visit(&s)?;
        let mut k = counts.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            s[k] += 1;
            if s[k] < counts[k] {
                break;
            }
            s[k] = 0;
        }
    }
}
