use super::MixtureDistribution;
use crate::error::{Error, Result};
use crate::expectation::{conditional_action_expectations_with, ExpectationConfig};
use crate::game::{ExplicitDistribution, PolymatrixGame, ProductDistribution};

/// Player `p` told to play `i` considers playing `j` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Deviation {
    pub p: usize,
    pub i: usize,
    pub j: usize,
}

/// Every `(p, i, j)` with `i != j`, ordered by `p`, then `i`, then `j`.
pub fn deviations(strategy_counts: &[usize]) -> Vec<Deviation> {
    let mut out = Vec::new();
    for (p, &t) in strategy_counts.iter().enumerate() {
        for i in 0..t {
            for j in (0..t).filter(|&j| j != i) {
                out.push(Deviation { p, i, j });
            }
        }
    }
    out
}

fn offsets(strategy_counts: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    strategy_counts
        .iter()
        .map(|&t| {
            let start = acc;
            acc += t * t.saturating_sub(1);
            start
        })
        .collect()
}

fn slot(strategy_counts: &[usize], offsets: &[usize], p: usize, i: usize, j: usize) -> usize {
    let t = strategy_counts[p];
    debug_assert!(i < t && j < t && i != j);
    offsets[p] + i * (t - 1) + if j < i { j } else { j - 1 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretEntry {
    pub p: usize,
    pub i: usize,
    pub j: usize,
    pub g: f64,
}

/// The equilibrium constraint values of one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub entries: Vec<RegretEntry>,
    /// `max(0, -min g)`.
    pub max_violation: f64,
    /// The entry with the smallest `g` (first in order on ties); `None` when
    /// nobody has an alternative.
    pub witness: Option<Deviation>,
}

impl RegretReport {
    pub fn from_entries(entries: Vec<RegretEntry>) -> Self {
        let worst = entries.iter().fold(None::<&RegretEntry>, |best, e| match best {
            Some(b) if b.g <= e.g => Some(b),
            _ => Some(e),
        });
        Self {
            max_violation: worst.map_or(0.0, |e| (-e.g).max(0.0)),
            witness: worst.map(|e| Deviation { p: e.p, i: e.i, j: e.j }),
            entries,
        }
    }

    fn from_values(strategy_counts: &[usize], values: Vec<f64>) -> Self {
        let entries = deviations(strategy_counts)
            .into_iter()
            .zip(values)
            .map(|(d, g)| RegretEntry {
                p: d.p,
                i: d.i,
                j: d.j,
                g,
            })
            .collect();
        Self::from_entries(entries)
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.g).collect()
    }

    pub fn get(&self, p: usize, i: usize, j: usize) -> Option<f64> {
        self.entries.iter().find(|e| (e.p, e.i, e.j) == (p, i, j)).map(|e| e.g)
    }

    pub fn is_ce(&self, eps: f64) -> bool {
        self.max_violation <= eps
    }
}

pub fn regret_from_product(game: &PolymatrixGame, x: &ProductDistribution) -> Result<RegretReport> {
    regret_from_product_with(game, x, &ExpectationConfig::default())
}

/// `g(p,i,j) = x_p(i) (e_p[i] - e_p[j])` from conditional expectations.
pub fn regret_from_product_with(
    game: &PolymatrixGame,
    x: &ProductDistribution,
    config: &ExpectationConfig,
) -> Result<RegretReport> {
    x.check_shape(game)?;
    let mut values = Vec::new();
    for p in 0..game.n() {
        let e = conditional_action_expectations_with(game, p, x, config)?.values;
        let xp = x.marginal(p);
        for i in 0..e.len() {
            for j in (0..e.len()).filter(|&j| j != i) {
                values.push(xp[i] * (e[i] - e[j]));
            }
        }
    }
    Ok(RegretReport::from_values(game.strategy_counts(), values))
}

/// Weighted sum of per-component regret tables.
pub fn regret_from_mixture(
    game: &PolymatrixGame,
    mixture: &MixtureDistribution,
    config: &ExpectationConfig,
) -> Result<RegretReport> {
    mixture.check_shape(game)?;
    let mut total: Option<Vec<f64>> = None;
    for (w, x) in mixture.components() {
        let g = regret_from_product_with(game, x, config)?.values();
        match total.as_mut() {
            None => total = Some(g.into_iter().map(|v| w * v).collect()),
            Some(acc) => acc.iter_mut().zip(g).for_each(|(a, v)| *a += w * v),
        }
    }
    Ok(RegretReport::from_values(
        game.strategy_counts(),
        total.unwrap_or_default(),
    ))
}

pub fn regret_from_explicit(game: &PolymatrixGame, d: &ExplicitDistribution) -> Result<RegretReport> {
    regret_from_explicit_with(game, d, crate::expectation::ENUMERATION_GUARD)
}

/// Direct summation over the support of `d`.
pub fn regret_from_explicit_with(game: &PolymatrixGame, d: &ExplicitDistribution, guard: u128) -> Result<RegretReport> {
    if d.len() as u128 > guard {
        return Err(Error::Resource(format!(
            "{} atoms exceed enumeration guard {guard}",
            d.len()
        )));
    }
    d.check_shape(game)?;
    let counts = game.strategy_counts();
    let offs = offsets(counts);
    let mut values = vec![0.0; deviations(counts).len()];
    let mut scratch = Vec::with_capacity(game.n());
    let mut deviated = vec![0; game.n()];
    for (s, w) in d.atoms() {
        if w == 0.0 {
            continue;
        }
        deviated.copy_from_slice(s);
        for p in 0..game.n() {
            let i = s[p];
            let base = game.utility_unchecked(p, s, &mut scratch)?;
            for j in (0..counts[p]).filter(|&j| j != i) {
                deviated[p] = j;
                let alt = game.utility_unchecked(p, &deviated, &mut scratch)?;
                values[slot(counts, &offs, p, i, j)] += w * (base - alt);
            }
            deviated[p] = i;
        }
    }
    Ok(RegretReport::from_values(counts, values))
}

/// Nonnegative weights on the equilibrium constraints, one per [`Deviation`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualWeights {
    strategy_counts: Vec<usize>,
    values: Vec<f64>,
}

impl DualWeights {
    pub fn zeros(strategy_counts: &[usize]) -> Self {
        Self {
            strategy_counts: strategy_counts.to_vec(),
            values: vec![0.0; deviations(strategy_counts).len()],
        }
    }

    /// Weights in [`deviations`] order.
    pub fn from_values(strategy_counts: &[usize], values: Vec<f64>) -> Result<Self> {
        let expected = deviations(strategy_counts).len();
        if values.len() != expected {
            return Err(Error::Input(format!(
                "{} dual weights, expected {expected}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Input("dual weights must be finite and nonnegative".into()));
        }
        Ok(Self {
            strategy_counts: strategy_counts.to_vec(),
            values,
        })
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, p: usize, i: usize, j: usize) -> f64 {
        self.values[slot(&self.strategy_counts, &offsets(&self.strategy_counts), p, i, j)]
    }

    pub fn set(&mut self, p: usize, i: usize, j: usize, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Input(format!(
                "dual weight {value} must be finite and nonnegative"
            )));
        }
        let k = slot(&self.strategy_counts, &offsets(&self.strategy_counts), p, i, j);
        self.values[k] = value;
        Ok(())
    }

    /// Player `p`'s weights as a rate matrix with zero diagonal.
    pub fn rates(&self, p: usize) -> Vec<Vec<f64>> {
        let t = self.strategy_counts[p];
        (0..t)
            .map(|i| (0..t).map(|j| if i == j { 0.0 } else { self.get(p, i, j) }).collect())
            .collect()
    }

    /// `sum alpha * g` against a regret table laid out in the same order.
    pub fn pair(&self, report: &RegretReport) -> f64 {
        self.values.iter().zip(&report.entries).map(|(a, e)| a * e.g).sum()
    }
}
