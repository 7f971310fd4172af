use std::collections::BTreeMap;

use super::{for_each_profile, PolymatrixGame, StrategyProfile};
use crate::error::{Error, Result};

/// Allowed deviation of a probability vector's total from 1.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

fn check_probabilities(label: &str, probs: &[f64]) -> Result<()> {
    if let Some(k) = probs.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Input(format!(
            "{label}: entry {k} = {} is not a probability",
            probs[k]
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(Error::Input(format!("{label}: probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// Independent per-player mixed strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDistribution {
    marginals: Vec<Vec<f64>>,
}

impl ProductDistribution {
    pub fn new(marginals: Vec<Vec<f64>>) -> Result<Self> {
        for (p, x) in marginals.iter().enumerate() {
            check_probabilities(&format!("marginal {p}"), x)?;
        }
        Ok(Self { marginals })
    }

    pub fn uniform(strategy_counts: &[usize]) -> Self {
        Self {
            marginals: strategy_counts.iter().map(|&t| vec![1.0 / t as f64; t]).collect(),
        }
    }

    pub fn point_mass(strategy_counts: &[usize], profile: &[usize]) -> Result<Self> {
        if profile.len() != strategy_counts.len() || profile.iter().zip(strategy_counts).any(|(s, t)| s >= t) {
            return Err(Error::Input(format!(
                "profile {profile:?} does not fit shape {strategy_counts:?}"
            )));
        }
        Ok(Self {
            marginals: strategy_counts
                .iter()
                .zip(profile)
                .map(|(&t, &s)| (0..t).map(|k| if k == s { 1.0 } else { 0.0 }).collect())
                .collect(),
        })
    }

    pub fn marginals(&self) -> &[Vec<f64>] {
        &self.marginals
    }

    pub fn marginal(&self, p: usize) -> &[f64] {
        &self.marginals[p]
    }

    /// Replace player `p`'s marginal.
    pub fn with_marginal(&self, p: usize, x: Vec<f64>) -> Result<Self> {
        check_probabilities(&format!("marginal {p}"), &x)?;
        let mut marginals = self.marginals.clone();
        marginals[p] = x;
        Ok(Self { marginals })
    }

    pub fn check_shape(&self, game: &PolymatrixGame) -> Result<()> {
        let counts = game.strategy_counts();
        if self.marginals.len() != counts.len() || self.marginals.iter().zip(counts).any(|(x, &t)| x.len() != t) {
            return Err(Error::Input(format!(
                "distribution shape {:?} does not match strategy counts {counts:?}",
                self.marginals.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        Ok(())
    }

    pub fn probability(&self, s: &[usize]) -> f64 {
        self.marginals.iter().zip(s).map(|(x, &k)| x[k]).product()
    }

    /// Materialize the joint distribution over all profiles with nonzero mass.
    pub fn expand(&self) -> ExplicitDistribution {
        let counts: Vec<usize> = self.marginals.iter().map(Vec::len).collect();
        let mut atoms = BTreeMap::new();
        for_each_profile(&counts, |s| {
            let w = self.probability(s);
            if w > 0.0 {
                atoms.insert(StrategyProfile(s.to_vec()), w);
            }
            Ok(())
        })
        .expect("infallible visitor");
        ExplicitDistribution { atoms }
    }
}

/// Sparse joint distribution over strategy profiles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExplicitDistribution {
    atoms: BTreeMap<StrategyProfile, f64>,
}

impl ExplicitDistribution {
    /// Collect atoms, merging repeated profiles.
    pub fn new(atoms: impl IntoIterator<Item = (StrategyProfile, f64)>) -> Result<Self> {
        let mut map: BTreeMap<StrategyProfile, f64> = BTreeMap::new();
        for (s, w) in atoms {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Input(format!("profile {:?} has invalid probability {w}", s.0)));
            }
            *map.entry(s).or_default() += w;
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::Input(format!("atom probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms: map })
    }

    pub fn point_mass(profile: Vec<usize>) -> Self {
        Self {
            atoms: BTreeMap::from([(StrategyProfile(profile), 1.0)]),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&StrategyProfile, f64)> {
        self.atoms.iter().map(|(s, w)| (s, *w))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn probability(&self, s: &[usize]) -> f64 {
        self.atoms.get(&StrategyProfile(s.to_vec())).copied().unwrap_or(0.0)
    }

    pub fn check_shape(&self, game: &PolymatrixGame) -> Result<()> {
        for s in self.atoms.keys() {
            game.check_profile(s)?;
        }
        Ok(())
    }

    /// Accumulate `weight * other` into `self` without renormalizing.
    pub(crate) fn add_scaled(&mut self, other: &ExplicitDistribution, weight: f64) {
        for (s, w) in other.atoms() {
            *self.atoms.entry(s.clone()).or_default() += weight * w;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_marginals() {
        assert!(ProductDistribution::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(ProductDistribution::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(ProductDistribution::new(vec![vec![0.5, 0.5], vec![1.0]]).is_ok());
    }

    #[test]
    fn expansion_matches_products() {
        let x = ProductDistribution::new(vec![vec![0.25, 0.75], vec![1.0], vec![0.5, 0.0, 0.5]]).unwrap();
        let d = x.expand();
        assert_eq!(d.len(), 4);
        assert_eq!(d.probability(&[1, 0, 2]), 0.375);
        assert_eq!(d.probability(&[1, 0, 1]), 0.0);
        let total: f64 = d.atoms().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn explicit_merges_and_checks_total() {
        let d = ExplicitDistribution::new(vec![
            (StrategyProfile(vec![0, 1]), 0.25),
            (StrategyProfile(vec![0, 1]), 0.25),
            (StrategyProfile(vec![1, 1]), 0.5),
        ])
        .unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.probability(&[0, 1]), 0.5);
        assert!(ExplicitDistribution::new(vec![(StrategyProfile(vec![0]), 0.9)]).is_err());
    }
}
