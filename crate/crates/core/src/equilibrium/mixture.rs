use crate::error::{Error, Result};
use crate::game::{ExplicitDistribution, PolymatrixGame, ProductDistribution, PROBABILITY_TOLERANCE};

/// Convex combination of product distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDistribution {
    components: Vec<(f64, ProductDistribution)>,
}

impl MixtureDistribution {
    pub fn new(components: Vec<(f64, ProductDistribution)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Input("mixture needs at least one component".into()));
        }
        if let Some((w, _)) = components.iter().find(|(w, _)| !w.is_finite() || *w < 0.0) {
            return Err(Error::Input(format!("mixture weight {w} is not a probability")));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::Input(format!("mixture weights sum to {total}, not 1")));
        }
        let shape: Vec<usize> = components[0].1.marginals().iter().map(Vec::len).collect();
        if components
            .iter()
            .any(|(_, x)| !x.marginals().iter().map(Vec::len).eq(shape.iter().copied()))
        {
            return Err(Error::Input("mixture components have different shapes".into()));
        }
        Ok(Self { components })
    }

    pub fn single(x: ProductDistribution) -> Self {
        Self {
            components: vec![(1.0, x)],
        }
    }

    /// One point-mass component per atom.
    pub fn from_explicit(strategy_counts: &[usize], d: &ExplicitDistribution) -> Result<Self> {
        let components = d
            .atoms()
            .filter(|(_, w)| *w > 0.0)
            .map(|(s, w)| Ok((w, ProductDistribution::point_mass(strategy_counts, s)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, &ProductDistribution)> {
        self.components.iter().map(|(w, x)| (*w, x))
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn check_shape(&self, game: &PolymatrixGame) -> Result<()> {
        self.components.iter().try_for_each(|(_, x)| x.check_shape(game))
    }

    /// Materialize the joint distribution; exponential in the player count.
    pub fn expand(&self) -> ExplicitDistribution {
        let mut out = ExplicitDistribution::default();
        for (w, x) in &self.components {
            out.add_scaled(&x.expand(), *w);
        }
        out
    }
}
