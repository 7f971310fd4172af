use std::fmt;

use crate::error::{Error, Result};

/// How a player's per-opponent payoffs are combined into one utility.
///
/// Inputs are always the `n - 1` pairwise payoffs ordered by increasing
/// opponent index, skipping the player itself.
#[derive(Debug, Clone, PartialEq)]
pub enum Aggregator {
    Sum,
    Max,
    Min,
    /// Linear combination of the payoffs sorted in descending order.
    SortedLinear(Vec<f64>),
    /// Boolean expression over binary payoffs; evaluates to 0 or 1.
    BooleanFormula(Formula),
}

impl Aggregator {
    /// Short lowercase tag, matching the `type` field of the game file.
    pub fn tag(&self) -> &'static str {
        match self {
            Aggregator::Sum => "sum",
            Aggregator::Max => "max",
            Aggregator::Min => "min",
            Aggregator::SortedLinear(_) => "sorted_linear",
            Aggregator::BooleanFormula(_) => "boolean_formula",
        }
    }

    /// Combine `values` (one per opponent slot). `values` may be reordered.
    pub fn apply(&self, values: &mut [f64]) -> Result<f64> {
        match self {
            Aggregator::Sum => Ok(values.iter().sum()),
            Aggregator::Max => Ok(values.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            Aggregator::Min => Ok(values.iter().copied().fold(f64::INFINITY, f64::min)),
            Aggregator::SortedLinear(coeffs) => {
                values.sort_unstable_by(|a, b| b.total_cmp(a));
                Ok(coeffs.iter().zip(values.iter()).map(|(c, v)| c * v).sum())
            }
            Aggregator::BooleanFormula(formula) => {
                for (slot, v) in values.iter().enumerate() {
                    if *v != 0.0 && *v != 1.0 {
                        return Err(Error::Domain(format!(
                            "boolean formula input {slot} has non-binary payoff {v}"
                        )));
                    }
                }
                Ok(if formula.eval(&|k| values[k] == 1.0) { 1.0 } else { 0.0 })
            }
        }
    }
}

/// Number of leading terms that matter in a sorted-linear coefficient vector:
/// one past the index of the last nonzero coefficient.
pub fn leading_terms(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|c| *c != 0.0).map_or(0, |k| k + 1)
}

/// Boolean expression tree over opponent slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Var(usize),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn eval(&self, input: &impl Fn(usize) -> bool) -> bool {
        match self {
            Formula::Var(k) => input(*k),
            Formula::Not(inner) => !inner.eval(input),
            Formula::And(args) => args.iter().all(|a| a.eval(input)),
            Formula::Or(args) => args.iter().any(|a| a.eval(input)),
        }
    }

    /// Largest input index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Formula::Var(k) => Some(*k),
            Formula::Not(inner) => inner.max_var(),
            Formula::And(args) | Formula::Or(args) => args.iter().filter_map(Formula::max_var).max(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, args: &[Formula], sep: &str| {
            write!(f, "(")?;
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")
        };
        match self {
            Formula::Var(k) => write!(f, "v{k}"),
            Formula::Not(inner) => write!(f, "!{inner}"),
            Formula::And(args) => join(f, args, "&"),
            Formula::Or(args) => join(f, args, "|"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_max_sorted_linear_on_two_values() {
        assert_eq!(Aggregator::Sum.apply(&mut [2.0, 5.0]).unwrap(), 7.0);
        assert_eq!(Aggregator::Max.apply(&mut [2.0, 5.0]).unwrap(), 5.0);
        assert_eq!(Aggregator::Min.apply(&mut [2.0, 5.0]).unwrap(), 2.0);
        let top = Aggregator::SortedLinear(vec![1.0, 0.0]);
        assert_eq!(top.apply(&mut [2.0, 5.0]).unwrap(), 5.0);
        let second = Aggregator::SortedLinear(vec![0.0, 1.0]);
        assert_eq!(second.apply(&mut [2.0, 5.0]).unwrap(), 2.0);
    }

    #[test]
    fn formula_rejects_fractional_input() {
        let agg = Aggregator::BooleanFormula(Formula::Var(0));
        assert!(matches!(agg.apply(&mut [0.5]), Err(Error::Domain(_))));
        assert_eq!(agg.apply(&mut [1.0]).unwrap(), 1.0);
    }

    #[test]
    fn leading_terms_counts_through_last_nonzero() {
        assert_eq!(leading_terms(&[0.0, 0.0]), 0);
        assert_eq!(leading_terms(&[1.0, 0.0, 0.0]), 1);
        assert_eq!(leading_terms(&[0.0, 1.0, 0.0]), 2);
        assert_eq!(leading_terms(&[1.0, 1.0, 1.0]), 3);
    }

    #[test]
    fn formula_eval_and_display() {
        let f = Formula::And(vec![
            Formula::Or(vec![Formula::Var(0), Formula::Not(Box::new(Formula::Var(1)))]),
            Formula::Var(2),
        ]);
        assert!(f.eval(&|k| k != 1));
        assert!(!f.eval(&|k| k == 1));
        assert_eq!(f.max_var(), Some(2));
        assert_eq!(f.to_string(), "((v0 | !v1) & v2)");
    }
}
