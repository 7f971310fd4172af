//! 3-SAT as an expectation question.
//!
//! A CNF formula over `V` variables becomes a `V + 1` player game with a
//! boolean-formula aggregator. Player 0 has one strategy and each other player
//! `q` picks a truth value for variable `q - 1`; the pairwise payoff `U_0q(0, j)`
//! is `j`, so player 0's utility is the formula evaluated on the assignment.
//! Under uniform play its expected utility is `#satisfying / 2^V`, and the
//! formula is satisfiable exactly when that is positive.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expectation::brute_expectation_with_guard;
use crate::game::{Aggregator, Formula, PayoffMatrix, PolymatrixGame, ProductDistribution};

/// Default largest variable count [`decide_sat_via_expectation`] will enumerate.
pub const SAT_GUARD: usize = 24;

/// A variable (0-based) or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, negated: true }
    }

    /// DIMACS integer: `k` for variable `k - 1`, `-k` for its negation.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        let var = usize::try_from(value.unsigned_abs()).ok()?.checked_sub(1)?;
        Some(Self {
            var,
            negated: value < 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let k = self.var as i64 + 1;
        if self.negated {
            -k
        } else {
            k
        }
    }

    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var] != self.negated
    }
}

/// Conjunction of clauses with one to three literals each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::Input("formula needs at least one variable".into()));
        }
        for (k, clause) in clauses.iter().enumerate() {
            if clause.is_empty() || clause.len() > 3 {
                return Err(Error::Input(format!(
                    "clause {k} has {} literals, expected 1 to 3",
                    clause.len()
                )));
            }
            if let Some(lit) = clause.iter().find(|l| l.var >= num_vars) {
                return Err(Error::Input(format!(
                    "clause {k} uses variable {} but the formula has {num_vars}",
                    lit.var + 1
                )));
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    /// The formula as an aggregator AST; variable `v` reads opponent slot `v`.
    pub fn to_formula(&self) -> Formula {
        Formula::And(
            self.clauses
                .iter()
                .map(|c| {
                    Formula::Or(
                        c.iter()
                            .map(|l| match l.negated {
                                false => Formula::Var(l.var),
                                true => Formula::Not(Box::new(Formula::Var(l.var))),
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&format!("{} ", lit.to_dimacs()));
            }
            out.push_str("0\n");
        }
        out
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, clause) in self.clauses.iter().enumerate() {
            if k > 0 {
                write!(f, " & ")?;
            }
            write!(f, "(")?;
            for (m, lit) in clause.iter().enumerate() {
                if m > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "{}x{}", if lit.negated { "!" } else { "" }, lit.var + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Parses DIMACS CNF. Clauses may span lines; `c` lines are comments and a
/// `%` line ends the input.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut pending = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let at = || format!("line {}", k + 1);
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            let fields: Vec<_> = line.split_whitespace().collect();
            if header.is_some() {
                return Err(Error::parse(at(), "duplicate problem line"));
            }
            match fields.as_slice() {
                ["p", "cnf", v, c] => {
                    let v = v
                        .parse()
                        .map_err(|_| Error::parse(at(), format!("bad variable count `{v}`")))?;
                    let c = c
                        .parse()
                        .map_err(|_| Error::parse(at(), format!("bad clause count `{c}`")))?;
                    header = Some((v, c));
                }
                _ => return Err(Error::parse(at(), "expected `p cnf <vars> <clauses>`")),
            }
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(Error::parse(at(), "clause before the problem line"));
        };
        for token in line.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| Error::parse(at(), format!("bad literal `{token}`")))?;
            if value == 0 {
                if pending.is_empty() {
                    return Err(Error::parse(at(), "empty clause"));
                }
                clauses.push(std::mem::take(&mut pending));
                continue;
            }
            match Literal::from_dimacs(value) {
                Some(lit) if lit.var < num_vars => pending.push(lit),
                _ => return Err(Error::parse(at(), format!("literal {value} outside 1..={num_vars}"))),
            }
        }
    }
    let Some((num_vars, expected)) = header else {
        return Err(Error::parse("header", "missing `p cnf` line"));
    };
    if !pending.is_empty() {
        clauses.push(pending);
    }
    if clauses.len() != expected {
        return Err(Error::parse(
            "header",
            format!("declares {expected} clauses, found {}", clauses.len()),
        ));
    }
    CnfFormula::new(num_vars, clauses)
}

/// The game, distribution and player whose expected utility counts
/// satisfying assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub game: PolymatrixGame,
    pub distribution: ProductDistribution,
    pub player: usize,
}

pub fn reduce_3sat(f: &CnfFormula) -> Result<Reduction> {
    let v = f.num_vars();
    let n = v + 1;
    let mut counts = vec![2; n];
    counts[0] = 1;
    let mut matrices = Vec::with_capacity(n * (n - 1));
    for p in 0..n {
        for q in (0..n).filter(|&q| q != p) {
            let matrix = if p == 0 {
                PayoffMatrix::from_rows(vec![vec![0.0, 1.0]])?
            } else {
                PayoffMatrix::filled(counts[p], counts[q], 0.0)
            };
            matrices.push(((p, q), matrix));
        }
    }
    let game = PolymatrixGame::new(counts, matrices, Aggregator::BooleanFormula(f.to_formula()))?;
    let distribution = ProductDistribution::uniform(game.strategy_counts());
    Ok(Reduction {
        game,
        distribution,
        player: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatDecision {
    pub satisfiable: bool,
    /// Fraction of assignments that satisfy the formula.
    pub expectation: f64,
}

pub fn decide_sat_via_expectation(f: &CnfFormula) -> Result<SatDecision> {
    decide_sat_via_expectation_with(f, SAT_GUARD)
}

/// Decides satisfiability by enumerating the reduction's expectation.
pub fn decide_sat_via_expectation_with(f: &CnfFormula, max_vars: usize) -> Result<SatDecision> {
    if f.num_vars() > max_vars {
        return Err(Error::Resource(format!(
            "{} variables exceed the enumeration guard of {max_vars}",
            f.num_vars()
        )));
    }
    let r = reduce_3sat(f)?;
    let expectation = brute_expectation_with_guard(&r.game, r.player, &r.distribution, 1u128 << f.num_vars())?;
    Ok(SatDecision {
        satisfiable: expectation > 0.0,
        expectation,
    })
}

/// Random 3-CNF; each clause draws `min(3, V)` distinct variables and random signs.
pub fn random_3cnf(num_vars: usize, num_clauses: usize, seed: u64) -> Result<CnfFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = num_vars.min(3);
    let clauses = (0..num_clauses)
        .map(|_| {
            sample(&mut rng, num_vars, width)
                .into_iter()
                .map(|var| Literal {
                    var,
                    negated: rng.random_bool(0.5),
                })
                .collect()
        })
        .collect();
    CnfFormula::new(num_vars, clauses)
}
