//! Dense simplex for simplex-constrained feasibility.
//!
//! Feasibility of `{d >= 0, sum d = 1, A d >= rhs}` is decided by the value of
//! the matrix game `M = A - rhs 1^T`, where the column player picks `d` to
//! maximize `min_r (M d)_r`. A nonnegative value comes with a feasible `d`; a
//! negative value comes with the row player's optimal `y`, a distribution over
//! rows with `max_k (y^T M)_k < 0`, which is a Farkas certificate.
//!
//! The game is solved through `min 1^T w  s.t.  M' w >= 1, w >= 0` for the
//! strictly positive `M' = M / scale + 2`. Its slack basis is dual feasible, so
//! the dual simplex runs without a phase 1. Rows leave and columns enter by
//! Bland's smallest-index rule; the final primal and dual values are recomputed
//! from the optimal basis by LU.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Entries smaller than this are treated as zero when pivoting.
pub const PIVOT_TOLERANCE: f64 = 1e-9;
/// A game value at or above `-FEASIBILITY_TOLERANCE` counts as feasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

// primal infeasibility below this (in scaled units) is round-off
const RHS_TOLERANCE: f64 = 1e-12;
const SHIFT: f64 = 2.0;

/// Size guard for the dense solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpLimits {
    pub max_rows: usize,
    pub max_cols: usize,
    pub max_pivots: usize,
}

impl Default for LpLimits {
    fn default() -> Self {
        Self {
            max_rows: 2_000,
            max_cols: 20_000,
            max_pivots: 200_000,
        }
    }
}

/// Optimal strategies of the zero-sum game where the column player maximizes
/// `y^T M d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution {
    /// `min_r (M d)_r` for the returned column strategy.
    pub value: f64,
    /// Maximizer's mixed strategy over columns.
    pub columns: Vec<f64>,
    /// Minimizer's mixed strategy over rows.
    pub rows: Vec<f64>,
}

impl MatrixGameSolution {
    /// `max_k (y^T M)_k` for the returned row strategy; equals `value` up to round-off.
    pub fn upper_bound(&self, matrix: &[Vec<f64>]) -> f64 {
        column_payoffs(matrix, &self.rows).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn column_payoffs<'a>(matrix: &'a [Vec<f64>], y: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    let cols = matrix.first().map_or(0, Vec::len);
    (0..cols).map(move |k| matrix.iter().zip(y).map(|(row, w)| w * row[k]).sum())
}

/// Nonnegative row weights proving `{d in simplex, A d >= rhs}` empty:
/// `max_k (y^T A)_k <= y^T rhs - gap` with `gap > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<f64>,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    Infeasible(FarkasCertificate),
}

fn check_dims(matrix: &[Vec<f64>], limits: &LpLimits) -> Result<usize> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(Error::Input("constraint matrix rows differ in length".into()));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("constraint matrix has non-finite entries".into()));
    }
    if rows > limits.max_rows || cols > limits.max_cols {
        return Err(Error::Resource(format!(
            "{rows}x{cols} system exceeds dense solver guard {}x{}",
            limits.max_rows, limits.max_cols
        )));
    }
    Ok(cols)
}

/// Find `d` in the simplex with `A d >= rhs`, or a certificate that none exists
/// (up to [`FEASIBILITY_TOLERANCE`]).
pub fn lp_feasibility(a: &[Vec<f64>], rhs: &[f64]) -> Result<Feasibility> {
    lp_feasibility_with(a, rhs, &LpLimits::default())
}

pub fn lp_feasibility_with(a: &[Vec<f64>], rhs: &[f64], limits: &LpLimits) -> Result<Feasibility> {
    if rhs.len() != a.len() {
        return Err(Error::Input(format!(
            "{} rows but {} right-hand sides",
            a.len(),
            rhs.len()
        )));
    }
    if a.is_empty() {
        return Ok(Feasibility::Feasible(vec![1.0]));
    }
    let shifted: Vec<Vec<f64>> = a
        .iter()
        .zip(rhs)
        .map(|(row, b)| row.iter().map(|v| v - b).collect())
        .collect();
    let sol = solve_matrix_game_with(&shifted, limits)?;
    if sol.value >= -FEASIBILITY_TOLERANCE {
        return Ok(Feasibility::Feasible(sol.columns));
    }
    let gap = -sol.upper_bound(&shifted);
    if gap <= FEASIBILITY_TOLERANCE {
        return Err(Error::Numerical(format!(
            "primal guarantee {:e} and dual bound {:e} disagree",
            sol.value, -gap
        )));
    }
    Ok(Feasibility::Infeasible(FarkasCertificate {
        multipliers: sol.rows,
        gap,
    }))
}

pub fn solve_matrix_game(matrix: &[Vec<f64>]) -> Result<MatrixGameSolution> {
    solve_matrix_game_with(matrix, &LpLimits::default())
}

/// Solve `max_d min_y y^T M d` over the two simplices.
pub fn solve_matrix_game_with(matrix: &[Vec<f64>], limits: &LpLimits) -> Result<MatrixGameSolution> {
    let cols = check_dims(matrix, limits)?;
    let rows = matrix.len();
    if rows == 0 || cols == 0 {
        return Err(Error::Input(format!(
            "matrix game needs rows and columns, got {rows}x{cols}"
        )));
    }
    let scale = matrix.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let (columns, row_strategy) = if scale == 0.0 {
        (unit(cols), unit(rows))
    } else {
        let shifted: Vec<Vec<f64>> = matrix
            .iter()
            .map(|r| r.iter().map(|v| v / scale + SHIFT).collect())
            .collect();
        let basis = dual_simplex(&shifted, limits.max_pivots)?;
        strategies_from_basis(&shifted, &basis)?
    };
    let value = matrix
        .iter()
        .map(|r| r.iter().zip(&columns).map(|(m, d)| m * d).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Ok(MatrixGameSolution {
        value,
        columns,
        rows: row_strategy,
    })
}

/// Optimal basis of `min 1^T w s.t. M' w - s = 1`, as variable indices
/// (`w_k` is `k`, `s_r` is `cols + r`).
///
/// Dual simplex from the slack basis. Pivots favor large entries; after
/// [`STALL_LIMIT`] pivots without objective change the choice switches to
/// Bland's rule until the objective moves again. The tableau is rebuilt from
/// the basis every [`REFACTOR_INTERVAL`] pivots and before optimality is
/// accepted; any dual infeasibility exposed by a rebuild is repaired with
/// primal pivots.
fn dual_simplex(shifted: &[Vec<f64>], max_pivots: usize) -> Result<Vec<usize>> {
    let rows = shifted.len();
    let cols = shifted[0].len();
    let vars = cols + rows;
    let mut t = Tableau::new(rows, vars);
    t.basis = (cols..vars).collect();
    rebuild(&mut t, shifted)?;
    let mut since_rebuild = 0;
    let mut last_objective = t.objective(cols);
    let mut stalled = 0;
    for _ in 0..max_pivots {
        if since_rebuild >= REFACTOR_INTERVAL {
            rebuild(&mut t, shifted)?;
            since_rebuild = 0;
        }
        let objective = t.objective(cols);
        if (objective - last_objective).abs() > 1e-12 * objective.abs().max(1.0) {
            stalled = 0;
        } else {
            stalled += 1;
        }
        last_objective = objective;
        let rule = if stalled >= STALL_LIMIT {
            Rule::Bland
        } else {
            Rule::Stable
        };

        let mut stuck = None;
        let mut infeasible: Vec<usize> = (0..rows).filter(|&r| t.rhs(r) < -RHS_TOLERANCE).collect();
        match rule {
            Rule::Bland => infeasible.sort_by_key(|&r| t.basis[r]),
            Rule::Stable => infeasible.sort_by(|&a, &b| t.rhs(a).total_cmp(&t.rhs(b))),
        }
        let step = infeasible.iter().find_map(|&pr| {
            let entering = dual_entering(&t, pr, vars, rule);
            if entering.is_none() {
                stuck.get_or_insert(pr);
            }
            entering.map(|pc| (pr, pc))
        });
        if let Some((pr, pc)) = step {
            t.pivot(pr, pc);
            since_rebuild += 1;
            continue;
        }
        // a negative row with no negative entry is round-off unless it survives a rebuild
        if let Some(pr) = stuck {
            if since_rebuild > 0 {
                rebuild(&mut t, shifted)?;
                since_rebuild = 0;
                continue;
            }
            if t.rhs(pr) < -FEASIBILITY_TOLERANCE {
                return Err(Error::Numerical(format!(
                    "row {pr} stays infeasible at {:e} with no entering column",
                    t.rhs(pr)
                )));
            }
        }
        // primal feasible; repair any remaining negative reduced cost
        let step = (0..vars)
            .filter(|&c| t.reduced_cost(c) < -PIVOT_TOLERANCE)
            .find_map(|c| t.leaving_row(c, rule).map(|r| (r, c)));
        if let Some((pr, pc)) = step {
            t.pivot(pr, pc);
            since_rebuild += 1;
            continue;
        }
        if since_rebuild == 0 {
            return Ok(t.basis);
        }
        rebuild(&mut t, shifted)?;
        since_rebuild = 0;
    }
    Err(Error::Numerical(format!(
        "simplex did not terminate within {max_pivots} pivots"
    )))
}

const REFACTOR_INTERVAL: usize = 50;
const STALL_LIMIT: usize = 30;
const RATIO_SLACK: f64 = 1e-9;
const TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    /// Harris-style: within a slack of the best ratio, the largest pivot.
    Stable,
    /// Smallest ratio, ties to the smallest index; cannot cycle.
    Bland,
}

/// Dual ratio test on row `pr`: which column enters.
fn dual_entering(t: &Tableau, pr: usize, vars: usize, rule: Rule) -> Option<usize> {
    let candidates = (0..vars).filter(|&c| t.get(pr, c) < -PIVOT_TOLERANCE);
    let ratio = |c: usize| t.reduced_cost(c).max(0.0) / -t.get(pr, c);
    match rule {
        Rule::Stable => {
            let bound = candidates
                .clone()
                .map(|c| (t.reduced_cost(c).max(0.0) + RATIO_SLACK) / -t.get(pr, c))
                .fold(f64::INFINITY, f64::min);
            candidates
                .filter(|&c| ratio(c) <= bound)
                .fold(None, |best: Option<usize>, c| match best {
                    Some(b) if -t.get(pr, b) >= -t.get(pr, c) => Some(b),
                    _ => Some(c),
                })
        }
        Rule::Bland => candidates
            .fold(None, |best: Option<(usize, f64)>, c| match best {
                Some((_, r)) if ratio(c) >= r - TIE => best,
                _ => Some((c, ratio(c))),
            })
            .map(|(c, _)| c),
    }
}

/// Basis matrix: columns of `[-M' | I]` for the basic variables.
fn basis_matrix(shifted: &[Vec<f64>], basis: &[usize]) -> DMatrix<f64> {
    let rows = shifted.len();
    let cols = shifted[0].len();
    DMatrix::from_fn(rows, rows, |r, k| {
        let var = basis[k];
        if var < cols {
            -shifted[r][var]
        } else if var - cols == r {
            1.0
        } else {
            0.0
        }
    })
}

/// Recompute every tableau entry as `B^-1 [A | b]` and the reduced costs.
fn rebuild(t: &mut Tableau, shifted: &[Vec<f64>]) -> Result<()> {
    let rows = shifted.len();
    let cols = shifted[0].len();
    let inv = basis_matrix(shifted, &t.basis)
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular basis".into()))?;
    let column = |c: usize, r: usize| -> f64 {
        if c < cols {
            -shifted[r][c]
        } else if c - cols == r {
            1.0
        } else {
            0.0
        }
    };
    let cost = |c: usize| if c < cols { 1.0 } else { 0.0 };
    for r in 0..rows {
        for c in 0..cols + rows {
            let v = if c < cols {
                (0..rows).map(|k| inv[(r, k)] * column(c, k)).sum()
            } else {
                inv[(r, c - cols)]
            };
            t.set(r, c, v);
        }
        t.set_rhs(r, -(0..rows).map(|k| inv[(r, k)]).sum::<f64>());
    }
    for c in 0..cols + rows {
        let rc = cost(c) - (0..rows).map(|r| cost(t.basis[r]) * t.get(r, c)).sum::<f64>();
        t.set(rows, c, rc);
    }
    Ok(())
}

/// Primal `d` and dual `y` recomputed from the basis matrix.
fn strategies_from_basis(shifted: &[Vec<f64>], basis: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = shifted.len();
    let cols = shifted[0].len();
    let b = basis_matrix(shifted, basis);
    let cost = DVector::from_iterator(rows, basis.iter().map(|&v| if v < cols { 1.0 } else { 0.0 }));
    let lu = b.clone().lu();
    let x = lu
        .solve(&DVector::from_element(rows, -1.0))
        .ok_or_else(|| Error::Numerical("singular optimal basis".into()))?;
    let pi = b
        .transpose()
        .lu()
        .solve(&cost)
        .ok_or_else(|| Error::Numerical("singular optimal basis".into()))?;
    let mut w = vec![0.0; cols];
    for (k, &var) in basis.iter().enumerate() {
        if var < cols {
            w[var] = x[k];
        }
    }
    // reduced cost of s_r is -pi_r
    let y: Vec<f64> = pi.iter().map(|v| -v).collect();
    Ok((normalize(w), normalize(y)))
}

fn unit(len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[0] = 1.0;
    v
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
    v
}

/// Row-major tableau; the last row holds reduced costs.
struct Tableau {
    m: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(m: usize, nvars: usize) -> Self {
        let width = nvars + 1;
        Self {
            m,
            width,
            data: vec![0.0; (m + 1) * width],
            basis: vec![0; m],
        }
    }

    fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.width + c] = v;
    }

    fn rhs(&self, r: usize) -> f64 {
        self.get(r, self.width - 1)
    }

    fn set_rhs(&mut self, r: usize, v: f64) {
        let w = self.width;
        self.set(r, w - 1, v);
    }

    fn reduced_cost(&self, c: usize) -> f64 {
        self.get(self.m, c)
    }

    /// Primal ratio test: which row leaves when column `pc` enters.
    fn leaving_row(&self, pc: usize, rule: Rule) -> Option<usize> {
        let candidates = (0..self.m).filter(|&r| self.get(r, pc) > PIVOT_TOLERANCE);
        let ratio = |r: usize| self.rhs(r).max(0.0) / self.get(r, pc);
        match rule {
            Rule::Stable => {
                let bound = candidates
                    .clone()
                    .map(|r| (self.rhs(r).max(0.0) + RATIO_SLACK) / self.get(r, pc))
                    .fold(f64::INFINITY, f64::min);
                candidates
                    .filter(|&r| ratio(r) <= bound)
                    .fold(None, |best: Option<usize>, r| match best {
                        Some(b) if self.get(b, pc) >= self.get(r, pc) => Some(b),
                        _ => Some(r),
                    })
            }
            Rule::Bland => candidates
                .fold(None, |best: Option<(usize, f64)>, r| match best {
                    Some((b, q)) if ratio(r) > q + TIE || (ratio(r) >= q - TIE && self.basis[b] < self.basis[r]) => {
                        best
                    }
                    _ => Some((r, ratio(r))),
                })
                .map(|(r, _)| r),
        }
    }

    /// `1^T w` at the current basic solution.
    fn objective(&self, cols: usize) -> f64 {
        (0..self.m).filter(|&r| self.basis[r] < cols).map(|r| self.rhs(r)).sum()
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.get(pr, pc);
        for c in 0..w {
            self.data[pr * w + c] *= inv;
        }
        self.data[pr * w + pc] = 1.0;
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[pc];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * p;
                }
                row[pc] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        self.basis[pr] = pc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_rows_gives_first_vertex() {
        assert_eq!(lp_feasibility(&[], &[]).unwrap(), Feasibility::Feasible(vec![1.0]));
    }

    #[test]
    fn single_difference_row() {
        let Feasibility::Feasible(d) = lp_feasibility(&[vec![1.0, -1.0]], &[0.0]).unwrap() else {
            panic!("expected feasible");
        };
        assert!((d[0] - 1.0).abs() < 1e-12 && d[1].abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_yield_certificate() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let Feasibility::Infeasible(cert) = lp_feasibility(&a, &[0.6, 0.6]).unwrap() else {
            panic!("expected infeasible");
        };
        assert!(cert.multipliers.iter().all(|&y| y >= 0.0));
        assert!((cert.gap - 0.1).abs() < 1e-12);
        assert!((cert.multipliers[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matching_pennies_value() {
        let sol = solve_matrix_game(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(sol.value.abs() < 1e-12);
        for p in sol.columns.iter().chain(&sol.rows) {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rock_paper_scissors_variant() {
        // asymmetric payoffs: both strategies must certify the same value
        let m = vec![vec![0.0, 2.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]];
        let sol = solve_matrix_game(&m).unwrap();
        let guarantee = m
            .iter()
            .map(|row| row.iter().zip(&sol.columns).map(|(a, d)| a * d).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let cap = (0..3)
            .map(|k| m.iter().zip(&sol.rows).map(|(row, y)| y * row[k]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((guarantee - sol.value).abs() < 1e-9);
        assert!((cap - sol.value).abs() < 1e-9);
    }

    #[test]
    fn guards_and_shapes() {
        let limits = LpLimits {
            max_rows: 1,
            ..Default::default()
        };
        let a = vec![vec![1.0], vec![1.0]];
        assert!(matches!(
            lp_feasibility_with(&a, &[0.0, 0.0], &limits),
            Err(Error::Resource(_))
        ));
        assert!(matches!(lp_feasibility(&a, &[0.0]), Err(Error::Input(_))));
        assert!(matches!(
            lp_feasibility(&[vec![1.0], vec![1.0, 2.0]], &[0.0, 0.0]),
            Err(Error::Input(_))
        ));
    }
}
