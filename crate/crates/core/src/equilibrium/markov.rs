//! Stationary distributions of continuous-time chains given by rate matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest acceptable balance residual after rescaling rates to max 1.
pub const STATIONARY_RESIDUAL: f64 = 1e-9;

// rates below this fraction of the largest rate are dropped as round-off
const RELATIVE_RATE_FLOOR: f64 = 1e-14;

/// Probability vector `x` with `sum_i x_i r(i,j) = x_j sum_k r(j,k)` for all `j`.
///
/// The diagonal is ignored. When the chain has several closed communicating
/// classes, each class's own stationary vector is weighted by the class size;
/// transient states get zero. An all-zero matrix therefore maps to uniform.
pub fn stationary_distribution(rates: &[Vec<f64>]) -> Result<Vec<f64>> {
    let t = rates.len();
    if t == 0 {
        return Err(Error::Input("empty rate matrix".into()));
    }
    if rates.iter().any(|r| r.len() != t) {
        return Err(Error::Input("rate matrix is not square".into()));
    }
    if rates.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Input("rates must be finite and nonnegative".into()));
    }
    let scale = (0..t)
        .flat_map(|i| (0..t).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| rates[i][j])
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(vec![1.0 / t as f64; t]);
    }
    let rate = |i: usize, j: usize| {
        let r = rates[i][j] / scale;
        if i == j || r < RELATIVE_RATE_FLOOR {
            0.0
        } else {
            r
        }
    };

    let reach = reachability(t, &rate);
    let mut x = vec![0.0; t];
    let mut assigned = vec![false; t];
    let mut closed_states = 0usize;
    let mut classes = Vec::new();
    for i in 0..t {
        if assigned[i] {
            continue;
        }
        let class: Vec<usize> = (0..t).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &class {
            assigned[j] = true;
        }
        let closed = class.iter().all(|&a| (0..t).all(|b| !reach[a][b] || reach[b][a]));
        if closed {
            closed_states += class.len();
            classes.push(class);
        }
    }
    for class in &classes {
        let local = solve_class(class, &rate)?;
        let weight = class.len() as f64 / closed_states as f64;
        for (&state, v) in class.iter().zip(local) {
            x[state] = weight * v;
        }
    }

    let residual = balance_residual(rates, &x) / scale;
    if residual > STATIONARY_RESIDUAL {
        return Err(Error::Numerical(format!(
            "stationary residual {residual:e} above tolerance"
        )));
    }
    Ok(x)
}

/// `max_j |inflow_j - outflow_j|` for the given rates and distribution.
pub fn balance_residual(rates: &[Vec<f64>], x: &[f64]) -> f64 {
    let t = rates.len();
    (0..t)
        .map(|j| {
            let inflow: f64 = (0..t).filter(|&i| i != j).map(|i| x[i] * rates[i][j]).sum();
            let outflow: f64 = (0..t).filter(|&k| k != j).map(|k| rates[j][k]).sum::<f64>() * x[j];
            (inflow - outflow).abs()
        })
        .fold(0.0, f64::max)
}

/// `reach[i][j]`: `j` reachable from `i` (reflexive).
fn reachability(t: usize, rate: &impl Fn(usize, usize) -> f64) -> Vec<Vec<bool>> {
    (0..t)
        .map(|start| {
            let mut seen = vec![false; t];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for (j, reached) in seen.iter_mut().enumerate() {
                    if !*reached && rate(i, j) > 0.0 {
                        *reached = true;
                        stack.push(j);
                    }
                }
            }
            seen
        })
        .collect()
}

/// Stationary vector of an irreducible class: balance equations with one
/// replaced by normalization, solved by LU.
fn solve_class(class: &[usize], rate: &impl Fn(usize, usize) -> f64) -> Result<Vec<f64>> {
    let k = class.len();
    if k == 1 {
        return Ok(vec![1.0]);
    }
    // row j: sum_i x_i Q(i, j) = 0 with Q(j, j) = -outflow(j)
    let mut a = DMatrix::<f64>::zeros(k, k);
    for (jj, &j) in class.iter().enumerate() {
        for (ii, &i) in class.iter().enumerate() {
            if ii != jj {
                a[(jj, ii)] = rate(i, j);
            }
        }
        a[(jj, jj)] = -class.iter().map(|&l| rate(j, l)).sum::<f64>();
    }
    let mut b = DVector::<f64>::zeros(k);
    for c in 0..k {
        a[(k - 1, c)] = 1.0;
    }
    b[k - 1] = 1.0;
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("singular balance system".into()))?;
    Ok(sol.iter().map(|v| v.max(0.0)).collect())
}
