//! Sorted-linear aggregates with a bounded number of leading coefficients.
//!
//! The `K` largest opponent payoffs are a chain of `K` entries, strictly
//! descending in sweep order and from distinct opponents, with every other
//! opponent drawing below the last link. Enumerating chains costs
//! `O((nm)^K * n)`, which is polynomial only while `K` stays bounded.

use super::sweep::{sort_entries, SweepEntry};

/// Expected value of `sum_t coeffs[t] * (t-th largest payoff)` for
/// independent opponents. Only the first `leading` coefficients are used.
pub(crate) fn sorted_linear_expectation(mut entries: Vec<SweepEntry>, coeffs: &[f64], leading: usize) -> f64 {
    if leading == 0 {
        return 0.0;
    }
    sort_entries(&mut entries);
    let opponents = entries.iter().map(|e| e.opponent + 1).max().unwrap_or(0);
    if leading > opponents {
        return 0.0;
    }
    // below[pos * opponents + q]: mass of q's entries ranked after `pos`
    let mut below = vec![0.0; entries.len() * opponents];
    let mut running = vec![0.0; opponents];
    for (pos, e) in entries.iter().enumerate().rev() {
        below[pos * opponents..(pos + 1) * opponents].copy_from_slice(&running);
        running[e.opponent] += e.prob;
    }
    let mut search = ChainSearch {
        entries: &entries,
        coeffs: &coeffs[..leading],
        below: &below,
        opponents,
        used: vec![false; opponents],
        total: 0.0,
    };
    search.extend(0, 0, 1.0, 0.0);
    search.total
}

struct ChainSearch<'a> {
    entries: &'a [SweepEntry],
    coeffs: &'a [f64],
    below: &'a [f64],
    opponents: usize,
    used: Vec<bool>,
    total: f64,
}

impl ChainSearch<'_> {
    fn extend(&mut self, depth: usize, start: usize, weight: f64, value: f64) {
        for pos in start..self.entries.len() {
            let e = self.entries[pos];
            if e.prob == 0.0 || self.used[e.opponent] {
                continue;
            }
            let w = weight * e.prob;
            let v = value + self.coeffs[depth] * e.value;
            if depth + 1 == self.coeffs.len() {
                let row = &self.below[pos * self.opponents..(pos + 1) * self.opponents];
                let rest: f64 = row
                    .iter()
                    .zip(&self.used)
                    .enumerate()
                    .filter(|&(q, (_, &used))| !used && q != e.opponent)
                    .map(|(_, (b, _))| b)
                    .product();
                self.total += w * v * rest;
            } else {
                self.used[e.opponent] = true;
                self.extend(depth + 1, pos + 1, w, v);
                self.used[e.opponent] = false;
            }
        }
    }
}
