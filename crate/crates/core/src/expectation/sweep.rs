use std::cmp::Ordering;

/// One candidate for the maximum: opponent slot `opponent` playing `action`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepEntry {
    /// Opponent slot, `0..n-1`, in increasing player order.
    pub opponent: usize,
    pub action: usize,
    pub value: f64,
    pub prob: f64,
}

impl SweepEntry {
    /// Descending order on `(value, -opponent, -action)`: larger values first,
    /// ties go to the lower opponent slot, then the lower action.
    pub fn sweep_order(a: &Self, b: &Self) -> Ordering {
        b.value
            .total_cmp(&a.value)
            .then(a.opponent.cmp(&b.opponent))
            .then(a.action.cmp(&b.action))
    }
}

/// Running state of the sweep, exposed to observers after each processed entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepState {
    /// Per-opponent probability of drawing a key below the current threshold.
    pub residual: Vec<f64>,
    /// Key `(value, opponent, action)` of the entry just processed.
    pub threshold: Option<(f64, usize, usize)>,
}

/// Sort entries into sweep order. Entries for one opponent must carry a
/// marginal summing to 1.
pub fn sort_entries(entries: &mut [SweepEntry]) {
    entries.sort_unstable_by(SweepEntry::sweep_order);
}

/// `E[max_q u_q(s_q)]` for independent opponents, given every `(q, j)` entry.
///
/// Entries are processed once in descending key order. When `(q*, j)` is
/// reached, `residual[q]` is the probability that `q`'s draw ranks below it, so
/// `x_{q*}(j) * prod_{q != q*} residual[q]` is the probability that `(q*, j)`
/// is the maximum.
pub fn max_sweep(entries: Vec<SweepEntry>) -> f64 {
    max_sweep_observed(entries, |_| {})
}

/// [`max_sweep`], calling `observe` with the state after each entry.
pub fn max_sweep_observed(mut entries: Vec<SweepEntry>, mut observe: impl FnMut(&SweepState)) -> f64 {
    sort_entries(&mut entries);
    let opponents = entries.iter().map(|e| e.opponent + 1).max().unwrap_or(0);
    let mut state = SweepState {
        residual: vec![1.0; opponents],
        threshold: None,
    };
    let mut acc = 0.0;
    for e in &entries {
        if e.prob > 0.0 {
            let others: f64 = state
                .residual
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != e.opponent)
                .map(|(_, c)| c)
                .product();
            acc += e.value * e.prob * others;
            state.residual[e.opponent] -= e.prob;
        }
        state.threshold = Some((e.value, e.opponent, e.action));
        observe(&state);
    }
    acc
}

/// Reusable buffers for [`max_sweep_merged`].
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    keys: Vec<(u64, u32)>,
    starts: Vec<usize>,
    heads: Vec<usize>,
    head_ranks: Vec<u64>,
    residual: Vec<f64>,
}

// monotone decreasing map from f64 total order onto u64
fn descending_rank(v: f64) -> u64 {
    let bits = v.to_bits();
    let ascending = if bits >> 63 == 1 { !bits } else { bits | 1 << 63 };
    !ascending
}

/// [`max_sweep`] over entries listed by slot then action, one slot per
/// opponent. Each slot is sorted on its own and the sweep repeatedly takes the
/// best head, lowest slot first on ties.
pub(crate) fn max_sweep_merged(entries: &[SweepEntry], scratch: &mut Scratch, opponents: usize) -> f64 {
    let Scratch {
        keys,
        starts,
        heads,
        head_ranks,
        residual,
    } = scratch;
    keys.clear();
    keys.extend(
        entries
            .iter()
            .enumerate()
            .map(|(k, e)| (descending_rank(e.value), k as u32)),
    );
    starts.clear();
    starts.push(0);
    for q in 0..opponents {
        let mut end = starts[q];
        while end < entries.len() && entries[end].opponent == q {
            end += 1;
        }
        keys[starts[q]..end].sort_unstable();
        starts.push(end);
    }
    debug_assert_eq!(starts[opponents], entries.len());
    heads.clear();
    heads.extend_from_slice(&starts[..opponents]);
    // finite payoffs never rank u64::MAX, so it marks an exhausted slot
    head_ranks.clear();
    head_ranks.extend((0..opponents).map(|q| {
        if starts[q] < starts[q + 1] {
            keys[starts[q]].0
        } else {
            u64::MAX
        }
    }));
    residual.clear();
    residual.resize(opponents, 1.0);

    let mut acc = 0.0;
    for _ in 0..entries.len() {
        let (mut best, mut best_rank) = (0, head_ranks[0]);
        for (q, &r) in head_ranks.iter().enumerate().skip(1) {
            let lower = r < best_rank;
            best = if lower { q } else { best };
            best_rank = if lower { r } else { best_rank };
        }
        let h = heads[best];
        let e = &entries[keys[h].1 as usize];
        heads[best] = h + 1;
        head_ranks[best] = if h + 1 < starts[best + 1] {
            keys[h + 1].0
        } else {
            u64::MAX
        };
        if e.prob > 0.0 {
            let mut others = 1.0;
            for (q, c) in residual.iter().enumerate() {
                if q != best {
                    others *= c;
                }
            }
            acc += e.value * e.prob * others;
            residual[best] -= e.prob;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(opponent: usize, values: &[f64], probs: &[f64]) -> Vec<SweepEntry> {
        values
            .iter()
            .zip(probs)
            .enumerate()
            .map(|(action, (&value, &prob))| SweepEntry {
                opponent,
                action,
                value,
                prob,
            })
            .collect()
    }

    #[test]
    fn single_opponent_is_plain_expectation() {
        let e = row(0, &[3.0, -1.0, 2.0], &[0.2, 0.5, 0.3]);
        let expected = 0.2 * 3.0 - 0.5 + 0.3 * 2.0;
        assert!((max_sweep(e) - expected).abs() < 1e-15);
    }

    #[test]
    fn point_masses_give_max() {
        let mut e = row(0, &[1.0, 4.0], &[0.0, 1.0]);
        e.extend(row(1, &[7.0, 2.5], &[0.0, 1.0]));
        assert_eq!(max_sweep(e), 4.0);
    }

    #[test]
    fn two_fair_coins_give_three_quarters() {
        let mut e = row(0, &[0.0, 1.0], &[0.5, 0.5]);
        e.extend(row(1, &[0.0, 1.0], &[0.5, 0.5]));
        let mut trace = Vec::new();
        let v = max_sweep_observed(e, |s| trace.push(s.clone()));
        assert_eq!(v, 0.75);
        // the 1-valued entries first (slot 0 wins the tie), then the zeros
        let order: Vec<_> = trace.iter().map(|s| s.threshold.unwrap()).collect();
        assert_eq!(order, vec![(1.0, 0, 1), (1.0, 1, 1), (0.0, 0, 0), (0.0, 1, 0)]);
        assert_eq!(trace.last().unwrap().residual, vec![0.0, 0.0]);
    }

    #[test]
    fn order_breaks_ties_by_slot_then_action() {
        let a = SweepEntry {
            opponent: 0,
            action: 2,
            value: 1.0,
            prob: 0.1,
        };
        let b = SweepEntry {
            opponent: 1,
            action: 0,
            value: 1.0,
            prob: 0.1,
        };
        let c = SweepEntry {
            opponent: 0,
            action: 3,
            value: 1.0,
            prob: 0.1,
        };
        let d = SweepEntry {
            opponent: 0,
            action: 0,
            value: 2.0,
            prob: 0.1,
        };
        let mut v = vec![b, c, a, d];
        sort_entries(&mut v);
        assert_eq!(v, vec![d, a, c, b]);
    }

    #[test]
    fn merged_sweep_matches_global_sort() {
        let values = [1.0, -0.0, 0.0, 2.5, -3.0, 1.0, 0.0, f64::MIN_POSITIVE, -f64::MAX, 2.5];
        let entries: Vec<_> = (0..2)
            .flat_map(|opponent| {
                values.iter().enumerate().map(move |(action, &v)| SweepEntry {
                    opponent,
                    action,
                    value: if opponent == 1 { -v } else { v },
                    prob: 0.1,
                })
            })
            .collect();
        let mut ranked = entries.clone();
        ranked.sort_by_key(|e| (descending_rank(e.value), e.opponent, e.action));
        let mut sorted = entries.clone();
        sort_entries(&mut sorted);
        assert_eq!(ranked, sorted);
        let mut scratch = Scratch::default();
        assert_eq!(max_sweep_merged(&entries, &mut scratch, 2), max_sweep(entries.clone()));
        // uneven slots, including an empty marginal tail
        let uneven: Vec<_> = entries
            .iter()
            .filter(|e| e.opponent == 1 || e.action < 3)
            .copied()
            .collect();
        assert_eq!(max_sweep_merged(&uneven, &mut scratch, 2), max_sweep(uneven));
    }
}
