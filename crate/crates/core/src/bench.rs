//! Timing the fast expectation routes against brute-force enumeration.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::expectation::{brute_expectation_with_guard, expected_utility, ENUMERATION_GUARD};
use crate::game::{random_game, random_product_distribution, Aggregator, PolymatrixGame, ProductDistribution};

pub const CSV_HEADER: &str = "n,m,agg,fast_s,brute_s,abs_diff";

/// One grid cell: a random game with `n` players of `m` strategies each.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub n: usize,
    pub m: usize,
    pub aggregator: String,
    pub seed: u64,
    /// Seconds per fast evaluation of player 0's expected utility.
    pub fast_s: f64,
    /// Seconds per brute-force evaluation; `None` when the profile count exceeds the guard.
    pub brute_s: Option<f64>,
    pub abs_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    /// Sorted-linear coefficients are padded with zeros or trimmed to `n - 1`.
    pub aggregator: Aggregator,
    pub seeds: Vec<u64>,
    /// Largest profile count timed by brute force.
    pub brute_guard: u128,
    /// Fast timings repeat the call until a batch lasts at least this long.
    pub min_batch: Duration,
    pub batches: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            ns: vec![2, 3],
            ms: vec![2],
            aggregator: Aggregator::Max,
            seeds: vec![0],
            brute_guard: ENUMERATION_GUARD,
            min_batch: Duration::from_millis(20),
            batches: 5,
        }
    }
}

/// Adapts `aggregator` to an `n`-player game.
pub fn fit_aggregator(aggregator: &Aggregator, n: usize) -> Result<Aggregator> {
    match aggregator {
        Aggregator::SortedLinear(coeffs) => {
            let inputs = n.saturating_sub(1);
            if coeffs.iter().skip(inputs).any(|&c| c != 0.0) {
                return Err(Error::Input(format!(
                    "{} nonzero-tailed coefficients do not fit {n} players",
                    coeffs.len()
                )));
            }
            let mut fitted = coeffs.clone();
            fitted.resize(inputs, 0.0);
            Ok(Aggregator::SortedLinear(fitted))
        }
        Aggregator::BooleanFormula(_) => Err(Error::Input("boolean formula games have no fast path to time".into())),
        other => Ok(other.clone()),
    }
}

/// Per-call seconds of `f`: the fastest of several batches, each long enough
/// to swamp timer resolution.
pub fn time_per_call<T>(min_batch: Duration, batches: usize, mut f: impl FnMut() -> T) -> f64 {
    let reps = calibrate(min_batch, &mut f);
    (0..batches.max(1))
        .map(|_| time_batch(reps, &mut f))
        .fold(f64::INFINITY, f64::min)
}

// repetitions needed for one batch to last `min_batch`
fn calibrate<T>(min_batch: Duration, f: &mut impl FnMut() -> T) -> u32 {
    let start = Instant::now();
    std::hint::black_box(f());
    let once = start.elapsed();
    if once >= min_batch {
        return 1;
    }
    (min_batch.as_secs_f64() / once.as_secs_f64().max(1e-9)).ceil() as u32
}

fn time_batch<T>(reps: u32, f: &mut impl FnMut() -> T) -> f64 {
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(f());
    }
    start.elapsed().as_secs_f64() / f64::from(reps)
}

struct Cell {
    n: usize,
    m: usize,
    seed: u64,
    aggregator: Aggregator,
    game: PolymatrixGame,
    x: ProductDistribution,
    reps: u32,
    fast_s: f64,
}

/// Runs every `(n, m, seed)` cell; records come back in that order.
///
/// Timing batches go round-robin over the cells, so slow drift in machine
/// speed touches every cell alike.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let mut cells = Vec::new();
    for &n in &config.ns {
        let aggregator = fit_aggregator(&config.aggregator, n)?;
        for &m in &config.ms {
            for &seed in &config.seeds {
                let counts = vec![m; n];
                let game = random_game(&counts, 0.0, 1.0, aggregator.clone(), seed)?;
                let x = random_product_distribution(&counts, seed.wrapping_add(1));
                expected_utility(&game, 0, &x)?;
                let reps = calibrate(config.min_batch, &mut || expected_utility(&game, 0, &x));
                cells.push(Cell {
                    n,
                    m,
                    seed,
                    aggregator: aggregator.clone(),
                    game,
                    x,
                    reps,
                    fast_s: f64::INFINITY,
                });
            }
        }
    }
    for _ in 0..config.batches.max(1) {
        for cell in &mut cells {
            let (game, x) = (&cell.game, &cell.x);
            let t = time_batch(cell.reps, &mut || expected_utility(game, 0, x));
            cell.fast_s = cell.fast_s.min(t);
        }
    }
    cells.into_iter().map(|cell| finish(cell, config.brute_guard)).collect()
}

fn finish(cell: Cell, brute_guard: u128) -> Result<BenchRecord> {
    let fast = expected_utility(&cell.game, 0, &cell.x)?;
    let (brute_s, abs_diff) = if cell.game.profile_count() <= brute_guard {
        let start = Instant::now();
        let brute = brute_expectation_with_guard(&cell.game, 0, &cell.x, brute_guard)?;
        (Some(start.elapsed().as_secs_f64()), Some((fast - brute).abs()))
    } else {
        (None, None)
    };
    Ok(BenchRecord {
        n: cell.n,
        m: cell.m,
        aggregator: cell.aggregator.tag().to_string(),
        seed: cell.seed,
        fast_s: cell.fast_s,
        brute_s,
        abs_diff,
    })
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
    let mut out = format!("{CSV_HEADER}\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{},{}",
            r.n,
            r.m,
            r.aggregator,
            r.fast_s,
            opt(r.brute_s),
            opt(r.abs_diff)
        );
    }
    out
}

/// Growth of the fast timing when `n` doubles at fixed `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRatio {
    pub m: usize,
    pub n_from: usize,
    pub n_to: usize,
    pub ratio: f64,
}

/// Ratios of median fast times for every pair `(n, 2n)` present at the same `m`.
pub fn doubling_ratios(records: &[BenchRecord]) -> Vec<ScalingRatio> {
    let median = |n: usize, m: usize| {
        let mut times: Vec<f64> = records
            .iter()
            .filter(|r| r.n == n && r.m == m)
            .map(|r| r.fast_s)
            .collect();
        times.sort_by(f64::total_cmp);
        (!times.is_empty()).then(|| times[times.len() / 2])
    };
    let mut cells: Vec<(usize, usize)> = records.iter().map(|r| (r.m, r.n)).collect();
    cells.sort_unstable();
    cells.dedup();
    cells
        .iter()
        .filter_map(|&(m, n)| {
            let base = median(n, m)?;
            let doubled = median(2 * n, m)?;
            Some(ScalingRatio {
                m,
                n_from: n,
                n_to: 2 * n,
                ratio: doubled / base,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(ns: Vec<usize>, ms: Vec<usize>, aggregator: Aggregator) -> BenchConfig {
        BenchConfig {
            ns,
            ms,
            aggregator,
            seeds: vec![3, 4],
            min_batch: Duration::from_micros(200),
            batches: 1,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn small_grid_runs_both_paths() {
        let records = run_bench(&quick(vec![2, 3], vec![2], Aggregator::Max)).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(
            records.iter().map(|r| (r.n, r.seed)).collect::<Vec<_>>(),
            [(2, 3), (2, 4), (3, 3), (3, 4)]
        );
        for r in &records {
            assert!(r.fast_s >= 0.0 && r.brute_s.unwrap() >= 0.0);
            assert!(r.abs_diff.unwrap() <= 1e-9);
        }
    }

    #[test]
    fn brute_is_skipped_above_guard() {
        let mut config = quick(vec![12], vec![4], Aggregator::Min);
        config.seeds = vec![0];
        let records = run_bench(&config).unwrap();
        assert_eq!(records[0].brute_s, None);
        let csv = to_csv(&records);
        let line = csv.lines().nth(1).unwrap();
        assert!(line.starts_with("12,4,min,") && line.ends_with(",,"), "{line}");
    }

    #[test]
    fn sorted_linear_coefficients_are_fitted() {
        let agg = Aggregator::SortedLinear(vec![1.0, 0.5]);
        assert!(fit_aggregator(&agg, 2).is_err());
        assert_eq!(
            fit_aggregator(&agg, 4).unwrap(),
            Aggregator::SortedLinear(vec![1.0, 0.5, 0.0])
        );
        let records = run_bench(&quick(vec![3, 4], vec![3], agg)).unwrap();
        assert!(records.iter().all(|r| r.abs_diff.unwrap() <= 1e-9));
    }

    #[test]
    fn csv_layout() {
        let r = BenchRecord {
            n: 2,
            m: 3,
            aggregator: "max".into(),
            seed: 0,
            fast_s: 0.5,
            brute_s: None,
            abs_diff: None,
        };
        assert_eq!(to_csv(&[r]), "n,m,agg,fast_s,brute_s,abs_diff\n2,3,max,5e-1,,\n");
    }

    #[test]
    fn ratios_pair_doubled_n() {
        let rec = |n, fast_s| BenchRecord {
            n,
            m: 5,
            aggregator: "max".into(),
            seed: 0,
            fast_s,
            brute_s: None,
            abs_diff: None,
        };
        let ratios = doubling_ratios(&[rec(10, 1.0), rec(20, 4.0), rec(30, 1.0), rec(40, 12.0)]);
        assert_eq!(
            ratios,
            vec![
                ScalingRatio {
                    m: 5,
                    n_from: 10,
                    n_to: 20,
                    ratio: 4.0
                },
                ScalingRatio {
                    m: 5,
                    n_from: 20,
                    n_to: 40,
                    ratio: 3.0
                },
            ]
        );
    }
}
