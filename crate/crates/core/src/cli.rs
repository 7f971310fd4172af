//! The `polymatrix` command line.
//!
//! Exit status is 0 on success, 1 for a negative answer (not an equilibrium,
//! unsatisfiable, no convergence) and 2 for bad input or an exceeded guard.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{doubling_ratios, run_bench, to_csv, BenchConfig};
use crate::equilibrium::{solve_ce_explicit, solve_ce_mixture, verify_ce, JointDistribution};
use crate::error::{Error, Result};
use crate::expectation::{brute_expectation, expected_utility, ENUMERATION_GUARD};
use crate::format;
use crate::game::{
    evaluate_utility, monte_carlo_estimate, random_game, Aggregator, PolymatrixGame, ProductDistribution,
};
use crate::hardness::{decide_sat_via_expectation_with, parse_dimacs, SAT_GUARD};

#[derive(Debug, Parser)]
#[command(
    name = "polymatrix",
    version,
    about = "Expected utility and correlated equilibria for polymatrix games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random game file.
    Gen(GenArgs),
    /// Expected utility of one player.
    Expect(ExpectArgs),
    /// Compute a correlated equilibrium.
    Solve(SolveArgs),
    /// Check whether a distribution is a correlated equilibrium.
    Verify(VerifyArgs),
    /// Time fast against brute-force expectation over a grid of sizes.
    Bench(BenchArgs),
    /// Decide a DIMACS CNF formula through the expectation reduction.
    Sat(SatArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum AggKind {
    Sum,
    Max,
    Min,
    SortedLinear,
    BooleanFormula,
}

#[derive(Debug, Args)]
pub struct AggArgs {
    #[arg(long, value_enum, default_value = "max")]
    pub agg: AggKind,
    /// Sorted-linear coefficients, largest payoff first.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Vec<f64>,
    /// Boolean formula as a JSON AST, e.g. '{"op":"or","args":[{"var":0},{"var":1}]}'.
    #[arg(long)]
    pub formula: Option<String>,
}

impl AggArgs {
    fn aggregator(&self) -> Result<Aggregator> {
        let extra = |what: &str| Error::Input(format!("--{what} only applies to a matching --agg"));
        if !self.coeffs.is_empty() && self.agg != AggKind::SortedLinear {
            return Err(extra("coeffs"));
        }
        if self.formula.is_some() && self.agg != AggKind::BooleanFormula {
            return Err(extra("formula"));
        }
        Ok(match self.agg {
            AggKind::Sum => Aggregator::Sum,
            AggKind::Max => Aggregator::Max,
            AggKind::Min => Aggregator::Min,
            AggKind::SortedLinear if self.coeffs.is_empty() => {
                return Err(Error::Input("--agg sorted_linear needs --coeffs".into()))
            }
            AggKind::SortedLinear => Aggregator::SortedLinear(self.coeffs.clone()),
            AggKind::BooleanFormula => {
                let text = self
                    .formula
                    .as_deref()
                    .ok_or_else(|| Error::Input("--agg boolean_formula needs --formula".into()))?;
                Aggregator::BooleanFormula(format::decode_formula(text.as_bytes())?)
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of players.
    #[arg(long)]
    pub n: usize,
    /// Strategy count per player; defaults to `--m` for everyone.
    #[arg(long, value_delimiter = ',')]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[command(flatten)]
    pub agg: AggArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub low: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub high: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fast,
    Brute,
    Mc,
}

#[derive(Debug, Args)]
pub struct ExpectArgs {
    pub game: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub player: usize,
    /// Distribution file (marginals, mixture components or explicit atoms).
    #[arg(long, conflicts_with = "uniform", required_unless_present = "uniform")]
    pub dist: Option<PathBuf>,
    /// Every player mixes uniformly.
    #[arg(long)]
    pub uniform: bool,
    #[arg(long, value_enum, default_value = "fast")]
    pub method: Method,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Explicit,
    Mixture,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub game: PathBuf,
    #[arg(long, value_enum, default_value = "mixture")]
    pub backend: Backend,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 200)]
    pub max_rounds: usize,
    /// Output distribution file; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub game: PathBuf,
    pub dist: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Also write the full regret report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long = "n", value_delimiter = ',', default_values_t = [2, 3])]
    pub ns: Vec<usize>,
    #[arg(long = "m", value_delimiter = ',', default_values_t = [2])]
    pub ms: Vec<usize>,
    #[command(flatten)]
    pub agg: AggArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0])]
    pub seeds: Vec<u64>,
    /// Largest profile count timed by brute force.
    #[arg(long, default_value_t = ENUMERATION_GUARD)]
    pub brute_guard: u128,
    /// Minimum length of one timing batch, in milliseconds.
    #[arg(long, default_value_t = 20)]
    pub min_batch_ms: u64,
    /// CSV output file; standard output when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SatArgs {
    /// DIMACS CNF file.
    pub cnf: PathBuf,
    #[arg(long, default_value_t = SAT_GUARD)]
    pub max_vars: usize,
}

/// Formats like C's `%.12g`.
pub fn format_g12(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa.to_string()), exp.abs())
    } else {
        trim(format!("{:.*}", (DIGITS - 1 - exp) as usize, v))
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn read_game(path: &Path) -> Result<PolymatrixGame> {
    format::decode_game(&read(path)?)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Error::Input(format!("{}: {e}", path.display()))),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

/// Runs one command and returns its exit status; errors map to 2.
pub fn run(cli: Cli) -> ExitCode {
    let outcome = match cli.command {
        Command::Gen(args) => gen(args),
        Command::Expect(args) => expect(args),
        Command::Solve(args) => solve(args),
        Command::Verify(args) => verify(args),
        Command::Bench(args) => bench(args),
        Command::Sat(args) => sat(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn gen(args: GenArgs) -> Result<bool> {
    let counts = if args.counts.is_empty() {
        vec![args.m; args.n]
    } else {
        args.counts
    };
    if counts.len() != args.n {
        return Err(Error::Input(format!(
            "--n {} but {} counts given",
            args.n,
            counts.len()
        )));
    }
    let game = random_game(&counts, args.low, args.high, args.agg.aggregator()?, args.seed)?;
    write_output(args.out.as_deref(), &format::encode_game(&game))?;
    Ok(true)
}

fn expect(args: ExpectArgs) -> Result<bool> {
    let game = read_game(&args.game)?;
    let dist = match &args.dist {
        Some(path) => format::decode_distribution(&read(path)?)?,
        None => ProductDistribution::uniform(game.strategy_counts()).into(),
    };
    let value = match (&dist, args.method) {
        (JointDistribution::Mixture(m), Method::Mc) if m.len() == 1 => {
            let x = m.components().next().expect("one component").1;
            let est = monte_carlo_estimate(&game, args.player, x, args.samples, args.seed)?;
            eprintln!("standard error {}", format_g12(est.std_error));
            est.mean
        }
        (_, Method::Mc) => return Err(Error::Input("--method mc needs a product distribution".into())),
        (JointDistribution::Mixture(m), method) => {
            m.check_shape(&game)?;
            let mut total = 0.0;
            for (w, x) in m.components() {
                total += w * match method {
                    Method::Brute => brute_expectation(&game, args.player, x)?,
                    _ => expected_utility(&game, args.player, x)?,
                };
            }
            total
        }
        (JointDistribution::Explicit(d), _) => {
            d.check_shape(&game)?;
            let mut total = 0.0;
            for (s, prob) in d.atoms() {
                total += prob * evaluate_utility(&game, args.player, s)?;
            }
            total
        }
    };
    println!("{}", format_g12(value));
    Ok(true)
}

fn solve(args: SolveArgs) -> Result<bool> {
    let game = read_game(&args.game)?;
    let dist: JointDistribution = match args.backend {
        Backend::Explicit => solve_ce_explicit(&game)?.into(),
        Backend::Mixture => match solve_ce_mixture(&game, args.eps, args.max_rounds) {
            Ok(out) => {
                eprintln!(
                    "rounds {} generated {}{}",
                    out.rounds,
                    out.generated,
                    if out.used_fallback { " (explicit fallback)" } else { "" }
                );
                out.mixture.into()
            }
            Err(e @ Error::Convergence { .. }) => {
                eprintln!("{e}");
                return Ok(false);
            }
            Err(e) => return Err(e),
        },
    };
    let verdict = verify_ce(&game, &dist, args.eps)?;
    write_output(args.out.as_deref(), &format::encode_distribution(&dist))?;
    let support = match &dist {
        JointDistribution::Explicit(d) => d.len(),
        JointDistribution::Mixture(m) => m.len(),
    };
    eprintln!("components {support}");
    eprintln!("max_violation {}", format_g12(verdict.report.max_violation));
    Ok(verdict.is_ce)
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let game = read_game(&args.game)?;
    let dist = format::decode_distribution(&read(&args.dist)?)?;
    let verdict = verify_ce(&game, &dist, args.eps)?;
    if let Some(path) = &args.report {
        write_output(Some(path), &format::encode_report(&verdict.report))?;
    }
    println!("is_ce {}", verdict.is_ce);
    println!("max_violation {}", format_g12(verdict.report.max_violation));
    if !verdict.is_ce {
        if let Some(w) = verdict.report.witness {
            let g = verdict.report.get(w.p, w.i, w.j).unwrap_or(f64::NAN);
            println!("witness p={} i={} j={} g={}", w.p, w.i, w.j, format_g12(g));
        }
    }
    Ok(verdict.is_ce)
}

fn bench(args: BenchArgs) -> Result<bool> {
    let config = BenchConfig {
        ns: args.ns,
        ms: args.ms,
        aggregator: args.agg.aggregator()?,
        seeds: args.seeds,
        brute_guard: args.brute_guard,
        min_batch: Duration::from_millis(args.min_batch_ms),
        ..BenchConfig::default()
    };
    let records = run_bench(&config)?;
    write_output(args.csv.as_deref(), to_csv(&records).as_bytes())?;
    for r in doubling_ratios(&records) {
        eprintln!("m={} n {} -> {}: x{:.2}", r.m, r.n_from, r.n_to, r.ratio);
    }
    Ok(true)
}

fn sat(args: SatArgs) -> Result<bool> {
    let text =
        String::from_utf8(read(&args.cnf)?).map_err(|_| Error::parse(args.cnf.display().to_string(), "not UTF-8"))?;
    let f = parse_dimacs(&text)?;
    let decision = decide_sat_via_expectation_with(&f, args.max_vars)?;
    let verdict = if decision.satisfiable { "SAT" } else { "UNSAT" };
    println!("{verdict} {}", format_g12(decision.expectation));
    Ok(decision.satisfiable)
}
