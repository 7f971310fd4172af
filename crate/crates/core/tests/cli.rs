use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

use polymatrix::equilibrium::MixtureDistribution;
use polymatrix::format::{decode_game, decode_mixture, encode_explicit, encode_game, encode_mixture};
use polymatrix::game::{
    random_game, random_product_distribution, Aggregator, ExplicitDistribution, PayoffMatrix, PolymatrixGame,
    StrategyProfile,
};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polymatrix"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, contents: impl AsRef<[u8]>) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn game_from_rows(counts: Vec<usize>, rows: impl Fn(usize, usize) -> Vec<Vec<f64>>, agg: Aggregator) -> PolymatrixGame {
    let n = counts.len();
    let mut mats = Vec::new();
    for p in 0..n {
        for q in (0..n).filter(|&q| q != p) {
            mats.push(((p, q), PayoffMatrix::from_rows(rows(p, q)).unwrap()));
        }
    }
    PolymatrixGame::new(counts, mats, agg).unwrap()
}

/// Three players under Max; every row against every opponent is (0, 1).
fn game_a() -> PolymatrixGame {
    game_from_rows(vec![2; 3], |_, _| vec![vec![0.0, 1.0]; 2], Aggregator::Max)
}

#[test]
fn gen_is_deterministic_and_readable() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&[
            "gen",
            "--n",
            "3",
            "--counts",
            "2,2,2",
            "--agg",
            "max",
            "--seed",
            "7",
            "-o",
            s(path),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let game = decode_game(&bytes).unwrap();
    assert_eq!(game.strategy_counts(), [2, 2, 2]);
    assert_eq!(game, random_game(&[2, 2, 2], 0.0, 1.0, Aggregator::Max, 7).unwrap());

    let out = run(&["gen", "--n", "3", "--agg", "sorted_linear", "--coeffs", "1,0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        decode_game(stdout(&out).as_bytes()).unwrap().aggregator(),
        &Aggregator::SortedLinear(vec![1.0, 0.0])
    );
}

#[test]
fn gen_rejects_bad_flags() {
    let out = run(&["gen", "--n", "3", "--agg", "sorted_linear", "--coeffs", "1,0,0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error:"), "{}", stderr(&out));
    assert_eq!(code(&run(&["gen", "--n", "3", "--counts", "2,2"])), 2);
    assert_eq!(code(&run(&["gen"])), 2);
    assert_eq!(code(&run(&["gen", "--n", "3", "--agg", "median"])), 2);
}

#[test]
fn expect_game_a() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "a.json", encode_game(&game_a()));
    for method in ["fast", "brute"] {
        let out = run(&["expect", s(&game), "--uniform", "--method", method]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert_eq!(stdout(&out), "0.75\n");
    }
    let out = run(&[
        "expect",
        s(&game),
        "--uniform",
        "--method",
        "mc",
        "--samples",
        "1000000",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let estimate: f64 = stdout(&out).trim().parse().unwrap();
    assert!((estimate - 0.75).abs() <= 0.005, "{estimate}");
}

#[test]
fn expect_prints_twelve_digits_for_a_product_file() {
    let dir = TempDir::new().unwrap();
    let g = random_game(&[3, 2, 4], -1.0, 1.0, Aggregator::Min, 2).unwrap();
    let x = random_product_distribution(&[3, 2, 4], 3);
    let game = write(&dir, "g.json", encode_game(&g));
    let dist = write(&dir, "x.json", polymatrix::format::encode_product(&x));
    let out = run(&["expect", s(&game), "--player", "2", "--dist", s(&dist)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let printed: f64 = stdout(&out).trim().parse().unwrap();
    let exact = polymatrix::expectation::brute_expectation(&g, 2, &x).unwrap();
    assert!((printed - exact).abs() <= 1e-11 * (1.0 + exact.abs()));
}

#[test]
fn expect_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let big = random_game(
        &[2; 30],
        0.0,
        1.0,
        Aggregator::SortedLinear([vec![1.0; 5], vec![0.0; 24]].concat()),
        0,
    )
    .unwrap();
    let game = write(&dir, "big.json", encode_game(&big));
    let out = run(&["expect", s(&game), "--uniform"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).starts_with("error:"));
    let out = run(&["expect", s(&game), "--uniform", "--method", "brute"]);
    assert_eq!(code(&out), 2);

    let broken = write(&dir, "broken.json", r#"{"n": 2, "strategy_counts": [1]}"#);
    assert_eq!(code(&run(&["expect", s(&broken), "--uniform"])), 2);
    assert_eq!(code(&run(&["expect", "/nonexistent/game.json", "--uniform"])), 2);
}

#[test]
fn solve_then_verify() {
    let dir = TempDir::new().unwrap();
    let g = random_game(&[2, 3, 2], -1.0, 1.0, Aggregator::Max, 11).unwrap();
    let game = write(&dir, "g.json", encode_game(&g));
    for backend in ["explicit", "mixture"] {
        let dist = dir.path().join(format!("{backend}.json"));
        let out = run(&["solve", s(&game), "--backend", backend, "-o", s(&dist)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stderr(&out).contains("components "));
        assert!(stderr(&out).contains("max_violation "));
        let out = run(&["verify", s(&game), s(&dist), "--eps", "1e-6"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stdout(&out).starts_with("is_ce true\n"));
    }
    let first = std::fs::read(dir.path().join("mixture.json")).unwrap();
    let out = run(&["solve", s(&game)]);
    assert_eq!(out.stdout, first);
}

#[test]
fn constant_game_needs_one_component() {
    let dir = TempDir::new().unwrap();
    let g = game_from_rows(
        vec![3, 2, 2],
        |p, q| vec![vec![1.5; [3, 2, 2][q]]; [3, 2, 2][p]],
        Aggregator::Max,
    );
    let game = write(&dir, "c.json", encode_game(&g));
    let out = run(&["solve", s(&game), "--backend", "mixture"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("components 1\n"), "{}", stderr(&out));
    assert_eq!(decode_mixture(&out.stdout).unwrap().len(), 1);
}

#[test]
fn solve_reports_nonconvergence_and_guards() {
    let dir = TempDir::new().unwrap();
    let g = random_game(&[3, 3, 3], -1.0, 1.0, Aggregator::Sum, 5).unwrap();
    let game = write(&dir, "g.json", encode_game(&g));
    let out = run(&["solve", s(&game), "--max-rounds", "0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("explicit fallback"));

    // too many profiles for the fallback
    let big = write(
        &dir,
        "big.json",
        encode_game(&random_game(&[4; 9], 0.0, 1.0, Aggregator::Max, 0).unwrap()),
    );
    let out = run(&["solve", s(&big), "--max-rounds", "1"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let out = run(&["solve", s(&big), "--backend", "explicit"]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&run(&["solve", s(&game), "--eps", "-1"])), 2);
}

#[test]
fn verify_finds_the_planted_deviation() {
    let dir = TempDir::new().unwrap();
    let g = game_from_rows(
        vec![2, 2],
        |p, _| {
            if p == 0 {
                vec![vec![0.0, 0.0], vec![1.0, 0.0]]
            } else {
                vec![vec![0.0; 2]; 2]
            }
        },
        Aggregator::Sum,
    );
    let d =
        ExplicitDistribution::new([(StrategyProfile(vec![0, 0]), 0.5), (StrategyProfile(vec![0, 1]), 0.5)]).unwrap();
    let game = write(&dir, "g.json", encode_game(&g));
    let dist = write(&dir, "d.json", encode_explicit(&d));
    let report = dir.path().join("report.json");
    let out = run(&["verify", s(&game), s(&dist), "--report", s(&report)]);
    assert_eq!(code(&out), 1);
    assert_eq!(
        stdout(&out),
        "is_ce false\nmax_violation 0.5\nwitness p=0 i=0 j=1 g=-0.5\n"
    );
    assert!(report.exists());

    let garbage = write(&dir, "x.json", "{\"marginals\": 3}");
    assert_eq!(code(&run(&["verify", s(&game), s(&garbage)])), 2);
}

#[test]
fn mixture_and_expansion_get_the_same_verdict() {
    let dir = TempDir::new().unwrap();
    for seed in 0..6 {
        let counts = [2, 3, 2];
        let g = random_game(&counts, -1.0, 1.0, Aggregator::Max, seed).unwrap();
        let m = MixtureDistribution::new(vec![
            (0.5, random_product_distribution(&counts, seed + 10)),
            (0.5, random_product_distribution(&counts, seed + 20)),
        ])
        .unwrap();
        let game = write(&dir, "g.json", encode_game(&g));
        let mix = write(&dir, "m.json", encode_mixture(&m));
        let full = write(&dir, "e.json", encode_explicit(&m.expand()));
        for eps in ["1e-6", "0.2"] {
            let a = run(&["verify", s(&game), s(&mix), "--eps", eps]);
            let b = run(&["verify", s(&game), s(&full), "--eps", eps]);
            assert_eq!(code(&a), code(&b));
            assert_eq!(stdout(&a).lines().next(), stdout(&b).lines().next());
        }
    }
}

#[test]
fn bench_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("b.csv");
    let out = run(&[
        "bench",
        "--n",
        "2,3",
        "--m",
        "2",
        "--min-batch-ms",
        "1",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,m,agg,fast_s,brute_s,abs_diff"));
    for line in lines {
        let diff: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(diff <= 1e-9, "{line}");
    }

    let out = run(&["bench", "--n", "50", "--m", "50", "--min-batch-ms", "1"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("50,50,max,") && stdout(&out).ends_with(",,\n"));
    assert_eq!(code(&run(&["bench", "--agg", "boolean_formula"])), 2);
}

#[test]
fn sat_verdicts() {
    let dir = TempDir::new().unwrap();
    let one = write(&dir, "one.cnf", "c x1\np cnf 1 1\n1 0\n");
    let out = run(&["sat", s(&one)]);
    assert_eq!((code(&out), stdout(&out)), (0, "SAT 0.5\n".to_string()));
    let contradiction = write(&dir, "no.cnf", "p cnf 1 2\n1 0\n-1 0\n");
    let out = run(&["sat", s(&contradiction)]);
    assert_eq!((code(&out), stdout(&out)), (1, "UNSAT 0\n".to_string()));

    let f = polymatrix::hardness::random_3cnf(8, 20, 3).unwrap();
    let models = (0..256usize)
        .filter(|b| f.is_satisfied_by(&(0..8).map(|k| b >> k & 1 == 1).collect::<Vec<_>>()))
        .count();
    let random = write(&dir, "r.cnf", f.to_dimacs());
    let out = run(&["sat", s(&random)]);
    assert_eq!(code(&out), if models > 0 { 0 } else { 1 });
    let printed: f64 = stdout(&out).split_whitespace().nth(1).unwrap().parse().unwrap();
    assert_eq!(printed * 256.0, models as f64);

    let wide = write(&dir, "wide.cnf", "p cnf 30 1\n1 2 30 0\n");
    assert_eq!(code(&run(&["sat", s(&wide)])), 2);
    assert_eq!(code(&run(&["sat", s(&wide), "--max-vars", "29"])), 2);
    let bad = write(&dir, "bad.cnf", "p cnf 2 1\n1 x 0\n");
    let out = run(&["sat", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}
