use clap::Parser;
use polymatrix::cli::{run, Cli};

fn main() -> std::process::ExitCode {
    run(Cli::parse())
}
