use std::io::Write;

use clap::Parser;
use tdual::cli::{execute, Args};

fn main() {
    let args = Args::parse();
    let outcome = execute(&args);
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.code);
}
