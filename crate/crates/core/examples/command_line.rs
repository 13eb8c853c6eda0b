//! Drives the command-line front end in-process: generate a Pareto sample, fit it, and
//! print the resulting scaling exponent.
//!
//! cargo run --release --example command_line

use tailrisk::cli;

fn main() {
    let dir = std::env::temp_dir().join("tailrisk-command-line-example");
    let data = dir.join("pareto.csv");
    let data = data.to_str().unwrap();
    let out = dir.join("fit");
    let out = out.to_str().unwrap();

    let status = cli::run(["tailrisk", "generate", "--family", "pareto", "--xi", "2", "--count", "10000", "--seed", "7", "--output", data]);
    assert_eq!(status, 0);
    let status = cli::run(["tailrisk", "fit", "--input", data, "--out-dir", out, "--extrapolate", "20000"]);
    assert_eq!(status, 0);
    println!("outputs in {out}");
    cli::run(["tailrisk", "convert", "--mw", "9.1"]);
}
