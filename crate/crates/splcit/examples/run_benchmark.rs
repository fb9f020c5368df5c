//! Runs a small benchmark grid in-process and prints the generated report:
//! per-cell means, pairwise significance tests, and rank correlations
//! between model size, suite size, runtime, and similarity.
//!
//!     cargo run --release --example run_benchmark

use splcit::bench::{run_benchmark, write_reports, BenchmarkConfig};
use splcit::corpus;

fn main() {
    // Three of the bundled models, all three algorithms, ten runs each.
    let models: Vec<_> = corpus::bundled_models()
        .into_iter()
        .filter(|m| ["gpl", "synth_a", "synth_d"].contains(&m.name()))
        .collect();
    let config = BenchmarkConfig { runs: 10, ..BenchmarkConfig::default() };

    let report = run_benchmark(models.clone(), &config).expect("config is valid");

    let dir = tempfile::tempdir().expect("temp dir");
    write_reports(&report, &models, dir.path()).expect("reports write");
    println!("report files:");
    let mut names: Vec<_> = std::fs::read_dir(dir.path())
        .expect("dir listing")
        .map(|e| e.expect("entry").file_name().into_string().expect("utf-8"))
        .collect();
    names.sort();
    for name in names {
        println!("  {name}");
    }

    println!();
    print!(
        "{}",
        std::fs::read_to_string(dir.path().join("summary.txt")).expect("summary exists")
    );
}
