//! Scores a generated test suite: pairwise similarity, mean tuple
//! frequency, and the frequency histogram that shows how evenly the suite
//! spreads its coverage.
//!
//!     cargo run --example suite_metrics

use splcit::corpus;
use splcit::generators::{generate, Algorithm, GeneratorConfig};
use splcit::metrics::{
    suite_metrics, test_suite_similarity, tuple_frequencies, METRICS_CSV_HEADER,
};
use splcit::sat::enumerate_products;
use splcit::tset::enumerate_valid_tsets;

fn main() {
    let model = corpus::gpl();
    let array = generate(&model, 2, Algorithm::Greedy, &GeneratorConfig::with_seed(7));

    let metrics = suite_metrics(&array, &model).expect("model is within the product cap");
    println!("suite of {} products for model {}:", metrics.size, model.name());
    println!("  similarity            {:.4}", metrics.similarity);
    println!("  mean tuple frequency  {:.4}", metrics.mean_tuple_frequency);
    println!("  histogram (frequency buckets 0.0..1.0, count of 2-sets each):");
    for (i, count) in metrics.histogram.iter().enumerate() {
        let bar = "#".repeat((*count as usize).div_ceil(4));
        println!("  [{:.1}, {:.1}) {count:>4} {bar}", i as f64 / 10.0, (i + 1) as f64 / 10.0);
    }

    // The same numbers come apart into reusable pieces.
    let products = enumerate_products(&model).expect("within the product cap");
    let classes = model.classify_features(&products).expect("non-void model");
    let universe = enumerate_valid_tsets(&model, 2);
    let sim = test_suite_similarity(array.products(), &classes).expect("non-empty suite");
    assert_eq!(sim, metrics.similarity);

    // A hand-written suite need not be a covering array; the frequency
    // vector shows exactly which interactions it misses.
    let handmade = corpus::sample_suite();
    let frequencies = tuple_frequencies(&universe, &handmade).expect("non-empty suite");
    let uncovered = frequencies.iter().filter(|&&f| f == 0.0).count();
    println!(
        "a hand-written {}-product suite misses {uncovered} of {} valid 2-sets",
        handmade.len(),
        universe.len()
    );

    println!("\nas CSV:");
    println!("{METRICS_CSV_HEADER}");
    println!(
        "{}",
        splcit::metrics::metrics_csv_row(array.model_name(), array.algorithm(), array.seed(), &metrics)
    );
}
