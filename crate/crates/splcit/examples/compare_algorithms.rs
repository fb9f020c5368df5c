//! Compares two generation algorithms over a batch of seeds with the
//! nonparametric tests the benchmark uses: Wilcoxon rank-sum for
//! significance and Vargha-Delaney A12 for effect size.
//!
//!     cargo run --release --example compare_algorithms

use splcit::corpus;
use splcit::generators::{generate, Algorithm, GeneratorConfig};
use splcit::stats::{a12, wilcoxon_rank_sum, SIGNIFICANCE_LEVEL};

fn main() {
    let model = corpus::gpl();
    let seeds = 0..15u64;

    let sizes = |algorithm: Algorithm| -> Vec<f64> {
        seeds
            .clone()
            .map(|seed| {
                generate(&model, 2, algorithm, &GeneratorConfig::with_seed(seed)).size() as f64
            })
            .collect()
    };
    let annealing = sizes(Algorithm::Annealing);
    let greedy = sizes(Algorithm::Greedy);

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    println!("annealing sizes: {annealing:?} (mean {:.2})", mean(&annealing));
    println!("greedy sizes:    {greedy:?} (mean {:.2})", mean(&greedy));

    let p = wilcoxon_rank_sum(&annealing, &greedy).expect("non-empty samples");
    let effect = a12(&annealing, &greedy).expect("non-empty samples");
    println!("wilcoxon rank-sum p = {p:.6}");
    println!("A12(annealing, greedy) = {effect:.4} (probability annealing yields the larger size)");
    if p < SIGNIFICANCE_LEVEL {
        let (smaller, larger) =
            if effect < 0.5 { ("annealing", "greedy") } else { ("greedy", "annealing") };
        println!("significant at {SIGNIFICANCE_LEVEL}: {smaller} builds smaller arrays than {larger}");
    } else {
        println!("no significant size difference at {SIGNIFICANCE_LEVEL}");
    }
}
