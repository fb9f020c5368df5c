//! Suite quality metrics.
//!
//! Three families of measurements over a suite of valid products:
//!
//! * **size** — the number of products; what the generators minimize.
//! * **similarity** — how alike the suite's products are on their *variant*
//!   features (core features are in every product and dead features in
//!   none, so neither can distinguish products). Pairwise similarity is the
//!   Jaccard index of the selected-variant sets; suite similarity averages
//!   it over all ordered pairs, diagonal included. Lower means a more
//!   diverse suite.
//! * **tuple frequency** — per valid t-set, the fraction of products
//!   covering it. The mean over the whole universe collapses to
//!   `C(|FL|, t) / |TS|` for any suite of valid products, because every
//!   valid product covers exactly one polarity combination of each feature
//!   tuple; the distribution (reported as a ten-bucket histogram) is what
//!   actually varies between generators.

use thiserror::Error;

use fixedbitset::FixedBitSet;

use crate::feature_model::{FeatureClasses, FeatureModel, FeatureSet};
use crate::sat::{enumerate_products, SolveError};
use crate::tset::{covers, CoveringArray, TSet, TSetUniverse};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("metric needs a non-empty suite")]
    EmptySuite,
    #[error("the model has no valid t-sets; metric not applicable")]
    NotApplicable,
    #[error("feature classification needs the product set: {0}")]
    Enumeration(#[from] SolveError),
}

pub fn test_suite_size(ca: &CoveringArray) -> usize {
    ca.size()
}

/// Variant features selected by the product, ascending.
pub fn variant_features(fs: &FeatureSet, classes: &FeatureClasses) -> Vec<usize> {
    fs.selected().filter(|&i| classes.is_variant(i)).collect()
}

/// Jaccard similarity of two products' selected-variant sets. Two products
/// with no variant features at all have nothing distinguishing them, and
/// score 0 by convention.
pub fn similarity(a: &FeatureSet, b: &FeatureSet, classes: &FeatureClasses) -> f64 {
    let mut intersection = 0usize;
    let mut union = 0usize;
    for i in 0..a.num_features() {
        if !classes.is_variant(i) {
            continue;
        }
        match (a.is_selected(i), b.is_selected(i)) {
            (true, true) => {
                intersection += 1;
                union += 1;
            }
            (true, false) | (false, true) => union += 1,
            (false, false) => {}
        }
    }
    if union == 0 {
        0.0
    } else {
        intersection as f64 / union as f64
    }
}

/// Mean pairwise similarity over all ordered product pairs, diagonal
/// included: `sum(Sim(i, j)) / len^2`.
pub fn test_suite_similarity(
    products: &[FeatureSet],
    classes: &FeatureClasses,
) -> Result<f64, MetricsError> {
    if products.is_empty() {
        return Err(MetricsError::EmptySuite);
    }
    let n = products[0].num_features();
    let variant_sets: Vec<FixedBitSet> = products
        .iter()
        .map(|fs| {
            let mut bits = FixedBitSet::with_capacity(n);
            for i in fs.selected().filter(|&i| classes.is_variant(i)) {
                bits.insert(i);
            }
            bits
        })
        .collect();
    let sizes: Vec<usize> = variant_sets.iter().map(|b| b.count_ones(..)).collect();
    let mut total = 0.0;
    for (i, a) in variant_sets.iter().enumerate() {
        for (j, b) in variant_sets.iter().enumerate() {
            let intersection = a.intersection_count(b);
            let union = sizes[i] + sizes[j] - intersection;
            if union > 0 {
                total += intersection as f64 / union as f64;
            }
        }
    }
    Ok(total / (products.len() * products.len()) as f64)
}

/// Fraction of products covering the t-set.
pub fn tuple_frequency(ts: &TSet, products: &[FeatureSet]) -> Result<f64, MetricsError> {
    if products.is_empty() {
        return Err(MetricsError::EmptySuite);
    }
    let count = products
        .iter()
        .filter(|fs| covers(fs, ts).expect("suite and t-set share the model"))
        .count();
    Ok(count as f64 / products.len() as f64)
}

/// Frequency of every universe t-set, in canonical universe order.
pub fn tuple_frequencies(
    universe: &TSetUniverse,
    products: &[FeatureSet],
) -> Result<Vec<f64>, MetricsError> {
    if products.is_empty() {
        return Err(MetricsError::EmptySuite);
    }
    let mut counts = vec![0u32; universe.len()];
    for fs in products {
        for ordinal in universe.coverage_mask(fs).ones() {
            counts[ordinal] += 1;
        }
    }
    let len = products.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / len).collect())
}

pub fn mean_tuple_frequency(
    universe: &TSetUniverse,
    products: &[FeatureSet],
) -> Result<f64, MetricsError> {
    if universe.is_empty() {
        return Err(MetricsError::NotApplicable);
    }
    let frequencies = tuple_frequencies(universe, products)?;
    Ok(frequencies.iter().sum::<f64>() / frequencies.len() as f64)
}

/// Ten equal-width buckets over `[0, 1]`; a frequency of exactly 1 lands in
/// the last bucket.
pub fn frequency_histogram(frequencies: &[f64]) -> [u32; 10] {
    let mut histogram = [0u32; 10];
    for &f in frequencies {
        let bucket = ((f * 10.0).floor() as usize).min(9);
        histogram[bucket] += 1;
    }
    histogram
}

/// Everything the benchmark records about one covering array.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteMetrics {
    pub size: usize,
    pub generation_ms: u64,
    pub similarity: f64,
    pub mean_tuple_frequency: f64,
    pub histogram: [u32; 10],
}

/// Computes all metrics with the model's product classification and t-set
/// universe already at hand (the benchmark reuses both across runs).
pub fn suite_metrics_with(
    ca: &CoveringArray,
    classes: &FeatureClasses,
    universe: &TSetUniverse,
) -> Result<SuiteMetrics, MetricsError> {
    if ca.products().is_empty() {
        return Err(MetricsError::EmptySuite);
    }
    if universe.is_empty() {
        return Err(MetricsError::NotApplicable);
    }
    let frequencies = tuple_frequencies(universe, ca.products())?;
    Ok(SuiteMetrics {
        size: ca.size(),
        generation_ms: ca.generation_ms(),
        similarity: test_suite_similarity(ca.products(), classes)?,
        mean_tuple_frequency: frequencies.iter().sum::<f64>() / frequencies.len() as f64,
        histogram: frequency_histogram(&frequencies),
    })
}

/// Convenience path for a single array: enumerates the model's products to
/// classify features, then computes all metrics.
pub fn suite_metrics(ca: &CoveringArray, model: &FeatureModel) -> Result<SuiteMetrics, MetricsError> {
    let products = enumerate_products(model)?;
    let classes = model
        .classify_features(&products)
        .expect("a suite exists, so the model cannot be void");
    let universe = TSetUniverse::enumerate(model, ca.t());
    suite_metrics_with(ca, &classes, &universe)
}

pub const METRICS_CSV_HEADER: &str =
    "model,algorithm,seed,size,generation_ms,similarity,mean_tuple_frequency,h0,h1,h2,h3,h4,h5,h6,h7,h8,h9";

/// One CSV row matching [`METRICS_CSV_HEADER`]. Floats use Rust's shortest
/// round-trip formatting, which is platform-independent.
pub fn metrics_csv_row(model: &str, algorithm: &str, seed: u64, m: &SuiteMetrics) -> String {
    let mut row = format!(
        "{},{},{},{},{},{},{}",
        model, algorithm, seed, m.size, m.generation_ms, m.similarity, m.mean_tuple_frequency
    );
    for bucket in m.histogram {
        row.push(',');
        row.push_str(&bucket.to_string());
    }
    row
}
