//! Statistical comparison of algorithm result samples.
//!
//! The benchmark compares algorithms on each metric with a two-sided
//! Wilcoxon rank-sum test (does either algorithm tend to produce larger
//! values?) plus the Vargha-Delaney A12 effect size (how often does one
//! beat the other?), and relates metrics to each other with Spearman rank
//! correlation. All three are rank-based: array sizes and similarities are
//! not normally distributed, and ranks are robust to that.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

/// Two-sided threshold below which a rank-sum p-value is reported as a
/// statistically significant difference.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Sample sizes up to this combined total (with no ties) use the exact
/// rank-sum distribution instead of the normal approximation.
const EXACT_LIMIT: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("statistic needs non-empty samples")]
    EmptySample,
    #[error("rank correlation is undefined when a sample has constant ranks")]
    ConstantRanks,
}

/// Ranks `1..=n` with tied values sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end (0-based) hold ranks start+1..=end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Two-sided Wilcoxon rank-sum p-value for the hypothesis that the two
/// samples come from the same distribution.
///
/// Small tie-free samples (combined size <= 12) get the exact permutation
/// distribution of the rank sum; larger or tied samples get the normal
/// approximation with tie-corrected variance and a continuity correction.
/// When every observation is identical the statistic has zero variance and
/// the samples are indistinguishable, so the p-value is 1.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n1 = a.len();
    let n2 = b.len();
    let n = n1 + n2;
    let combined: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    let ranks = average_ranks(&combined);
    let rank_sum: f64 = ranks[..n1].iter().sum();

    let mut sorted = combined.clone();
    sorted.sort_by(f64::total_cmp);
    let has_ties = sorted.windows(2).any(|w| w[0] == w[1]);

    if !has_ties && n <= EXACT_LIMIT {
        // All ranks are integers here, so the rank sum is too.
        return Ok(exact_two_sided(n1, n, rank_sum as u64));
    }

    let mean = n1 as f64 * (n + 1) as f64 / 2.0;
    // Variance of the rank sum with the standard tie correction.
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        start = end;
    }
    let n_f = n as f64;
    let variance =
        (n1 as f64 * n2 as f64 / 12.0) * ((n_f + 1.0) - tie_term / (n_f * (n_f - 1.0)));
    if variance <= 0.0 {
        return Ok(1.0);
    }
    let z = ((rank_sum - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    Ok((2.0 * (1.0 - normal.cdf(z))).min(1.0))
}

/// Exact two-sided p-value: `min(1, 2 * min(P(W <= w), P(W >= w)))` where W
/// is the sum of `n1` ranks drawn uniformly without replacement from
/// `1..=n`.
fn exact_two_sided(n1: usize, n: usize, w: u64) -> f64 {
    let max_sum = (0..n1).map(|i| (n - i) as u64).sum::<u64>() as usize;
    // ways[k][s] = number of k-subsets of {1..=r} with rank sum s.
    let mut ways = vec![vec![0u64; max_sum + 1]; n1 + 1];
    ways[0][0] = 1;
    for r in 1..=n {
        for k in (1..=n1.min(r)).rev() {
            for s in (r..=max_sum).rev() {
                ways[k][s] += ways[k - 1][s - r];
            }
        }
    }
    let total: u64 = ways[n1].iter().sum();
    let lower: u64 = ways[n1][..=(w as usize).min(max_sum)].iter().sum();
    let upper: u64 = ways[n1][(w as usize).min(max_sum)..].iter().sum();
    let tail = lower.min(upper) as f64 / total as f64;
    (2.0 * tail).min(1.0)
}

/// Vargha-Delaney A12: the probability that a value drawn from the first
/// sample exceeds one drawn from the second, counting ties as half.
///
/// 0.5 means no effect; values above 0.5 favor the first sample. Swapping
/// the samples yields the exact complement: `a12(a, b) + a12(b, a) == 1`.
pub fn a12(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut wins = 0u64;
    let mut ties = 0u64;
    for &x in a {
        for &y in b {
            if x > y {
                wins += 1;
            } else if x == y {
                ties += 1;
            }
        }
    }
    let pairs = (a.len() * b.len()) as f64;
    Ok((wins as f64 + 0.5 * ties as f64) / pairs)
}

/// Spearman rank correlation: Pearson correlation of the average ranks.
///
/// Undefined (and an error) when either sample's ranks are constant, which
/// covers constant inputs and samples shorter than two.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    assert_eq!(x.len(), y.len(), "paired samples must have equal length");
    if x.is_empty() || y.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let mean = (x.len() + 1) as f64 / 2.0; // ranks always average to (n+1)/2
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for i in 0..x.len() {
        let dx = rx[i] - mean;
        let dy = ry[i] - mean;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(StatsError::ConstantRanks);
    }
    Ok(cov / (var_x * var_y).sqrt())
}
