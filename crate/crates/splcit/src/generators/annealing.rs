//! Simulated-annealing covering-array construction.
//!
//! The outer structure searches over the array *size*: the greedy
//! construction supplies a complete incumbent (and upper bound), a lower
//! bound comes from the widest t-set family of any feature tuple, and a
//! binary search between them probes each size with restarts of the inner
//! annealer. While probes keep succeeding, a final narrowing phase presses
//! on below the binary-search boundary with fresh restart budgets; the
//! upper bound only ever decreases. (When the search already ended on a
//! fresh failure at `incumbent - 1`, narrowing is skipped — retrying the
//! size that just exhausted a full restart budget is not worth another.)
//!
//! The inner annealer rewrites one row at a time: flip one feature, repair
//! the row to validity, and accept the rewrite if it covers at least as much
//! as before — or, with probability `exp(-delta / temperature)`, even if it
//! covers less. Energy is the number of still-uncovered t-sets; reaching
//! zero means the probed size is feasible.
//!
//! Because the greedy bootstrap consumes an identically-seeded random
//! stream, the result never has more rows than the greedy generator's array
//! for the same configuration; the annealing moves draw from a separate
//! stream.

use fixedbitset::FixedBitSet;

use super::rng::SplitMix64;
use super::{greedy, AnnealingParams, Context, GeneratorConfig};
use crate::feature_model::FeatureSet;

/// Decorrelates the annealing stream from the greedy bootstrap stream.
const MOVE_STREAM_SALT: u64 = 0x9E2B_5C71_AD46_D1B3;

pub(super) fn build(ctx: &Context<'_>, cfg: &GeneratorConfig) -> Vec<FeatureSet> {
    let mut incumbent = greedy::build(ctx, &cfg.greedy, &mut SplitMix64::new(cfg.seed));
    if ctx.universe.is_empty() {
        return incumbent;
    }
    let params = &cfg.annealing;
    let mut rng = SplitMix64::new(cfg.seed ^ MOVE_STREAM_SALT);
    let lower = lower_bound(ctx);

    let mut lo = lower;
    let mut last_failed_at = None;
    while lo < incumbent.len() {
        let probe = lo + (incumbent.len() - lo) / 2;
        match try_size(ctx, params, probe, &mut rng) {
            Some(rows) => incumbent = rows,
            None => {
                last_failed_at = Some(probe);
                lo = probe + 1;
            }
        }
    }
    while incumbent.len() > lower && last_failed_at != Some(incumbent.len() - 1) {
        match try_size(ctx, params, incumbent.len() - 1, &mut rng) {
            Some(rows) => incumbent = rows,
            None => break,
        }
    }
    incumbent
}

/// No array can be smaller than the number of valid polarity combinations
/// of its most constrained feature tuple: each row covers exactly one
/// combination per tuple.
fn lower_bound(ctx: &Context<'_>) -> usize {
    let mut best = 0;
    let mut current: Option<Vec<usize>> = None;
    let mut run = 0;
    for ts in ctx.universe.iter() {
        let mut tuple: Vec<usize> = ts
            .selected()
            .iter()
            .chain(ts.unselected().iter())
            .copied()
            .collect();
        tuple.sort_unstable();
        if current.as_ref() == Some(&tuple) {
            run += 1;
        } else {
            current = Some(tuple);
            run = 1;
        }
        best = best.max(run);
    }
    best.max(1)
}

fn try_size(
    ctx: &Context<'_>,
    params: &AnnealingParams,
    size: usize,
    rng: &mut SplitMix64,
) -> Option<Vec<FeatureSet>> {
    for _ in 0..params.max_restarts {
        if let Some(rows) = anneal_once(ctx, params, size, rng) {
            return Some(rows);
        }
    }
    None
}

fn anneal_once(
    ctx: &Context<'_>,
    params: &AnnealingParams,
    size: usize,
    rng: &mut SplitMix64,
) -> Option<Vec<FeatureSet>> {
    let n = ctx.model.num_features();
    let mut rows: Vec<FeatureSet> = (0..size).map(|_| ctx.random_product(rng)).collect();
    let mut masks: Vec<FixedBitSet> = rows.iter().map(|r| ctx.universe.coverage_mask(r)).collect();
    let mut cover_count = vec![0u32; ctx.universe.len()];
    for mask in &masks {
        for ts in mask.ones() {
            cover_count[ts] += 1;
        }
    }
    let mut energy = cover_count.iter().filter(|&&c| c == 0).count() as i64;
    if energy == 0 {
        return Some(rows);
    }

    // Reusable per-move buffers; the loop below allocates nothing big.
    let pairwise = ctx.universe.t() == 2;
    let mut candidate = vec![false; n];
    let mut changed: Vec<usize> = Vec::with_capacity(n);
    let mut edits: Vec<(usize, bool)> = Vec::new();
    let mut new_mask = FixedBitSet::with_capacity(ctx.universe.len());
    let mut temperature = params.initial_temperature;
    while temperature > params.min_temperature {
        for _ in 0..params.moves_per_temperature {
            let row = rng.next_below(size as u64) as usize;
            let feature = rng.next_below(n as u64) as usize;
            for (i, slot) in candidate.iter_mut().enumerate() {
                *slot = rows[row].is_selected(i);
            }
            candidate[feature] = !candidate[feature];
            let new_row = ctx.repair_hinted(&candidate, Some(feature));
            changed.clear();
            for i in 0..n {
                if new_row.is_selected(i) != rows[row].is_selected(i) {
                    changed.push(i);
                }
            }
            if changed.is_empty() {
                // The repair undid the flip; accepting would change
                // nothing, and rejection is impossible at delta = 0.
                continue;
            }

            let mut delta: i64 = 0;
            if pairwise {
                // Only pairs touching a changed feature can move between
                // the masks, so the edit list is the whole delta.
                ctx.universe
                    .pair_edits(&rows[row], &new_row, &changed, &mut edits);
                for &(ts, covered) in &edits {
                    if covered {
                        if cover_count[ts] == 0 {
                            delta -= 1; // newly covered
                        }
                    } else if cover_count[ts] == 1 {
                        delta += 1; // would become uncovered
                    }
                }
            } else {
                ctx.universe.coverage_mask_into(&new_row, &mut new_mask);
                for ts in masks[row].difference(&new_mask) {
                    if cover_count[ts] == 1 {
                        delta += 1; // would become uncovered
                    }
                }
                for ts in new_mask.difference(&masks[row]) {
                    if cover_count[ts] == 0 {
                        delta -= 1; // newly covered
                    }
                }
            }

            let accept =
                delta <= 0 || rng.next_f64() < (-(delta as f64) / temperature).exp();
            if !accept {
                continue;
            }
            if pairwise {
                let mask = &mut masks[row];
                for &(ts, covered) in &edits {
                    if covered {
                        cover_count[ts] += 1;
                        mask.insert(ts);
                    } else {
                        cover_count[ts] -= 1;
                        mask.remove(ts);
                    }
                }
            } else {
                for ts in masks[row].difference(&new_mask) {
                    cover_count[ts] -= 1;
                }
                for ts in new_mask.difference(&masks[row]) {
                    cover_count[ts] += 1;
                }
                std::mem::swap(&mut masks[row], &mut new_mask);
            }
            rows[row] = new_row;
            energy += delta;
            if energy == 0 {
                return Some(rows);
            }
        }
        temperature *= params.cooling_factor;
    }
    None
}
