//! Greedy covering-array construction.
//!
//! Each row starts from one uncovered t-set and greedily absorbs further
//! uncovered t-sets, in a seed-shuffled order, whenever the merged partial
//! configuration stays satisfiable. The partial configuration is then
//! completed to its lexicographically least valid product. Every row covers
//! at least the t-set it started from, so the loop terminates after at most
//! one row per t-set (far fewer in practice).

use fixedbitset::FixedBitSet;

use super::rng::SplitMix64;
use super::{Context, GreedyParams};
use crate::feature_model::FeatureSet;
use crate::sat::{is_satisfiable, solve_with_preference, Lit};

pub(super) fn build(
    ctx: &Context<'_>,
    params: &GreedyParams,
    rng: &mut SplitMix64,
) -> Vec<FeatureSet> {
    let n = ctx.model.num_features();
    let universe_len = ctx.universe.len();
    let mut uncovered = FixedBitSet::with_capacity(universe_len);
    uncovered.insert_range(..);
    let mut rows = Vec::new();

    while uncovered.count_ones(..) > 0 {
        let mut order: Vec<usize> = uncovered.ones().collect();
        rng.shuffle(&mut order);
        if let Some(pool) = params.candidate_pool {
            order.truncate(pool.max(1));
        }

        // -1 unset, else the forced polarity. `assumptions` mirrors it.
        let mut partial: Vec<i8> = vec![-1; n];
        let mut assumptions: Vec<Lit> = Vec::new();
        for &ordinal in &order {
            let ts = ctx.universe.get(ordinal);
            let mut fresh = Vec::new();
            let mut compatible = true;
            for (&f, want) in ts
                .selected()
                .iter()
                .map(|f| (f, 1i8))
                .chain(ts.unselected().iter().map(|f| (f, 0i8)))
            {
                match partial[f] {
                    -1 => fresh.push((f, want)),
                    have if have == want => {}
                    _ => {
                        compatible = false;
                        break;
                    }
                }
            }
            if !compatible {
                continue;
            }
            if fresh.is_empty() {
                continue; // already implied by the partial configuration
            }
            let mut trial = assumptions.clone();
            trial.extend(fresh.iter().map(|&(f, want)| {
                if want == 1 {
                    Lit::positive(f)
                } else {
                    Lit::negative(f)
                }
            }));
            if is_satisfiable(&ctx.cnf, &trial) {
                for &(f, want) in &fresh {
                    partial[f] = want;
                }
                assumptions = trial;
            }
        }

        let prefer = vec![false; n];
        let solution = solve_with_preference(&ctx.cnf, &assumptions, &prefer)
            .expect("merged assumptions were checked satisfiable");
        let product = FeatureSet::from_bools(&solution);
        uncovered.difference_with(&ctx.universe.coverage_mask(&product));
        rows.push(product);
    }
    rows
}
