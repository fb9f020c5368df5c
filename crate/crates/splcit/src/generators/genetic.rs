//! Constructive genetic covering-array construction.
//!
//! The array grows one product at a time. For each new row a small
//! generational GA evolves candidate products; fitness is how many
//! still-uncovered t-sets a candidate covers. Binary tournament selection,
//! uniform crossover, and per-feature mutation produce children, each
//! repaired to validity; the best individual survives unchanged (elitism of
//! one). Should a whole evolution end with a best fitness of zero, a solver
//! witness for the first uncovered t-set keeps the construction moving, so
//! every appended row covers something new.

use fixedbitset::FixedBitSet;

use super::rng::SplitMix64;
use super::{Context, GeneticParams};
use crate::feature_model::FeatureSet;

struct Individual {
    genes: Vec<bool>,
    mask: FixedBitSet,
    fitness: usize,
}

pub(super) fn build(
    ctx: &Context<'_>,
    params: &GeneticParams,
    rng: &mut SplitMix64,
) -> Vec<FeatureSet> {
    let n = ctx.model.num_features();
    let universe_len = ctx.universe.len();
    let mutation_rate = params.mutation_rate.unwrap_or(1.0 / n as f64);
    let mut uncovered = FixedBitSet::with_capacity(universe_len);
    uncovered.insert_range(..);
    let mut remaining = universe_len;
    let mut rows = Vec::new();

    while remaining > 0 {
        let spawn = |fs: FeatureSet, uncovered: &FixedBitSet| {
            let mask = ctx.universe.coverage_mask(&fs);
            let fitness = mask.intersection_count(uncovered);
            Individual {
                genes: fs.to_bools(),
                mask,
                fitness,
            }
        };
        let mut population: Vec<Individual> = (0..params.population_size)
            .map(|_| spawn(ctx.random_product(rng), &uncovered))
            .collect();

        for _ in 0..params.generations_per_product {
            let elite = best_index(&population);
            let mut next = Vec::with_capacity(population.len());
            next.push(Individual {
                genes: population[elite].genes.clone(),
                mask: population[elite].mask.clone(),
                fitness: population[elite].fitness,
            });
            while next.len() < population.len() {
                let a = tournament(&population, rng);
                let b = tournament(&population, rng);
                let mut child: Vec<bool> = if rng.next_f64() < params.crossover_rate {
                    (0..n)
                        .map(|v| {
                            if rng.next_bool() {
                                population[a].genes[v]
                            } else {
                                population[b].genes[v]
                            }
                        })
                        .collect()
                } else {
                    population[a].genes.clone()
                };
                for gene in child.iter_mut() {
                    if rng.next_f64() < mutation_rate {
                        *gene = !*gene;
                    }
                }
                next.push(spawn(ctx.repair(&child), &uncovered));
            }
            population = next;
        }

        let best = &population[best_index(&population)];
        let product = if best.fitness > 0 {
            FeatureSet::from_bools(&best.genes)
        } else {
            let ordinal = uncovered.ones().next().expect("remaining > 0");
            ctx.product_covering(ctx.universe.get(ordinal))
        };
        let mask = ctx.universe.coverage_mask(&product);
        let newly = mask.intersection_count(&uncovered);
        debug_assert!(newly > 0);
        uncovered.difference_with(&mask);
        remaining -= newly;
        rows.push(product);
    }
    rows
}

fn best_index(population: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in population.iter().enumerate().skip(1) {
        if ind.fitness > population[best].fitness {
            best = i;
        }
    }
    best
}

/// Binary tournament: draw two (with replacement), keep the fitter; ties go
/// to the first draw.
fn tournament(population: &[Individual], rng: &mut SplitMix64) -> usize {
    let a = rng.next_below(population.len() as u64) as usize;
    let b = rng.next_below(population.len() as u64) as usize;
    if population[b].fitness > population[a].fitness {
        b
    } else {
        a
    }
}
