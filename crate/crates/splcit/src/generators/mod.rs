//! Covering-array generators.
//!
//! Three algorithms produce t-wise covering arrays for a feature model:
//!
//! * [`Algorithm::Greedy`] — set-cover style: repeatedly merge compatible
//!   uncovered t-sets into one partial configuration, complete it into a
//!   valid product, until nothing is uncovered.
//! * [`Algorithm::Annealing`] — simulated annealing inside a search over the
//!   array size: start from the greedy array as an upper bound, then probe
//!   smaller sizes, accepting worsening row rewrites with a cooling
//!   probability until all t-sets are covered or the budget runs out.
//! * [`Algorithm::Genetic`] — constructive genetic: evolve one product at a
//!   time with selection/crossover/mutation, fitness being the number of
//!   still-uncovered t-sets the product would cover.
//!
//! All three are deterministic functions of `(model, t, config)`: rerunning
//! with the same seed reproduces the array bit for bit. Generation time is
//! measured around the algorithm itself; model parsing and t-set universe
//! construction are excluded.

mod annealing;
mod genetic;
mod greedy;
pub mod rng;

use std::str::FromStr;
use std::time::Instant;

use serde::Deserialize;
use thiserror::Error;

use crate::feature_model::{CtcKind, FeatureModel, FeatureSet, GroupKind, Relation};
use crate::sat::{is_satisfiable, solve_with_preference, to_cnf, CnfFormula, Lit};
use crate::tset::{CoveringArray, TSet, TSetUniverse};
use rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Greedy,
    Annealing,
    Genetic,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Greedy, Algorithm::Annealing, Algorithm::Genetic];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Annealing => "annealing",
            Algorithm::Genetic => "genetic",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(Algorithm::Greedy),
            "annealing" => Ok(Algorithm::Annealing),
            "genetic" => Ok(Algorithm::Genetic),
            other => Err(format!(
                "unknown algorithm `{other}` (expected greedy, annealing, or genetic)"
            )),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreedyParams {
    /// How many uncovered t-sets to consider per row; `None` scans all.
    pub candidate_pool: Option<usize>,
}

impl Default for GreedyParams {
    fn default() -> Self {
        GreedyParams {
            candidate_pool: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealingParams {
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    pub moves_per_temperature: usize,
    pub min_temperature: f64,
    /// Attempts per probed array size before declaring it infeasible.
    pub max_restarts: usize,
}

impl Default for AnnealingParams {
    fn default() -> Self {
        AnnealingParams {
            initial_temperature: 1.0,
            cooling_factor: 0.97,
            moves_per_temperature: 500,
            min_temperature: 1e-3,
            max_restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneticParams {
    pub population_size: usize,
    pub crossover_rate: f64,
    /// Per-feature flip probability; `None` means `1 / num_features`.
    pub mutation_rate: Option<f64>,
    pub generations_per_product: usize,
}

impl Default for GeneticParams {
    fn default() -> Self {
        GeneticParams {
            population_size: 50,
            crossover_rate: 0.9,
            mutation_rate: None,
            generations_per_product: 100,
        }
    }
}

/// Seed plus per-algorithm parameters. The same config drives all three
/// algorithms so benchmark cells differ only in the algorithm itself.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub greedy: GreedyParams,
    pub annealing: AnnealingParams,
    pub genetic: GeneticParams,
}

impl GeneratorConfig {
    pub fn with_seed(seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            ..GeneratorConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(pool) = self.greedy.candidate_pool {
            if pool == 0 {
                return Err(invalid("greedy.candidate_pool", "must be at least 1"));
            }
        }
        let a = &self.annealing;
        if !(a.initial_temperature > 0.0) {
            return Err(invalid("annealing.initial_temperature", "must be positive"));
        }
        if !(a.cooling_factor > 0.0 && a.cooling_factor < 1.0) {
            return Err(invalid(
                "annealing.cooling_factor",
                "must be strictly between 0 and 1",
            ));
        }
        if a.moves_per_temperature == 0 {
            return Err(invalid("annealing.moves_per_temperature", "must be at least 1"));
        }
        if !(a.min_temperature > 0.0) {
            return Err(invalid("annealing.min_temperature", "must be positive"));
        }
        if a.max_restarts == 0 {
            return Err(invalid("annealing.max_restarts", "must be at least 1"));
        }
        let g = &self.genetic;
        if g.population_size < 2 {
            return Err(invalid("genetic.population_size", "must be at least 2"));
        }
        if !(0.0..=1.0).contains(&g.crossover_rate) {
            return Err(invalid("genetic.crossover_rate", "must be within [0, 1]"));
        }
        if let Some(m) = g.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return Err(invalid("genetic.mutation_rate", "must be within [0, 1]"));
            }
        }
        if g.generations_per_product == 0 {
            return Err(invalid("genetic.generations_per_product", "must be at least 1"));
        }
        Ok(())
    }
}

/// Shared per-run state: the model's CNF encoding and the t-set universe
/// (the coverage obligations).
pub(crate) struct Context<'m> {
    pub model: &'m FeatureModel,
    pub cnf: CnfFormula,
    pub universe: TSetUniverse,
    /// Every feature in each feature's subtree, itself included, so repair
    /// can ask "does removing this feature strand a constraint target?"
    /// without walking the tree per query.
    subtree: Vec<Vec<usize>>,
    /// Whether any valid product selects the feature. Flips onto dead
    /// features are doomed, and repair undoes them without a search.
    alive: Vec<bool>,
}

impl<'m> Context<'m> {
    fn new(model: &'m FeatureModel, t: usize) -> Context<'m> {
        debug_assert!(matches!(model.relation(0), Relation::Root));
        let n = model.num_features();
        let mut children = vec![Vec::new(); n];
        for i in 0..n {
            if let Some(p) = model.relation(i).parent() {
                children[p].push(i);
            }
        }
        let mut subtree = vec![Vec::new(); n];
        for f in 0..n {
            let mut stack = vec![f];
            while let Some(d) = stack.pop() {
                subtree[f].push(d);
                stack.extend_from_slice(&children[d]);
            }
        }
        let cnf = to_cnf(model);
        let alive = (0..n)
            .map(|f| is_satisfiable(&cnf, &[Lit::positive(f)]))
            .collect();
        Context {
            model,
            cnf,
            universe: TSetUniverse::enumerate(model, t),
            subtree,
            alive,
        }
    }

    /// Nearest valid product to a candidate assignment: keeps the candidate
    /// if it is already valid, otherwise massages it into validity with
    /// local rules, falling back to the solver (branching toward the
    /// candidate's polarities) for constraint tangles the rules cannot
    /// settle. Callers guarantee the model is not void (the universe is
    /// non-empty).
    pub fn repair(&self, candidate: &[bool]) -> FeatureSet {
        self.repair_hinted(candidate, None)
    }

    /// Like [`Context::repair`], biased to preserve the polarity the move
    /// just gave to `hint` (otherwise most single-feature flips would be
    /// repaired straight back).
    pub fn repair_hinted(&self, candidate: &[bool], hint: Option<usize>) -> FeatureSet {
        let fs = FeatureSet::from_bools(candidate);
        if self
            .model
            .validate_feature_set(&fs)
            .expect("candidate has the model's dimensions")
        {
            return fs;
        }
        if let Some(fs) = self.propagate_repair(candidate, hint) {
            return fs;
        }
        let solution = solve_with_preference(&self.cnf, &[], candidate)
            .expect("non-void models always admit a product");
        FeatureSet::from_bools(&solution)
    }

    /// Deselects a feature and excludes it for the rest of one repair. The
    /// removal first climbs past mandatory links (a selected parent would
    /// force a mandatory child straight back) and then clears the whole
    /// subtree under the climbed top, since nothing below a removed feature
    /// may stay selected. Returns `false` without touching anything when
    /// the exclusion is impossible: the feature is forced by the root, or
    /// its subtree contains the feature the current move pinned on.
    fn ban_subtree(
        &self,
        bits: &mut [bool],
        banned: &mut [bool],
        pinned: Option<usize>,
        mut f: usize,
    ) -> bool {
        while let Relation::Mandatory { parent } = self.model.relation(f) {
            if parent == 0 {
                return false;
            }
            f = parent;
        }
        if f == 0 {
            return false;
        }
        if let Some(h) = pinned {
            if self.subtree[f].contains(&h) {
                return false;
            }
        }
        for &d in &self.subtree[f] {
            bits[d] = false;
            banned[d] = true;
        }
        true
    }

    /// Repairs by applying the validity rules directly: select parents of
    /// selected features, mandatory children, required features, and one
    /// member per empty group; settle oversized xor groups and excluded
    /// pairs by removing whole subtrees. Every removal also bans its
    /// subtree for the rest of the repair, no rule re-selects a banned
    /// feature (a rule that needs one removes its own trigger instead), so
    /// the pass loop cannot oscillate: every pass that changes anything
    /// either selects or bans a feature it had not before. Returns `None`
    /// on a genuine conflict — say, a move pinned a feature whose
    /// constraints force it back out — leaving the decision to the solver.
    fn propagate_repair(&self, candidate: &[bool], hint: Option<usize>) -> Option<FeatureSet> {
        let model = self.model;
        let n = model.num_features();
        let mut bits = candidate.to_vec();
        let mut banned = vec![false; n];
        // The move's intent: a flip to selected is pinned (removals that
        // would sweep it away become conflicts); a flip to unselected is
        // banned so no rule re-selects it.
        let pinned = hint.filter(|&h| candidate[h]);
        let pinned_under =
            |f: usize| pinned.map_or(false, |h| self.subtree[f].contains(&h));
        // A doomed flip — selecting a dead feature, or deselecting one no
        // product lacks — can never be honored; the nearest valid
        // assignment simply puts the feature back the way it was.
        if let Some(h) = pinned {
            if !self.alive[h] {
                bits[h] = false;
                let fs = FeatureSet::from_bools(&bits);
                return model
                    .validate_feature_set(&fs)
                    .expect("dimensions match")
                    .then_some(fs);
            }
        }
        if let Some(h) = hint.filter(|&h| !candidate[h]) {
            if !self.ban_subtree(&mut bits, &mut banned, pinned, h) {
                bits[h] = true;
                let fs = FeatureSet::from_bools(&bits);
                return model
                    .validate_feature_set(&fs)
                    .expect("dimensions match")
                    .then_some(fs);
            }
        }
        // Features some selected feature requires, recomputed each pass and
        // used to steer group and exclusion choices away from removals that
        // a later rule would have to revert into a conflict.
        let mut needed = vec![false; n];
        let subtree_needed =
            |needed: &[bool], f: usize| self.subtree[f].iter().any(|&d| needed[d]);
        let max_passes = 2 * (n + model.groups().len() + model.constraints().len()) + 4;
        for _ in 0..max_passes {
            let mut changed = false;
            needed.iter_mut().for_each(|v| *v = false);
            for ctc in model.constraints() {
                if ctc.kind == CtcKind::Requires && bits[ctc.source] {
                    needed[ctc.target] = true;
                }
            }
            if !bits[0] {
                bits[0] = true; // the root is in every product, never banned
                changed = true;
            }
            for i in 0..n {
                if !bits[i] {
                    continue;
                }
                if let Some(p) = model.relation(i).parent() {
                    if bits[p] {
                        continue;
                    }
                    if banned[p] {
                        // Orphaned under a removed parent: it goes too.
                        if !self.ban_subtree(&mut bits, &mut banned, pinned, i) {
                            return None;
                        }
                    } else {
                        bits[p] = true;
                    }
                    changed = true;
                }
            }
            for i in 0..n {
                if let Relation::Mandatory { parent } = model.relation(i) {
                    if bits[parent] && !bits[i] {
                        if banned[i] {
                            // No product keeps a parent without its
                            // mandatory child: the parent goes too.
                            if !self.ban_subtree(&mut bits, &mut banned, pinned, parent) {
                                return None;
                            }
                        } else {
                            bits[i] = true;
                        }
                        changed = true;
                    }
                }
            }
            for group in model.groups() {
                if !bits[group.parent] {
                    continue;
                }
                let mut selected_count = 0usize;
                let mut first_selected = usize::MAX;
                for &m in &group.members {
                    if bits[m] {
                        selected_count += 1;
                        first_selected = first_selected.min(m);
                    }
                }
                if selected_count == 0 {
                    let pick = group
                        .members
                        .iter()
                        .copied()
                        .filter(|&m| !banned[m])
                        .find(|&m| subtree_needed(&needed, m))
                        .or_else(|| group.members.iter().copied().find(|&m| !banned[m]));
                    match pick {
                        Some(m) => bits[m] = true,
                        None => {
                            // Every member is excluded: the parent cannot
                            // satisfy the group and goes too.
                            if !self.ban_subtree(&mut bits, &mut banned, pinned, group.parent)
                            {
                                return None;
                            }
                        }
                    }
                    changed = true;
                } else if group.kind == GroupKind::Xor && selected_count >= 2 {
                    let keep = group
                        .members
                        .iter()
                        .copied()
                        .find(|&m| bits[m] && pinned_under(m))
                        .or_else(|| {
                            group
                                .members
                                .iter()
                                .copied()
                                .find(|&m| bits[m] && subtree_needed(&needed, m))
                        })
                        .unwrap_or(first_selected);
                    for i in 0..group.members.len() {
                        let m = group.members[i];
                        if m != keep && bits[m] {
                            if !self.ban_subtree(&mut bits, &mut banned, pinned, m) {
                                return None;
                            }
                            changed = true;
                        }
                    }
                }
            }
            for ctc in model.constraints() {
                match ctc.kind {
                    CtcKind::Requires => {
                        if !bits[ctc.source] {
                            continue;
                        }
                        if banned[ctc.target] {
                            // The requirement is unmeetable, so the
                            // requirer has to go instead.
                            if !self.ban_subtree(&mut bits, &mut banned, pinned, ctc.source)
                            {
                                return None;
                            }
                            changed = true;
                        } else if !bits[ctc.target] {
                            bits[ctc.target] = true;
                            changed = true;
                        }
                    }
                    CtcKind::Excludes => {
                        if bits[ctc.source] && bits[ctc.target] {
                            let protects = |f: usize| {
                                pinned_under(f)
                                    || subtree_needed(&needed, f)
                                    || matches!(
                                        model.relation(f),
                                        Relation::Mandatory { parent } if bits[parent]
                                    )
                            };
                            let (first, second) =
                                match (protects(ctc.source), protects(ctc.target)) {
                                    (true, false) => (ctc.target, ctc.source),
                                    (false, true) => (ctc.source, ctc.target),
                                    _ => (
                                        ctc.source.max(ctc.target),
                                        ctc.source.min(ctc.target),
                                    ),
                                };
                            if !self.ban_subtree(&mut bits, &mut banned, pinned, first)
                                && !self.ban_subtree(&mut bits, &mut banned, pinned, second)
                            {
                                return None;
                            }
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                let fs = FeatureSet::from_bools(&bits);
                return model
                    .validate_feature_set(&fs)
                    .expect("dimensions match")
                    .then_some(fs);
            }
        }
        None
    }

    /// Uniformly random polarity preferences, repaired into a valid product.
    pub fn random_product(&self, rng: &mut SplitMix64) -> FeatureSet {
        let candidate: Vec<bool> = (0..self.model.num_features())
            .map(|_| rng.next_bool())
            .collect();
        self.repair(&candidate)
    }

    /// The lexicographically least valid product covering the t-set.
    pub fn product_covering(&self, ts: &TSet) -> FeatureSet {
        let prefer = vec![false; self.model.num_features()];
        let solution = solve_with_preference(&self.cnf, &ts.literals(), &prefer)
            .expect("universe members are valid t-sets");
        FeatureSet::from_bools(&solution)
    }
}

/// Generates a t-wise covering array. Deterministic in `(model, t,
/// algorithm, config)`. Panics if the config fails [`GeneratorConfig::validate`]
/// or `t` is out of `1..=num_features`.
///
/// A void model (no valid products) has an empty t-set universe, so its
/// covering array is empty.
pub fn generate(
    model: &FeatureModel,
    t: usize,
    algorithm: Algorithm,
    cfg: &GeneratorConfig,
) -> CoveringArray {
    if let Err(e) = cfg.validate() {
        panic!("invalid generator configuration: {e}");
    }
    let ctx = Context::new(model, t);
    let start = Instant::now();
    let products = match algorithm {
        Algorithm::Greedy => greedy::build(&ctx, &cfg.greedy, &mut SplitMix64::new(cfg.seed)),
        Algorithm::Annealing => annealing::build(&ctx, cfg),
        Algorithm::Genetic => genetic::build(&ctx, &cfg.genetic, &mut SplitMix64::new(cfg.seed)),
    };
    let generation_ms = (start.elapsed().as_millis() as u64).max(1);
    CoveringArray::new(
        model.name(),
        t,
        algorithm.name(),
        cfg.seed,
        generation_ms,
        products,
    )
}

pub fn generate_greedy(model: &FeatureModel, t: usize, cfg: &GeneratorConfig) -> CoveringArray {
    generate(model, t, Algorithm::Greedy, cfg)
}

pub fn generate_annealing(model: &FeatureModel, t: usize, cfg: &GeneratorConfig) -> CoveringArray {
    generate(model, t, Algorithm::Annealing, cfg)
}

pub fn generate_genetic(model: &FeatureModel, t: usize, cfg: &GeneratorConfig) -> CoveringArray {
    generate(model, t, Algorithm::Genetic, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::tset::verify_covering_array;

    fn gpl() -> FeatureModel {
        FeatureModel::parse(corpus::GPL_FM).unwrap()
    }

    #[test]
    fn algorithm_names_round_trip() {
        for algo in Algorithm::ALL {
            assert_eq!(algo.name().parse::<Algorithm>(), Ok(algo));
        }
        assert!("newton".parse::<Algorithm>().is_err());
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        let mut cfg = GeneratorConfig::default();
        assert_eq!(cfg.validate(), Ok(()));
        cfg.annealing.cooling_factor = 1.0;
        assert!(cfg.validate().is_err());
        cfg = GeneratorConfig::default();
        cfg.genetic.crossover_rate = 1.5;
        assert!(cfg.validate().is_err());
        cfg = GeneratorConfig::default();
        cfg.genetic.mutation_rate = Some(-0.1);
        assert!(cfg.validate().is_err());
        cfg = GeneratorConfig::default();
        cfg.greedy.candidate_pool = Some(0);
        assert!(cfg.validate().is_err());
        cfg = GeneratorConfig::default();
        cfg.annealing.max_restarts = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn every_algorithm_yields_a_complete_valid_array() {
        let model = gpl();
        for algo in Algorithm::ALL {
            for seed in [1u64, 2] {
                let cfg = GeneratorConfig::with_seed(seed);
                let ca = generate(&model, 2, algo, &cfg);
                assert_eq!(ca.model_name(), "gpl");
                assert_eq!(ca.t(), 2);
                assert_eq!(ca.algorithm(), algo.name());
                assert_eq!(ca.seed(), seed);
                assert!(ca.generation_ms() >= 1);
                assert!(ca.size() > 0);
                let report = verify_covering_array(&model, &ca).unwrap();
                assert!(
                    report.is_complete(),
                    "{algo} seed {seed}: {} invalid rows, {} uncovered",
                    report.invalid_rows.len(),
                    report.uncovered.len()
                );
            }
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let model = gpl();
        for algo in Algorithm::ALL {
            let cfg = GeneratorConfig::with_seed(99);
            let a = generate(&model, 2, algo, &cfg);
            let b = generate(&model, 2, algo, &cfg);
            assert_eq!(a.products(), b.products(), "{algo}");
        }
    }

    #[test]
    fn annealing_never_exceeds_greedy_for_the_same_seed() {
        let model = gpl();
        for seed in 1..=5u64 {
            let cfg = GeneratorConfig::with_seed(seed);
            let greedy = generate_greedy(&model, 2, &cfg);
            let annealed = generate_annealing(&model, 2, &cfg);
            assert!(
                annealed.size() <= greedy.size(),
                "seed {seed}: annealing {} > greedy {}",
                annealed.size(),
                greedy.size()
            );
        }
    }

    #[test]
    fn trivial_models_get_minimal_arrays() {
        let root_only = FeatureModel::parse("model tiny\nroot R\n").unwrap();
        for algo in Algorithm::ALL {
            let ca = generate(&root_only, 1, algo, &GeneratorConfig::with_seed(3));
            assert_eq!(ca.size(), 1, "{algo}");
        }
        // Two alternatives: every pair polarity fits in two products.
        let xor2 = FeatureModel::parse("model m\nroot R\nxor R A B\n").unwrap();
        for algo in Algorithm::ALL {
            let ca = generate(&xor2, 2, algo, &GeneratorConfig::with_seed(3));
            assert_eq!(ca.size(), 2, "{algo}");
            assert!(verify_covering_array(&xor2, &ca).unwrap().is_complete());
        }
    }

    #[test]
    fn void_models_yield_empty_arrays() {
        let void = FeatureModel::parse("model v\nroot R\nmandatory A R\nexcludes A R\n").unwrap();
        for algo in Algorithm::ALL {
            let ca = generate(&void, 2, algo, &GeneratorConfig::with_seed(1));
            assert_eq!(ca.size(), 0, "{algo}");
            assert!(verify_covering_array(&void, &ca).unwrap().is_complete());
        }
    }

    #[test]
    #[should_panic(expected = "invalid generator configuration")]
    fn invalid_config_panics() {
        let mut cfg = GeneratorConfig::default();
        cfg.annealing.initial_temperature = -1.0;
        generate(&gpl(), 2, Algorithm::Greedy, &cfg);
    }
}

