//! Bundled models: the graph product line plus a deterministic synthetic
//! family.
//!
//! The graph product line (GPL) is the worked example used across the test
//! suite: 18 features, 73 products, 418 valid 2-sets. The synthetic family
//! generates models of configurable size from a seed, so the benchmark
//! corpus spans a range of feature counts without shipping a zoo of files.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::feature_model::{FeatureModel, FeatureSet};
use crate::generators::rng::SplitMix64;
use crate::sat::{count_products_capped, DEFAULT_PRODUCT_CAP};

/// Text of the bundled graph product line model.
pub const GPL_FM: &str = include_str!("../models/gpl.fm");

pub fn gpl() -> FeatureModel {
    FeatureModel::parse(GPL_FM).expect("bundled model parses")
}

/// An eight-product sample suite for the GPL model, used by the metrics
/// examples and tests. It is intentionally *not* a complete covering array:
/// 24 valid 2-sets remain uncovered.
pub fn sample_suite() -> Vec<FeatureSet> {
    const ROWS: [&str; 8] = [
        "GPL Driver GraphType Weight Algorithms Benchmark Undirected Prim",
        "GPL Driver GraphType Weight Search Algorithms Benchmark Undirected DFS CC Kruskal",
        "GPL Driver GraphType Search Algorithms Benchmark Directed DFS Num Cycle",
        "GPL Driver GraphType Weight Search Algorithms Benchmark Directed BFS Num Shortest",
        "GPL Driver GraphType Weight Search Algorithms Benchmark Directed DFS Num SCC Cycle Shortest",
        "GPL Driver GraphType Weight Search Algorithms Benchmark Undirected DFS Num CC Cycle Prim",
        "GPL Driver GraphType Weight Search Algorithms Benchmark Undirected BFS Num CC Kruskal",
        "GPL Driver GraphType Weight Search Algorithms Benchmark Undirected DFS Num CC Cycle",
    ];
    let model = gpl();
    ROWS.iter()
        .map(|row| {
            let indices: Vec<usize> = row
                .split_whitespace()
                .map(|name| {
                    model
                        .features()
                        .index_of(name)
                        .expect("sample rows use model features")
                })
                .collect();
            FeatureSet::from_selected(model.num_features(), indices).unwrap()
        })
        .collect()
}

/// Parameters of a synthetic model. The generated model is a deterministic
/// function of the whole struct; the same spec always yields the same model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub name: String,
    /// Total feature count including the root.
    pub features: usize,
    pub xor_groups: usize,
    pub or_groups: usize,
    /// Cross-tree constraints to attempt (~60% requires, 40% excludes).
    pub constraints: usize,
    pub seed: u64,
}

/// Generates a random-but-reproducible model: a feature tree seeded from the
/// spec, groups of two to four members, mandatory/optional singles, and
/// cross-tree constraints between tree-unrelated features. Seeds that
/// produce a void (or near-void) model are salted and retried, so the
/// result always has at least two products and enumerable size.
pub fn synthetic_model(spec: &SyntheticSpec) -> FeatureModel {
    assert!(spec.features >= 2, "synthetic models need at least two features");
    for attempt in 0..50 {
        let text = synthesize(spec, attempt);
        let model = FeatureModel::parse(&text).expect("synthesized text is well-formed");
        if let Ok(count) = count_products_capped(&model, DEFAULT_PRODUCT_CAP) {
            if count >= 2 {
                return model;
            }
        }
    }
    panic!(
        "spec `{}` produced no usable model in 50 attempts; relax its constraints",
        spec.name
    );
}

fn synthesize(spec: &SyntheticSpec, attempt: u64) -> String {
    let mut rng = SplitMix64::new(
        spec.seed
            .wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
    );
    let n = spec.features;
    let mut text = format!("model {}\nroot f0\n", spec.name);
    let mut parent_of: Vec<usize> = vec![usize::MAX; n];
    let mut declared = 1usize;
    let mut remaining = n - 1;

    for g in 0..spec.xor_groups + spec.or_groups {
        if remaining < 2 {
            break;
        }
        let keyword = if g < spec.xor_groups { "xor" } else { "or" };
        let max_size = remaining.min(4);
        let size = 2 + rng.next_below(max_size as u64 - 1) as usize;
        let parent = rng.next_below(declared as u64) as usize;
        text.push_str(&format!("{keyword} f{parent}"));
        for _ in 0..size {
            text.push_str(&format!(" f{declared}"));
            parent_of[declared] = parent;
            declared += 1;
        }
        text.push('\n');
        remaining -= size;
    }

    while remaining > 0 {
        let parent = rng.next_below(declared as u64) as usize;
        let keyword = if rng.next_f64() < 0.4 {
            "mandatory"
        } else {
            "optional"
        };
        text.push_str(&format!("{keyword} f{declared} f{parent}\n"));
        parent_of[declared] = parent;
        declared += 1;
        remaining -= 1;
    }

    let is_ancestor = |mut node: usize, candidate: usize| -> bool {
        while node != usize::MAX {
            if node == candidate {
                return true;
            }
            node = if node == 0 { usize::MAX } else { parent_of[node] };
        }
        false
    };
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut placed = 0;
    let mut budget = spec.constraints * 20;
    while placed < spec.constraints && budget > 0 {
        budget -= 1;
        let a = 1 + rng.next_below(n as u64 - 1) as usize;
        let b = 1 + rng.next_below(n as u64 - 1) as usize;
        if a == b || is_ancestor(a, b) || is_ancestor(b, a) {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if !used.insert(key) {
            continue;
        }
        let keyword = if rng.next_f64() < 0.6 {
            "requires"
        } else {
            "excludes"
        };
        text.push_str(&format!("{keyword} f{a} f{b}\n"));
        placed += 1;
    }
    text
}

/// Specs of the models shipped with the benchmark, spanning 6 to 27
/// features around the 18-feature GPL model.
pub fn bundled_specs() -> Vec<SyntheticSpec> {
    let spec = |name: &str, features, xor_groups, or_groups, constraints, seed| SyntheticSpec {
        name: name.to_string(),
        features,
        xor_groups,
        or_groups,
        constraints,
        seed,
    };
    vec![
        spec("synth_a", 6, 1, 0, 1, 11),
        spec("synth_b", 9, 1, 1, 2, 12),
        spec("synth_c", 12, 1, 1, 3, 13),
        spec("synth_d", 16, 2, 1, 4, 14),
        spec("synth_e", 22, 2, 2, 6, 15),
        spec("synth_f", 27, 3, 2, 8, 16),
    ]
}

/// The GPL model followed by the bundled synthetic models.
pub fn bundled_models() -> Vec<FeatureModel> {
    let mut models = vec![gpl()];
    models.extend(bundled_specs().iter().map(synthetic_model));
    models
}

/// Writes every bundled model into `dir` as `<name>.fm`, returning the
/// paths in corpus order.
pub fn write_bundled(dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for model in bundled_models() {
        let path = dir.join(format!("{}.fm", model.name()));
        let text = if model.name() == "gpl" {
            GPL_FM.to_string()
        } else {
            model.serialize()
        };
        fs::write(&path, text)?;
        paths.push(path);
    }
    Ok(paths)
}
