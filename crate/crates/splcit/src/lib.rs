//! Combinatorial interaction testing for software product lines.
//!
//! A product line is described by a [feature model](feature_model::FeatureModel):
//! a tree of features with mandatory/optional edges, xor/or groups, and
//! cross-tree `requires`/`excludes` constraints. Each valid configuration of
//! the model is a product. Testing every product is usually impossible, so the
//! crate generates *t-wise covering arrays*: small sets of valid products that
//! exercise every valid combination of t features (selected or not).
//!
//! The pipeline, bottom to top:
//!
//! * [`feature_model`] — model text format, parsing, product validity,
//!   core/variant/dead classification.
//! * [`sat`] — CNF encoding of a model and a small exhaustive solver used for
//!   satisfiability queries, lexicographic product enumeration, and
//!   preference-directed completion of partial configurations.
//! * [`tset`] — t-sets (partial configurations of exactly t features), the
//!   universe of valid t-sets, coverage bookkeeping, and the covering-array
//!   file format.
//! * [`generators`] — three covering-array generators (greedy set-cover,
//!   simulated annealing, constructive genetic) behind one seeded,
//!   reproducible interface.
//! * [`metrics`] — suite size, configuration similarity, and tuple-frequency
//!   metrics for comparing generated arrays.
//! * [`stats`] — Wilcoxon rank-sum, Vargha-Delaney A12, and Spearman rank
//!   correlation for comparing generators across repeated runs.
//! * [`bench`] — the benchmark driver: runs every generator on a corpus of
//!   models, collects metrics, and emits CSV/plain-text reports.
//! * [`corpus`] — the bundled graph product line model plus a deterministic
//!   family of synthetic models.

pub mod bench;
pub mod corpus;
pub mod feature_model;
pub mod generators;
pub mod metrics;
pub mod sat;
pub mod stats;
pub mod tset;
