//! Benchmark orchestration: run every algorithm against every model over a
//! seed range, verify each array, and emit comparable reports.
//!
//! A benchmark is a grid of cells (model x algorithm); each cell runs
//! `runs` times with seeds `base_seed + run`. Runs execute in parallel but
//! every record, row, and file is ordered by (model, algorithm, run), so
//! the output is independent of worker count and scheduling. Because
//! generation is deterministic in the seed, everything except wall-clock
//! timing is reproducible byte for byte; timings are therefore kept out of
//! `runs.csv` and reported separately in `timings.csv`.

use std::fmt;
use std::fs;
use std::path::Path;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::corpus;
use crate::feature_model::{FeatureClasses, FeatureModel, ParseError};
use crate::generators::{
    generate, Algorithm, AnnealingParams, GeneratorConfig, GeneticParams, GreedyParams,
};
use crate::metrics::{suite_metrics_with, SuiteMetrics};
use crate::sat::{enumerate_products_capped, SolveError, DEFAULT_PRODUCT_CAP};
use crate::stats::{a12, spearman, wilcoxon_rank_sum, StatsError, SIGNIFICANCE_LEVEL};
use crate::tset::{CoveringArray, TSetUniverse};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse model {path}: {source}")]
    Model {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("model {model} has more than {cap} products; benchmark metrics need the full product set")]
    ProductCap { model: String, cap: usize },
    #[error("model {model} has no valid products; there is nothing to cover")]
    VoidModel { model: String },
    #[error("{model}/{algorithm} seed {seed} produced a defective array: {detail}")]
    Defect {
        model: String,
        algorithm: String,
        seed: u64,
        detail: String,
    },
}

/// Benchmark configuration, loadable from TOML. Every field has a default,
/// so an empty document is a valid config (bundled models, all algorithms,
/// 30 runs from seed 1).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Paths to `.fm` files; empty means the bundled model corpus.
    pub models: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    /// Interaction strength of the generated arrays.
    pub t: usize,
    /// Runs per (model, algorithm) cell.
    pub runs: usize,
    /// Run `r` of every cell uses seed `base_seed + r`.
    pub base_seed: u64,
    /// Worker threads; 0 uses every core. The worker count never changes
    /// results, only wall-clock time.
    pub workers: usize,
    pub greedy: GreedyParams,
    pub annealing: AnnealingParams,
    pub genetic: GeneticParams,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            models: Vec::new(),
            algorithms: Algorithm::ALL.to_vec(),
            t: 2,
            runs: 30,
            base_seed: 1,
            workers: 0,
            greedy: GreedyParams::default(),
            annealing: AnnealingParams::default(),
            genetic: GeneticParams::default(),
        }
    }
}

impl BenchmarkConfig {
    pub fn from_toml(text: &str) -> Result<BenchmarkConfig, BenchError> {
        let config: BenchmarkConfig =
            toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("algorithms must not be empty".into()));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(BenchError::Config(format!("algorithm {a} listed twice")));
            }
        }
        if self.t == 0 {
            return Err(BenchError::Config("t must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(BenchError::Config("runs must be at least 1".into()));
        }
        self.generator_config(0)
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))
    }

    /// Loads the configured models, or the bundled corpus when none are
    /// configured.
    pub fn load_models(&self) -> Result<Vec<FeatureModel>, BenchError> {
        if self.models.is_empty() {
            return Ok(corpus::bundled_models());
        }
        self.models
            .iter()
            .map(|path| {
                let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
                    path: path.clone(),
                    source,
                })?;
                FeatureModel::parse(&text).map_err(|source| BenchError::Model {
                    path: path.clone(),
                    source,
                })
            })
            .collect()
    }

    fn generator_config(&self, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            greedy: self.greedy.clone(),
            annealing: self.annealing.clone(),
            genetic: self.genetic.clone(),
        }
    }
}

/// How a product count request resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CountOutcome {
    Exact(u64),
    ExceedsCap { cap: usize },
}

impl fmt::Display for CountOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountOutcome::Exact(n) => write!(f, "{n}"),
            CountOutcome::ExceedsCap { cap } => write!(f, "> {cap}"),
        }
    }
}

/// Structural summary of one model: feature count, product count, valid
/// t-set universe size, and the core/variant/dead feature split.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelAnalysis {
    pub name: String,
    pub features: usize,
    pub t: usize,
    pub universe_size: usize,
    pub outcome: AnalysisOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisOutcome {
    Classified {
        products: u64,
        core: Vec<String>,
        variant: Vec<String>,
        dead: Vec<String>,
    },
    /// The model has no valid products at all.
    Void,
    /// Product enumeration stopped at the cap; classification needs the
    /// full product set and is skipped.
    ExceedsCap { cap: usize },
}

impl ModelAnalysis {
    pub fn products(&self) -> CountOutcome {
        match &self.outcome {
            AnalysisOutcome::Classified { products, .. } => CountOutcome::Exact(*products),
            AnalysisOutcome::Void => CountOutcome::Exact(0),
            AnalysisOutcome::ExceedsCap { cap } => CountOutcome::ExceedsCap { cap: *cap },
        }
    }
}

impl fmt::Display for ModelAnalysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "model {}: {} features, {} products, {} valid {}-sets",
            self.name,
            self.features,
            self.products(),
            self.universe_size,
            self.t
        )?;
        match &self.outcome {
            AnalysisOutcome::Classified {
                core,
                variant,
                dead,
                ..
            } => {
                for (label, names) in [("core", core), ("variant", variant), ("dead", dead)] {
                    write!(f, "  {} ({}):", label, names.len())?;
                    for name in names {
                        write!(f, " {name}")?;
                    }
                    writeln!(f)?;
                }
                Ok(())
            }
            AnalysisOutcome::Void => writeln!(f, "  void model: no valid products"),
            AnalysisOutcome::ExceedsCap { .. } => writeln!(
                f,
                "  feature classification skipped: the product set exceeds the cap"
            ),
        }
    }
}

/// Computes the structural summary of a model at strength `t`, enumerating
/// at most `cap` products.
pub fn analyze_model(model: &FeatureModel, t: usize, cap: usize) -> ModelAnalysis {
    let universe_size = if (1..=model.num_features()).contains(&t) {
        TSetUniverse::enumerate(model, t).len()
    } else {
        0
    };
    let outcome = match enumerate_products_capped(model, cap) {
        Err(SolveError::CapExceeded { cap }) => AnalysisOutcome::ExceedsCap { cap },
        Ok(products) if products.is_empty() => AnalysisOutcome::Void,
        Ok(products) => {
            let classes = model
                .classify_features(&products)
                .expect("products come from this model");
            let names = |indices: &[usize]| {
                indices
                    .iter()
                    .map(|&i| model.features().name(i).to_string())
                    .collect()
            };
            AnalysisOutcome::Classified {
                products: products.len() as u64,
                core: names(classes.core()),
                variant: names(classes.variant()),
                dead: names(classes.dead()),
            }
        }
    };
    ModelAnalysis {
        name: model.name().to_string(),
        features: model.num_features(),
        t,
        universe_size,
        outcome,
    }
}

/// One generation run: the array plus its metrics.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub model: String,
    pub algorithm: Algorithm,
    /// 0-based run index within the cell.
    pub run: usize,
    pub seed: u64,
    pub metrics: SuiteMetrics,
    pub array: CoveringArray,
}

/// Per-cell means over all runs.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub model: String,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub mean_size: f64,
    pub mean_generation_ms: f64,
    pub mean_similarity: f64,
}

/// The metrics algorithms are compared on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonMetric {
    Size,
    Performance,
    Similarity,
}

impl ComparisonMetric {
    pub const ALL: [ComparisonMetric; 3] = [
        ComparisonMetric::Size,
        ComparisonMetric::Performance,
        ComparisonMetric::Similarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComparisonMetric::Size => "size",
            ComparisonMetric::Performance => "performance",
            ComparisonMetric::Similarity => "similarity",
        }
    }

    fn of(self, m: &SuiteMetrics) -> f64 {
        match self {
            ComparisonMetric::Size => m.size as f64,
            ComparisonMetric::Performance => m.generation_ms as f64,
            ComparisonMetric::Similarity => m.similarity,
        }
    }
}

/// Rank-sum test plus effect size for one algorithm pair on one metric,
/// within one scope (a single model, or `all` pooling every model).
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseComparison {
    pub scope: String,
    pub metric: ComparisonMetric,
    pub algorithm_a: Algorithm,
    pub algorithm_b: Algorithm,
    pub p_value: f64,
    pub a12: f64,
    pub significant: bool,
}

pub const CORRELATION_AXES: [&str; 5] =
    ["products", "features", "size", "performance", "similarity"];

/// Spearman correlations between run observables; `None` marks undefined
/// entries (a constant axis, e.g. `features` in a single-model benchmark).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub values: [[Option<f64>; 5]; 5],
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub t: usize,
    pub runs_per_cell: usize,
    pub base_seed: u64,
    pub analyses: Vec<ModelAnalysis>,
    pub runs: Vec<RunRecord>,
    pub summaries: Vec<CellSummary>,
    pub pairwise: Vec<PairwiseComparison>,
    pub correlations: CorrelationMatrix,
}

struct ModelContext {
    model: FeatureModel,
    classes: FeatureClasses,
    universe: TSetUniverse,
    products: u64,
}

/// Runs the whole benchmark grid. Results are deterministic in the config
/// apart from `generation_ms` fields.
pub fn run_benchmark(
    models: Vec<FeatureModel>,
    config: &BenchmarkConfig,
) -> Result<BenchmarkReport, BenchError> {
    config.validate()?;
    if models.is_empty() {
        return Err(BenchError::Config("no models to benchmark".into()));
    }
    for (i, model) in models.iter().enumerate() {
        if models[..i].iter().any(|m| m.name() == model.name()) {
            return Err(BenchError::Config(format!(
                "model name {} appears twice",
                model.name()
            )));
        }
        if config.t > model.num_features() {
            return Err(BenchError::Config(format!(
                "t = {} exceeds the {} feature count {}",
                config.t,
                model.name(),
                model.num_features()
            )));
        }
    }

    let mut analyses = Vec::new();
    let mut contexts = Vec::new();
    for model in models {
        let products = enumerate_products_capped(&model, DEFAULT_PRODUCT_CAP).map_err(
            |SolveError::CapExceeded { cap }| BenchError::ProductCap {
                model: model.name().to_string(),
                cap,
            },
        )?;
        if products.is_empty() {
            return Err(BenchError::VoidModel {
                model: model.name().to_string(),
            });
        }
        let classes = model
            .classify_features(&products)
            .expect("the product set is non-empty and dimensioned by this model");
        let universe = TSetUniverse::enumerate(&model, config.t);
        analyses.push(analyze_model_with(&model, config.t, &universe, &products));
        contexts.push(ModelContext {
            model,
            classes,
            universe,
            products: products.len() as u64,
        });
    }

    let mut cells = Vec::new();
    for model_idx in 0..contexts.len() {
        for &algorithm in &config.algorithms {
            for run in 0..config.runs {
                cells.push((model_idx, algorithm, run));
            }
        }
    }

    let execute = || -> Vec<Result<RunRecord, BenchError>> {
        cells
            .par_iter()
            .map(|&(model_idx, algorithm, run)| {
                run_cell(&contexts[model_idx], algorithm, run, config)
            })
            .collect()
    };
    let results = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| BenchError::Config(format!("cannot build worker pool: {e}")))?
            .install(execute)
    } else {
        execute()
    };
    let runs: Vec<RunRecord> = results.into_iter().collect::<Result<_, _>>()?;

    let summaries = summarize_cells(&contexts, config, &runs);
    let pairwise = compare_pairwise(&contexts, config, &runs);
    let correlations = correlate(&contexts, &runs);

    Ok(BenchmarkReport {
        t: config.t,
        runs_per_cell: config.runs,
        base_seed: config.base_seed,
        analyses,
        runs,
        summaries,
        pairwise,
        correlations,
    })
}

/// Analysis variant that reuses the universe and products the benchmark
/// already computed.
fn analyze_model_with(
    model: &FeatureModel,
    t: usize,
    universe: &TSetUniverse,
    products: &[crate::feature_model::FeatureSet],
) -> ModelAnalysis {
    let classes = model
        .classify_features(products)
        .expect("products come from this model");
    let names = |indices: &[usize]| {
        indices
            .iter()
            .map(|&i| model.features().name(i).to_string())
            .collect()
    };
    ModelAnalysis {
        name: model.name().to_string(),
        features: model.num_features(),
        t,
        universe_size: universe.len(),
        outcome: AnalysisOutcome::Classified {
            products: products.len() as u64,
            core: names(classes.core()),
            variant: names(classes.variant()),
            dead: names(classes.dead()),
        },
    }
}

fn run_cell(
    ctx: &ModelContext,
    algorithm: Algorithm,
    run: usize,
    config: &BenchmarkConfig,
) -> Result<RunRecord, BenchError> {
    let seed = config.base_seed.wrapping_add(run as u64);
    let array = generate(&ctx.model, config.t, algorithm, &config.generator_config(seed));
    let defect = |detail: String| BenchError::Defect {
        model: ctx.model.name().to_string(),
        algorithm: algorithm.name().to_string(),
        seed,
        detail,
    };

    // Verify before recording: every row a valid product, all of the
    // universe covered.
    let mut covered = FixedBitSet::with_capacity(ctx.universe.len());
    for (row, fs) in array.products().iter().enumerate() {
        let valid = ctx
            .model
            .validate_feature_set(fs)
            .map_err(|e| defect(e.to_string()))?;
        if !valid {
            return Err(defect(format!("row {row} is not a valid product")));
        }
        covered.union_with(&ctx.universe.coverage_mask(fs));
    }
    let missing = ctx.universe.len() - covered.count_ones(..);
    if missing > 0 {
        return Err(defect(format!("{missing} valid t-sets left uncovered")));
    }

    let metrics = suite_metrics_with(&array, &ctx.classes, &ctx.universe)
        .map_err(|e| defect(e.to_string()))?;
    Ok(RunRecord {
        model: ctx.model.name().to_string(),
        algorithm,
        run,
        seed,
        metrics,
        array,
    })
}

fn summarize_cells(
    contexts: &[ModelContext],
    config: &BenchmarkConfig,
    runs: &[RunRecord],
) -> Vec<CellSummary> {
    let mut summaries = Vec::new();
    for ctx in contexts {
        for &algorithm in &config.algorithms {
            let cell: Vec<&RunRecord> = runs
                .iter()
                .filter(|r| r.model == ctx.model.name() && r.algorithm == algorithm)
                .collect();
            let n = cell.len() as f64;
            summaries.push(CellSummary {
                model: ctx.model.name().to_string(),
                algorithm,
                runs: cell.len(),
                mean_size: cell.iter().map(|r| r.metrics.size as f64).sum::<f64>() / n,
                mean_generation_ms: cell
                    .iter()
                    .map(|r| r.metrics.generation_ms as f64)
                    .sum::<f64>()
                    / n,
                mean_similarity: cell.iter().map(|r| r.metrics.similarity).sum::<f64>() / n,
            });
        }
    }
    summaries
}

fn compare_pairwise(
    contexts: &[ModelContext],
    config: &BenchmarkConfig,
    runs: &[RunRecord],
) -> Vec<PairwiseComparison> {
    let mut scopes: Vec<Option<&str>> = contexts
        .iter()
        .map(|ctx| Some(ctx.model.name()))
        .collect();
    scopes.push(None); // pooled over every model
    let mut rows = Vec::new();
    for scope in scopes {
        for i in 0..config.algorithms.len() {
            for j in i + 1..config.algorithms.len() {
                let algorithm_a = config.algorithms[i];
                let algorithm_b = config.algorithms[j];
                for metric in ComparisonMetric::ALL {
                    let sample = |algorithm: Algorithm| -> Vec<f64> {
                        runs.iter()
                            .filter(|r| {
                                r.algorithm == algorithm
                                    && scope.map_or(true, |name| r.model == name)
                            })
                            .map(|r| metric.of(&r.metrics))
                            .collect()
                    };
                    let a = sample(algorithm_a);
                    let b = sample(algorithm_b);
                    let p_value =
                        wilcoxon_rank_sum(&a, &b).expect("cells always have at least one run");
                    let effect = a12(&a, &b).expect("cells always have at least one run");
                    rows.push(PairwiseComparison {
                        scope: scope.unwrap_or("all").to_string(),
                        metric,
                        algorithm_a,
                        algorithm_b,
                        p_value,
                        a12: effect,
                        significant: p_value < SIGNIFICANCE_LEVEL,
                    });
                }
            }
        }
    }
    rows
}

fn correlate(contexts: &[ModelContext], runs: &[RunRecord]) -> CorrelationMatrix {
    let column = |axis: usize| -> Vec<f64> {
        runs.iter()
            .map(|r| {
                let ctx = contexts
                    .iter()
                    .find(|c| c.model.name() == r.model)
                    .expect("every run belongs to a benchmarked model");
                match axis {
                    0 => ctx.products as f64,
                    1 => ctx.model.num_features() as f64,
                    2 => r.metrics.size as f64,
                    3 => r.metrics.generation_ms as f64,
                    4 => r.metrics.similarity,
                    _ => unreachable!(),
                }
            })
            .collect()
    };
    let columns: Vec<Vec<f64>> = (0..5).map(column).collect();
    let mut values = [[None; 5]; 5];
    for i in 0..5 {
        values[i][i] = Some(1.0);
        for j in i + 1..5 {
            let r = match spearman(&columns[i], &columns[j]) {
                Ok(r) => Some(r),
                Err(StatsError::ConstantRanks) | Err(StatsError::EmptySample) => None,
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    CorrelationMatrix { values }
}

fn runs_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from(
        "model,algorithm,run,seed,size,similarity,mean_tuple_frequency,h0,h1,h2,h3,h4,h5,h6,h7,h8,h9\n",
    );
    for r in &report.runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            r.model,
            r.algorithm,
            r.run,
            r.seed,
            r.metrics.size,
            r.metrics.similarity,
            r.metrics.mean_tuple_frequency
        ));
        for bucket in r.metrics.histogram {
            out.push_str(&format!(",{bucket}"));
        }
        out.push('\n');
    }
    out
}

fn timings_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("model,algorithm,run,seed,generation_ms\n");
    for r in &report.runs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.model, r.algorithm, r.run, r.seed, r.metrics.generation_ms
        ));
    }
    out
}

fn summary_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("model,algorithm,runs,mean_size,mean_generation_ms,mean_similarity\n");
    for s in &report.summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.model, s.algorithm, s.runs, s.mean_size, s.mean_generation_ms, s.mean_similarity
        ));
    }
    out
}

fn pairwise_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("scope,metric,algorithm_a,algorithm_b,p_value,a12,significant\n");
    for row in &report.pairwise {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.scope,
            row.metric.name(),
            row.algorithm_a,
            row.algorithm_b,
            row.p_value,
            row.a12,
            row.significant
        ));
    }
    out
}

fn correlations_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("metric");
    for axis in CORRELATION_AXES {
        out.push(',');
        out.push_str(axis);
    }
    out.push('\n');
    for (i, axis) in CORRELATION_AXES.iter().enumerate() {
        out.push_str(axis);
        for j in 0..CORRELATION_AXES.len() {
            out.push(',');
            match report.correlations.values[i][j] {
                Some(r) => out.push_str(&r.to_string()),
                None => out.push_str("na"),
            }
        }
        out.push('\n');
    }
    out
}

fn summary_text(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    out.push_str("t-wise covering array benchmark\n");
    out.push_str(&format!(
        "t = {}, runs per cell = {}, base seed = {}\n\n",
        report.t, report.runs_per_cell, report.base_seed
    ));
    out.push_str("models:\n");
    for analysis in &report.analyses {
        for line in analysis.to_string().lines() {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str("\nmean results per cell:\n");
    out.push_str(&format!(
        "  {:<12} {:<10} {:>10} {:>16} {:>12}\n",
        "model", "algorithm", "size", "generation_ms", "similarity"
    ));
    for s in &report.summaries {
        out.push_str(&format!(
            "  {:<12} {:<10} {:>10.2} {:>16.1} {:>12.4}\n",
            s.model, s.algorithm.name(), s.mean_size, s.mean_generation_ms, s.mean_similarity
        ));
    }
    out.push_str(&format!(
        "\nsignificant pairwise differences (two-sided rank-sum p < {SIGNIFICANCE_LEVEL}):\n"
    ));
    let significant: Vec<&PairwiseComparison> =
        report.pairwise.iter().filter(|c| c.significant).collect();
    if significant.is_empty() {
        out.push_str("  none\n");
    }
    for c in significant {
        out.push_str(&format!(
            "  [{}] {}: {} vs {} (p = {:.4}, A12 = {:.3})\n",
            c.scope,
            c.metric.name(),
            c.algorithm_a,
            c.algorithm_b,
            c.p_value,
            c.a12
        ));
    }
    out.push_str("\nmetric correlations (Spearman):\n");
    for line in correlations_csv(report).lines() {
        out.push_str("  ");
        out.push_str(&line.replace(',', "\t"));
        out.push('\n');
    }
    out.push_str(
        "\nnotes:\n  generation_ms covers the generation loop only (parsing and t-set\n  \
         enumeration are excluded) and varies between hosts and runs. Timings\n  \
         live in timings.csv and are excluded from runs.csv, so runs.csv is\n  \
         byte-for-byte reproducible for a given config on any host.\n",
    );
    out
}

/// Writes every report file into `dir`: `runs.csv`, `timings.csv`,
/// `summary.csv`, `pairwise.csv`, `correlations.csv`, `summary.txt`, and
/// the generated arrays under `arrays/`.
pub fn write_reports(
    report: &BenchmarkReport,
    models: &[FeatureModel],
    dir: &Path,
) -> Result<(), BenchError> {
    let io_err = |path: &Path, source: std::io::Error| BenchError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let write = |name: &str, content: String| -> Result<(), BenchError> {
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| io_err(&path, e))
    };
    write("runs.csv", runs_csv(report))?;
    write("timings.csv", timings_csv(report))?;
    write("summary.csv", summary_csv(report))?;
    write("pairwise.csv", pairwise_csv(report))?;
    write("correlations.csv", correlations_csv(report))?;
    write("summary.txt", summary_text(report))?;

    let arrays = dir.join("arrays");
    fs::create_dir_all(&arrays).map_err(|e| io_err(&arrays, e))?;
    for r in &report.runs {
        let model = models
            .iter()
            .find(|m| m.name() == r.model)
            .expect("report runs refer to benchmarked models");
        let path = arrays.join(format!("{}_{}_{}.ca", r.model, r.algorithm, r.seed));
        fs::write(&path, r.array.to_text(model)).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{suite_metrics_with, test_suite_similarity};
    use crate::sat::enumerate_products;

    fn xor_pair() -> FeatureModel {
        FeatureModel::parse("model pair\nroot R\nxor R A B\n").unwrap()
    }

    fn tiny_config(runs: usize) -> BenchmarkConfig {
        BenchmarkConfig {
            runs,
            workers: 1,
            ..BenchmarkConfig::default()
        }
    }

    #[test]
    fn empty_toml_is_the_default_config() {
        let config = BenchmarkConfig::from_toml("").unwrap();
        assert_eq!(config, BenchmarkConfig::default());
        assert_eq!(config.algorithms, Algorithm::ALL.to_vec());
        assert_eq!(config.runs, 30);
        assert_eq!(config.base_seed, 1);
    }

    #[test]
    fn toml_overrides_reach_every_level() {
        let config = BenchmarkConfig::from_toml(
            "models = [\"a.fm\", \"b.fm\"]\n\
             algorithms = [\"greedy\", \"genetic\"]\n\
             t = 3\n\
             runs = 5\n\
             base_seed = 100\n\
             workers = 2\n\n\
             [greedy]\n\
             candidate_pool = 40\n\n\
             [annealing]\n\
             cooling_factor = 0.9\n\n\
             [genetic]\n\
             population_size = 20\n",
        )
        .unwrap();
        assert_eq!(config.models, ["a.fm", "b.fm"]);
        assert_eq!(config.algorithms, [Algorithm::Greedy, Algorithm::Genetic]);
        assert_eq!(config.t, 3);
        assert_eq!(config.runs, 5);
        assert_eq!(config.base_seed, 100);
        assert_eq!(config.greedy.candidate_pool, Some(40));
        assert_eq!(config.annealing.cooling_factor, 0.9);
        assert_eq!(config.annealing.max_restarts, 3); // untouched default
        assert_eq!(config.genetic.population_size, 20);
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(matches!(
            BenchmarkConfig::from_toml("runs = 0\n"),
            Err(BenchError::Config(_))
        ));
        assert!(matches!(
            BenchmarkConfig::from_toml("algorithms = []\n"),
            Err(BenchError::Config(_))
        ));
        assert!(matches!(
            BenchmarkConfig::from_toml("algorithms = [\"greedy\", \"greedy\"]\n"),
            Err(BenchError::Config(_))
        ));
        assert!(matches!(
            BenchmarkConfig::from_toml("t = 0\n"),
            Err(BenchError::Config(_))
        ));
        assert!(matches!(
            BenchmarkConfig::from_toml("unknown_field = 1\n"),
            Err(BenchError::Config(_))
        ));
        assert!(matches!(
            BenchmarkConfig::from_toml("algorithms = [\"quantum\"]\n"),
            Err(BenchError::Config(_))
        ));
        assert!(matches!(
            BenchmarkConfig::from_toml("[annealing]\ncooling_factor = 1.5\n"),
            Err(BenchError::Config(_))
        ));
    }

    #[test]
    fn load_models_defaults_to_the_bundled_corpus() {
        let config = BenchmarkConfig::default();
        let models = config.load_models().unwrap();
        assert_eq!(models.len(), corpus::bundled_models().len());
        assert_eq!(models[0].name(), "gpl");
    }

    #[test]
    fn load_models_reads_files_and_reports_failures() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("pair.fm");
        fs::write(&good, xor_pair().serialize()).unwrap();
        let config = BenchmarkConfig {
            models: vec![good.display().to_string()],
            ..BenchmarkConfig::default()
        };
        assert_eq!(config.load_models().unwrap()[0].name(), "pair");

        let missing = BenchmarkConfig {
            models: vec![dir.path().join("nope.fm").display().to_string()],
            ..BenchmarkConfig::default()
        };
        assert!(matches!(missing.load_models(), Err(BenchError::Io { .. })));

        let garbage = dir.path().join("bad.fm");
        fs::write(&garbage, "this is not a model\n").unwrap();
        let bad = BenchmarkConfig {
            models: vec![garbage.display().to_string()],
            ..BenchmarkConfig::default()
        };
        assert!(matches!(bad.load_models(), Err(BenchError::Model { .. })));
    }

    #[test]
    fn analyze_reports_structure_cap_and_void() {
        let gpl = corpus::gpl();
        let analysis = analyze_model(&gpl, 2, DEFAULT_PRODUCT_CAP);
        assert_eq!(analysis.features, 18);
        assert_eq!(analysis.universe_size, 418);
        assert_eq!(analysis.products(), CountOutcome::Exact(73));
        match &analysis.outcome {
            AnalysisOutcome::Classified { core, variant, dead, .. } => {
                assert_eq!(core, &["GPL", "Driver", "Benchmark", "GraphType", "Algorithms"]);
                assert_eq!(variant.len(), 13);
                assert!(dead.is_empty());
            }
            other => panic!("expected classification, got {other:?}"),
        }
        let rendered = analysis.to_string();
        assert!(rendered.contains("model gpl: 18 features, 73 products, 418 valid 2-sets"));
        assert!(rendered.contains("core (5): GPL Driver Benchmark GraphType Algorithms"));

        let capped = analyze_model(&gpl, 2, 10);
        assert_eq!(capped.products(), CountOutcome::ExceedsCap { cap: 10 });
        assert!(capped.to_string().contains("> 10 products"));
        assert_eq!(capped.universe_size, 418);

        let void =
            FeatureModel::parse("model v\nroot R\nmandatory A R\nexcludes A R\n").unwrap();
        let void_analysis = analyze_model(&void, 2, DEFAULT_PRODUCT_CAP);
        assert_eq!(void_analysis.outcome, AnalysisOutcome::Void);
        assert_eq!(void_analysis.universe_size, 0);
        assert!(void_analysis.to_string().contains("0 products"));
    }

    #[test]
    fn records_are_ordered_and_seeded_by_cell() {
        let config = tiny_config(3);
        let report = run_benchmark(vec![xor_pair()], &config).unwrap();
        assert_eq!(report.runs.len(), 3 * Algorithm::ALL.len());
        let mut expected = Vec::new();
        for algorithm in Algorithm::ALL {
            for run in 0..3usize {
                expected.push((algorithm, run, 1 + run as u64));
            }
        }
        let got: Vec<(Algorithm, usize, u64)> = report
            .runs
            .iter()
            .map(|r| (r.algorithm, r.run, r.seed))
            .collect();
        assert_eq!(got, expected);
        // The xor-pair model needs exactly its two products.
        assert!(report.runs.iter().all(|r| r.metrics.size == 2));
        assert!(report.runs.iter().all(|r| r.model == "pair"));
    }

    #[test]
    fn single_cell_benchmark_has_no_pairwise_rows() {
        let config = BenchmarkConfig {
            algorithms: vec![Algorithm::Greedy],
            runs: 1,
            workers: 1,
            ..BenchmarkConfig::default()
        };
        let report = run_benchmark(vec![xor_pair()], &config).unwrap();
        assert_eq!(report.runs.len(), 1);
        assert!(report.pairwise.is_empty());
        let summary = &report.summaries[0];
        assert_eq!(summary.runs, 1);
        assert_eq!(summary.mean_size, report.runs[0].metrics.size as f64);
        assert_eq!(summary.mean_similarity, report.runs[0].metrics.similarity);
        // One observation cannot rank-correlate: everything off the
        // diagonal is undefined.
        for i in 0..5 {
            for j in 0..5 {
                let expected = if i == j { Some(1.0) } else { None };
                assert_eq!(report.correlations.values[i][j], expected);
            }
        }
    }

    #[test]
    fn cell_means_match_the_records() {
        let config = tiny_config(4);
        let report = run_benchmark(vec![xor_pair()], &config).unwrap();
        for summary in &report.summaries {
            let cell: Vec<&RunRecord> = report
                .runs
                .iter()
                .filter(|r| r.algorithm == summary.algorithm)
                .collect();
            assert_eq!(summary.runs, 4);
            let mean_size =
                cell.iter().map(|r| r.metrics.size as f64).sum::<f64>() / cell.len() as f64;
            assert_eq!(summary.mean_size, mean_size);
        }
    }

    #[test]
    fn pairwise_rows_cover_scopes_pairs_and_metrics() {
        let config = tiny_config(2);
        let models = vec![
            xor_pair(),
            FeatureModel::parse("model opt\nroot R\noptional A R\noptional B R\n").unwrap(),
        ];
        let report = run_benchmark(models, &config).unwrap();
        // scopes: pair, opt, all; pairs: 3; metrics: 3.
        assert_eq!(report.pairwise.len(), 3 * 3 * 3);
        let scopes: Vec<&str> = report.pairwise.iter().map(|c| c.scope.as_str()).collect();
        assert!(scopes.contains(&"pair") && scopes.contains(&"opt") && scopes.contains(&"all"));
        for c in &report.pairwise {
            assert!((0.0..=1.0).contains(&c.p_value));
            assert!((0.0..=1.0).contains(&c.a12));
            assert_eq!(c.significant, c.p_value < SIGNIFICANCE_LEVEL);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut config = tiny_config(3);
        let one = run_benchmark(vec![xor_pair()], &config).unwrap();
        config.workers = 4;
        let four = run_benchmark(vec![xor_pair()], &config).unwrap();
        // Everything except wall-clock timing must be identical.
        assert_eq!(runs_csv(&one), runs_csv(&four));
        for (a, b) in one.summaries.iter().zip(&four.summaries) {
            assert_eq!(a.mean_size, b.mean_size);
            assert_eq!(a.mean_similarity, b.mean_similarity);
        }
        for (a, b) in one.runs.iter().zip(&four.runs) {
            assert_eq!(a.array.products(), b.array.products());
        }
    }

    #[test]
    fn reports_round_trip_through_the_filesystem() {
        let config = tiny_config(2);
        let models = vec![xor_pair()];
        let report = run_benchmark(models.clone(), &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_reports(&report, &models, dir.path()).unwrap();

        for name in [
            "runs.csv",
            "timings.csv",
            "summary.csv",
            "pairwise.csv",
            "correlations.csv",
            "summary.txt",
        ] {
            assert!(dir.path().join(name).is_file(), "{name} missing");
        }
        let runs_text = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        assert_eq!(runs_text, runs_csv(&report));
        assert_eq!(runs_text.lines().count(), 1 + report.runs.len());
        assert!(!runs_text.lines().next().unwrap().contains("generation_ms"));
        let timings_text = fs::read_to_string(dir.path().join("timings.csv")).unwrap();
        assert!(timings_text.lines().next().unwrap().contains("generation_ms"));

        // Every archived array re-parses and reproduces its run's metrics.
        let model = &models[0];
        let products = enumerate_products(model).unwrap();
        let classes = model.classify_features(&products).unwrap();
        let universe = TSetUniverse::enumerate(model, config.t);
        for r in &report.runs {
            let path = dir
                .path()
                .join("arrays")
                .join(format!("{}_{}_{}.ca", r.model, r.algorithm, r.seed));
            let text = fs::read_to_string(&path).unwrap();
            let ca = CoveringArray::parse(&text, model).unwrap();
            assert_eq!(ca.products(), r.array.products());
            let metrics = suite_metrics_with(&ca, &classes, &universe).unwrap();
            assert_eq!(metrics, r.metrics);
            assert_eq!(
                metrics.similarity,
                test_suite_similarity(ca.products(), &classes).unwrap()
            );
        }
    }

    #[test]
    fn correlation_matrix_is_symmetric_with_unit_diagonal() {
        let config = tiny_config(2);
        let models = vec![
            xor_pair(),
            FeatureModel::parse("model opt\nroot R\noptional A R\noptional B R\noptional C R\n")
                .unwrap(),
        ];
        let report = run_benchmark(models, &config).unwrap();
        let m = &report.correlations.values;
        for i in 0..5 {
            assert_eq!(m[i][i], Some(1.0));
            for j in 0..5 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        // Two models, two feature counts, two product counts that rise
        // together: products and features correlate perfectly.
        assert_eq!(m[0][1], Some(1.0));
    }

    #[test]
    fn degenerate_models_are_rejected_upfront() {
        let config = tiny_config(1);
        let void =
            FeatureModel::parse("model v\nroot R\nmandatory A R\nexcludes A R\n").unwrap();
        assert!(matches!(
            run_benchmark(vec![void], &config),
            Err(BenchError::VoidModel { .. })
        ));
        assert!(matches!(
            run_benchmark(Vec::new(), &config),
            Err(BenchError::Config(_))
        ));
        let dup = vec![xor_pair(), xor_pair()];
        assert!(matches!(
            run_benchmark(dup, &config),
            Err(BenchError::Config(_))
        ));
        let config = BenchmarkConfig {
            t: 9,
            ..tiny_config(1)
        };
        assert!(matches!(
            run_benchmark(vec![xor_pair()], &config),
            Err(BenchError::Config(_))
        ));
    }
}
