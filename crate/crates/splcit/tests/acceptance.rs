//! The acceptance gate: one test per release-blocking criterion, each
//! printing a single `PASS criterion N: ...` or `FAIL criterion N: ...`
//! line (run with `--nocapture` to see them as they complete). Tolerances
//! are pinned as constants next to the criteria that use them.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use once_cell::sync::Lazy;

use splcit::bench::{run_benchmark, write_reports, BenchmarkConfig};
use splcit::corpus;
use splcit::feature_model::{FeatureModel, FeatureSet};
use splcit::generators::{generate, Algorithm, GeneratorConfig};
use splcit::metrics::{mean_tuple_frequency, similarity, tuple_frequency};
use splcit::sat::enumerate_products;
use splcit::stats::{a12, spearman, wilcoxon_rank_sum};
use splcit::tset::{covers, coverage_gap, enumerate_valid_tsets, verify_covering_array, TSet};

/// Mean tuple frequency and rank-correlation comparisons are exact up to
/// accumulated floating-point rounding.
const FLOAT_TOL: f64 = 1e-12;
/// Mean covering-array sizes may drift this far (relative) from the
/// reference means before the generators count as miscalibrated.
const SIZE_BAND: f64 = 0.30;
/// Reference mean GPL sizes the three algorithms are expected to track.
const REFERENCE_MEANS: [(Algorithm, f64); 3] = [
    (Algorithm::Annealing, 12.00),
    (Algorithm::Greedy, 13.00),
    (Algorithm::Genetic, 13.13),
];
const SEEDS_PER_ALGORITHM: u64 = 30;

fn report(criterion: usize, label: &str, pass: bool) {
    println!("{} criterion {criterion}: {label}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {label}");
}

struct GplFixture {
    model: FeatureModel,
    products: Vec<FeatureSet>,
    universe: splcit::tset::TSetUniverse,
}

static GPL: Lazy<GplFixture> = Lazy::new(|| {
    let model = corpus::gpl();
    let products = enumerate_products(&model).expect("GPL is small");
    let universe = enumerate_valid_tsets(&model, 2);
    GplFixture { model, products, universe }
});

/// 3 algorithms x 30 seeds = 90 pairwise GPL covering arrays, generated
/// once and shared by the frequency, completeness, and size criteria.
static GPL_ARRAYS: Lazy<(Vec<splcit::tset::CoveringArray>, Duration)> = Lazy::new(|| {
    let start = Instant::now();
    let mut arrays = Vec::new();
    for &algorithm in &Algorithm::ALL {
        for seed in 0..SEEDS_PER_ALGORITHM {
            arrays.push(generate(&GPL.model, 2, algorithm, &GeneratorConfig::with_seed(seed)));
        }
    }
    (arrays, start.elapsed())
});

#[test]
fn criterion_1_gpl_calibration() {
    let start = Instant::now();
    let gpl = &*GPL;
    let products_ok = gpl.products.len() == 73;
    let tsets_ok = gpl.universe.len() == 418;

    let suite = corpus::sample_suite();
    let all_valid = suite.iter().all(|fs| {
        gpl.model.validate_feature_set(fs).expect("dimensions match")
    });
    let gap = coverage_gap(&gpl.universe, &suite);
    let gap_ok = gap.len() == 24;
    let fast_enough = start.elapsed() < Duration::from_secs(5);

    report(
        1,
        "GPL calibration (73 products, 418 valid 2-sets, sample suite valid, 24 uncovered, < 5 s)",
        products_ok && tsets_ok && all_valid && gap_ok && fast_enough,
    );
}

#[test]
fn criterion_2_metric_golden_values() {
    let gpl = &*GPL;
    let suite = corpus::sample_suite();
    let classes = gpl.model.classify_features(&gpl.products).expect("non-void");

    let sim_disjoint = similarity(&suite[0], &suite[2], &classes);
    let sim_mixed = similarity(&suite[1], &suite[7], &classes);

    let feature = |name: &str| gpl.model.features().index_of(name).expect("known feature");
    let ts0 = TSet::new([feature("Driver")], [feature("Prim")]).expect("well-formed");
    let ts1 = TSet::new([feature("DFS"), feature("Kruskal")], []).expect("well-formed");
    let freq0 = tuple_frequency(&ts0, &suite).expect("non-empty suite");
    let freq1 = tuple_frequency(&ts1, &suite).expect("non-empty suite");

    report(
        2,
        "metric golden values (Sim 0.0 and 0.625, tuple frequencies 0.75 and 0.125, exact)",
        sim_disjoint == 0.0 && sim_mixed == 0.625 && freq0 == 0.75 && freq1 == 0.125,
    );
}

#[test]
fn criterion_3_mean_tuple_frequency_identity() {
    let gpl = &*GPL;
    let (arrays, _) = &*GPL_ARRAYS;
    // Every valid product fixes all 18 features, so it covers exactly
    // C(18,2) = 153 of the 418 valid 2-sets, and any suite's mean tuple
    // frequency collapses to 153/418 regardless of its contents.
    let expected = 153.0 / 418.0;

    let mut arrays_checked = 0usize;
    let mut all_ok = true;
    for array in arrays {
        let mean = mean_tuple_frequency(&gpl.universe, array.products()).expect("non-empty");
        all_ok &= (mean - expected).abs() <= FLOAT_TOL;
        for product in array.products() {
            let covered = gpl.universe.coverage_mask(product).count_ones(..);
            all_ok &= covered == 153;
        }
        arrays_checked += 1;
    }

    report(
        3,
        "mean tuple frequency equals 153/418 within 1e-12 and every row covers 153 pairs, \
         across 90 arrays",
        all_ok && arrays_checked >= 90,
    );
}

#[test]
fn criterion_4_every_array_verifies() {
    let models = corpus::bundled_models();
    let mut all_ok = true;
    for model in &models {
        for &algorithm in &Algorithm::ALL {
            let array = generate(model, 2, algorithm, &GeneratorConfig::with_seed(11));
            let verdict = verify_covering_array(model, &array).expect("dimensions match");
            if !verdict.is_complete() {
                println!(
                    "  incomplete: {} on {} ({} invalid rows, {} uncovered)",
                    algorithm,
                    model.name(),
                    verdict.invalid_rows.len(),
                    verdict.uncovered.len()
                );
                all_ok = false;
            }
        }
    }
    // The shared 90-array cache must verify too.
    let gpl = &*GPL;
    for array in &GPL_ARRAYS.0 {
        all_ok &= verify_covering_array(&gpl.model, array).expect("dimensions match").is_complete();
    }
    report(
        4,
        "every generated array passes verification on every bundled model and algorithm",
        all_ok,
    );
}

#[test]
fn criterion_5_gpl_size_targets() {
    let (arrays, elapsed) = &*GPL_ARRAYS;
    let mean_size = |algorithm: Algorithm| {
        let sizes: Vec<f64> = arrays
            .iter()
            .filter(|a| a.algorithm() == algorithm.name())
            .map(|a| a.size() as f64)
            .collect();
        assert_eq!(sizes.len(), SEEDS_PER_ALGORITHM as usize);
        sizes.iter().sum::<f64>() / sizes.len() as f64
    };

    let mut all_ok = true;
    let mut means = [0.0f64; 3];
    for (slot, &(algorithm, reference)) in REFERENCE_MEANS.iter().enumerate() {
        let mean = mean_size(algorithm);
        means[slot] = mean;
        let within = (mean - reference).abs() <= SIZE_BAND * reference;
        if !within {
            println!("  {algorithm}: mean {mean:.2} outside {reference} +/- 30%");
        }
        all_ok &= within;
    }
    let annealing_not_larger = means[0] <= means[1];
    let fast_enough = *elapsed < Duration::from_secs(300);
    if !fast_enough {
        println!("  90-array generation took {elapsed:?}");
    }

    report(
        5,
        "GPL mean sizes within 30% of the reference means, annealing <= greedy, < 5 min",
        all_ok && annealing_not_larger && fast_enough,
    );
}

#[test]
fn criterion_6_exhaustive_oracle_equivalence() {
    let mut models_checked = 0usize;
    let mut all_ok = true;
    for model in corpus::bundled_models() {
        let n = model.num_features();
        if model.name() == "gpl" || n > 16 {
            continue;
        }
        models_checked += 1;

        // Independent oracle: test all 2^n assignments against the model
        // rules directly, without the solver.
        let mut brute: HashSet<FeatureSet> = HashSet::new();
        for bits in 0..(1u32 << n) {
            let fs = FeatureSet::from_selected(n, (0..n).filter(|i| bits & (1 << i) != 0))
                .expect("indexes in range");
            if model.validate_feature_set(&fs).expect("dimensions match") {
                brute.insert(fs);
            }
        }
        let solved: HashSet<FeatureSet> =
            enumerate_products(&model).expect("small model").into_iter().collect();
        all_ok &= brute == solved;

        // The 2-set universe must be exactly the pairs some product covers.
        let universe = enumerate_valid_tsets(&model, 2);
        let products: Vec<FeatureSet> = solved.iter().cloned().collect();
        for i in 0..n {
            for j in i + 1..n {
                for polarity in 0..4u32 {
                    let (sel, notsel): (Vec<usize>, Vec<usize>) = match polarity {
                        0 => (vec![], vec![i, j]),
                        1 => (vec![i], vec![j]),
                        2 => (vec![j], vec![i]),
                        _ => (vec![i, j], vec![]),
                    };
                    let ts = TSet::new(sel, notsel).expect("well-formed");
                    let covered =
                        products.iter().any(|p| covers(p, &ts).expect("dimensions match"));
                    let listed = universe.position(&ts).is_some();
                    all_ok &= covered == listed;
                }
            }
        }
    }

    report(
        6,
        "solver enumeration matches exhaustive evaluation and the 2-set universe is exactly \
         the covered pairs, for every synthetic model with at most 16 features",
        all_ok && models_checked >= 4,
    );
}

/// Enumerates every way to choose `n1` of the ranks `1..=n` and derives the
/// two-sided p-value of the observed rank sum from the exact distribution.
fn rank_permutation_p(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() + b.len();
    let mut combined: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    combined.sort_by(|x, y| x.0.total_cmp(&y.0));
    let observed: usize = combined
        .iter()
        .enumerate()
        .filter(|(_, (_, from_a))| *from_a)
        .map(|(rank0, _)| rank0 + 1)
        .sum();

    let mut at_most = 0u64;
    let mut at_least = 0u64;
    let mut total = 0u64;
    let mut chosen = Vec::new();
    fn walk(
        next: usize,
        n: usize,
        k: usize,
        chosen: &mut Vec<usize>,
        observed: usize,
        at_most: &mut u64,
        at_least: &mut u64,
        total: &mut u64,
    ) {
        if chosen.len() == k {
            let w: usize = chosen.iter().sum();
            *total += 1;
            if w <= observed {
                *at_most += 1;
            }
            if w >= observed {
                *at_least += 1;
            }
            return;
        }
        for rank in next..=n {
            chosen.push(rank);
            walk(rank + 1, n, k, chosen, observed, at_most, at_least, total);
            chosen.pop();
        }
    }
    walk(1, n, a.len(), &mut chosen, observed, &mut at_most, &mut at_least, &mut total);
    let tail = (at_most.min(at_least) as f64) / total as f64;
    (2.0 * tail).min(1.0)
}

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    fn uniform(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[test]
fn criterion_7_statistics_correctness() {
    let mut rng = SplitMix(0xACCE97);
    let mut all_ok = true;

    // Wilcoxon: exact p-values equal full rank-permutation enumeration for
    // every tie-free shape with n1 + n2 <= 10.
    for n1 in 1..=9usize {
        for n2 in 1..=(10 - n1) {
            for _ in 0..5 {
                let mut pool: Vec<f64> = Vec::new();
                while pool.len() < n1 + n2 {
                    let v = rng.uniform();
                    if !pool.contains(&v) {
                        pool.push(v);
                    }
                }
                let a = pool[..n1].to_vec();
                let b = pool[n1..].to_vec();
                let p = wilcoxon_rank_sum(&a, &b).expect("non-empty");
                let oracle = rank_permutation_p(&a, &b);
                if (p - oracle).abs() > FLOAT_TOL {
                    println!("  wilcoxon mismatch at n1={n1} n2={n2}: {p} vs {oracle}");
                    all_ok = false;
                }
            }
        }
    }

    // A12: pair counting on 100 random sample pairs, the complement
    // identity exactly, and 0.5 on identical samples.
    for _ in 0..100 {
        let len_a = 1 + (rng.next() % 20) as usize;
        let len_b = 1 + (rng.next() % 20) as usize;
        let a: Vec<f64> = (0..len_a).map(|_| (rng.next() % 8) as f64).collect();
        let b: Vec<f64> = (0..len_b).map(|_| (rng.next() % 8) as f64).collect();
        let mut wins = 0.0f64;
        for &x in &a {
            for &y in &b {
                if x > y {
                    wins += 1.0;
                } else if x == y {
                    wins += 0.5;
                }
            }
        }
        let oracle = wins / (len_a * len_b) as f64;
        let forward = a12(&a, &b).expect("non-empty");
        let backward = a12(&b, &a).expect("non-empty");
        all_ok &= forward == oracle;
        all_ok &= forward + backward == 1.0;
        all_ok &= a12(&a, &a).expect("non-empty") == 0.5;
    }

    // Spearman: rank-then-Pearson oracle within 1e-12.
    for _ in 0..50 {
        let len = 3 + (rng.next() % 30) as usize;
        let x: Vec<f64> = (0..len).map(|_| (rng.next() % 10) as f64).collect();
        let y: Vec<f64> = (0..len).map(|_| (rng.next() % 10) as f64).collect();
        let midranks = |v: &[f64]| -> Vec<f64> {
            let mut order: Vec<usize> = (0..v.len()).collect();
            order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
            let mut ranks = vec![0.0; v.len()];
            let mut start = 0;
            while start < order.len() {
                let mut end = start;
                while end + 1 < order.len() && v[order[end + 1]] == v[order[start]] {
                    end += 1;
                }
                let shared = (start + end) as f64 / 2.0 + 1.0;
                for &idx in &order[start..=end] {
                    ranks[idx] = shared;
                }
                start = end + 1;
            }
            ranks
        };
        let pearson = |x: &[f64], y: &[f64]| -> Option<f64> {
            let n = x.len() as f64;
            let mx = x.iter().sum::<f64>() / n;
            let my = y.iter().sum::<f64>() / n;
            let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
            let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
            let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
            (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
        };
        let oracle = pearson(&midranks(&x), &midranks(&y));
        match (spearman(&x, &y), oracle) {
            (Ok(rho), Some(expected)) => all_ok &= (rho - expected).abs() <= FLOAT_TOL,
            (Err(_), None) => {}
            (got, want) => {
                println!("  spearman disagreement: {got:?} vs oracle {want:?}");
                all_ok = false;
            }
        }
    }

    report(
        7,
        "rank-sum matches permutation enumeration, A12 matches pair counting with an exact \
         complement, Spearman matches rank-then-Pearson within 1e-12",
        all_ok,
    );
}

#[test]
fn criterion_8_benchmark_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_dir = dir.path().join("models");
    corpus::write_bundled(&corpus_dir).unwrap();
    let config_path = dir.path().join("bench.toml");
    fs::write(
        &config_path,
        format!(
            "models = [{:?}, {:?}, {:?}]\nruns = 5\nbase_seed = 3\n",
            corpus_dir.join("gpl.fm"),
            corpus_dir.join("synth_a.fm"),
            corpus_dir.join("synth_b.fm"),
        ),
    )
    .unwrap();

    let run_and_read = |label: &str, workers: &str| -> String {
        let out_dir = dir.path().join(label);
        let output = Command::new(env!("CARGO_BIN_EXE_splcit"))
            .args([
                "bench",
                "--config",
                config_path.to_str().unwrap(),
                "--workers",
                workers,
                "-o",
                out_dir.to_str().unwrap(),
            ])
            .output()
            .expect("binary runs");
        assert!(
            output.status.success(),
            "bench failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        fs::read_to_string(out_dir.join("runs.csv")).expect("runs.csv written")
    };

    let serial = run_and_read("serial", "1");
    let repeat = run_and_read("repeat", "1");
    let parallel = run_and_read("parallel", "4");

    report(
        8,
        "repeated `splcit bench` runs produce byte-identical runs.csv at any worker count",
        serial == repeat && serial == parallel,
    );
}

#[test]
fn criterion_9_full_benchmark_within_budget() {
    let start = Instant::now();
    let config = BenchmarkConfig::default();
    let models = config.load_models().expect("bundled corpus loads");
    let report_data = run_benchmark(models.clone(), &config).expect("benchmark runs");
    let dir = tempfile::tempdir().unwrap();
    write_reports(&report_data, &models, dir.path()).expect("reports write");
    let elapsed = start.elapsed();

    let expected_runs = 7 * Algorithm::ALL.len() * 30;
    let runs_ok = report_data.runs.len() == expected_runs;
    let budget = Duration::from_secs(600);
    if elapsed >= budget {
        println!("  full benchmark took {elapsed:?}");
    }
    let files_ok = ["runs.csv", "summary.csv", "pairwise.csv", "correlations.csv", "summary.txt"]
        .iter()
        .all(|name| Path::new(&dir.path().join(name)).exists());

    report(
        9,
        "the full bundled benchmark (7 models x 3 algorithms x 30 runs) finishes in under \
         10 minutes with all reports written",
        runs_ok && files_ok && elapsed < budget,
    );
}
