//! Command-line front end for the covering-array pipeline.
//!
//! Exit codes: 0 success, 1 usage or file-access problems, 2 unparseable
//! or invalid input content, 3 a covering array failed verification, 4 a
//! product cap was exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use splcit::bench::{
    analyze_model, run_benchmark, write_reports, AnalysisOutcome, BenchError, BenchmarkConfig,
};
use splcit::corpus;
use splcit::feature_model::{FeatureModel, ParseError};
use splcit::generators::{generate, Algorithm, GeneratorConfig};
use splcit::metrics::{metrics_csv_row, suite_metrics, MetricsError, METRICS_CSV_HEADER};
use splcit::sat::{SolveError, DEFAULT_PRODUCT_CAP};
use splcit::tset::{verify_covering_array, CaParseError, CoveringArray};

#[derive(Parser)]
#[command(
    name = "splcit",
    version,
    about = "Combinatorial interaction testing for software product lines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a feature model: counts, valid t-sets, feature classes
    Analyze {
        /// Feature model file (.fm)
        model: PathBuf,
        /// Interaction strength used for the t-set count
        #[arg(long, default_value_t = 2)]
        t: usize,
        /// Stop product enumeration beyond this many products
        #[arg(long, default_value_t = DEFAULT_PRODUCT_CAP)]
        cap: usize,
    },
    /// Generate a t-wise covering array for a feature model
    Generate {
        /// Feature model file (.fm)
        model: PathBuf,
        /// Generation algorithm
        #[arg(long, value_parser = Algorithm::from_str)]
        algo: Algorithm,
        /// Interaction strength
        #[arg(long, default_value_t = 2)]
        t: usize,
        /// Random seed; equal seeds reproduce the array exactly
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the array here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute quality metrics for an existing covering array
    Metrics {
        /// Feature model file (.fm)
        model: PathBuf,
        /// Covering array file (.ca)
        array: PathBuf,
    },
    /// Check that an array covers every valid t-set with valid products
    Verify {
        /// Feature model file (.fm)
        model: PathBuf,
        /// Covering array file (.ca)
        array: PathBuf,
    },
    /// Run the benchmark grid and write CSV/text reports
    Bench {
        /// Benchmark config (TOML); defaults benchmark the bundled corpus
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report directory
        #[arg(short, long)]
        output: PathBuf,
        /// Override the configured worker count
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Write the bundled model corpus as .fm files
    Corpus {
        /// Target directory
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
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
    #[error("cannot parse covering array {path}: {source}")]
    Array {
        path: String,
        #[source]
        source: CaParseError,
    },
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("{invalid} invalid rows, {uncovered} uncovered t-sets")]
    Verification { invalid: usize, uncovered: usize },
    #[error("product enumeration exceeded the cap of {cap}")]
    CapExceeded { cap: usize },
    #[error("invalid input: {0}")]
    Input(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Model { .. } | CliError::Array { .. } | CliError::Input(_) => 2,
            CliError::Bench(err) => match err {
                BenchError::Io { .. } => 1,
                BenchError::ProductCap { .. } => 4,
                _ => 2,
            },
            CliError::Verification { .. } => 3,
            CliError::CapExceeded { .. } => 4,
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_model(path: &Path) -> Result<FeatureModel, CliError> {
    FeatureModel::parse(&read_file(path)?).map_err(|source| CliError::Model {
        path: path.display().to_string(),
        source,
    })
}

fn load_array(path: &Path, model: &FeatureModel) -> Result<CoveringArray, CliError> {
    CoveringArray::parse(&read_file(path)?, model).map_err(|source| CliError::Array {
        path: path.display().to_string(),
        source,
    })
}

fn check_strength(model: &FeatureModel, t: usize) -> Result<(), CliError> {
    if t == 0 || t > model.num_features() {
        return Err(CliError::Input(format!(
            "t = {t} is outside 1..={} for model {}",
            model.num_features(),
            model.name()
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { model, t, cap } => {
            let model = load_model(&model)?;
            check_strength(&model, t)?;
            let analysis = analyze_model(&model, t, cap);
            print!("{analysis}");
            if let AnalysisOutcome::ExceedsCap { cap } = analysis.outcome {
                return Err(CliError::CapExceeded { cap });
            }
            Ok(())
        }
        Command::Generate {
            model,
            algo,
            t,
            seed,
            output,
        } => {
            let model = load_model(&model)?;
            check_strength(&model, t)?;
            let array = generate(&model, t, algo, &GeneratorConfig::with_seed(seed));
            let text = array.to_text(&model);
            match output {
                Some(path) => fs::write(&path, text).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Metrics { model, array } => {
            let model = load_model(&model)?;
            let array = load_array(&array, &model)?;
            let metrics = suite_metrics(&array, &model).map_err(|err| match err {
                MetricsError::Enumeration(SolveError::CapExceeded { cap }) => {
                    CliError::CapExceeded { cap }
                }
                other => CliError::Input(other.to_string()),
            })?;
            println!("{METRICS_CSV_HEADER}");
            println!(
                "{}",
                metrics_csv_row(array.model_name(), array.algorithm(), array.seed(), &metrics)
            );
            Ok(())
        }
        Command::Verify { model, array } => {
            let model = load_model(&model)?;
            let array = load_array(&array, &model)?;
            let report = verify_covering_array(&model, &array)
                .map_err(|err| CliError::Input(err.to_string()))?;
            if report.is_complete() {
                println!(
                    "ok: {} rows cover all {} valid {}-sets of model {}",
                    array.size(),
                    report.universe_size,
                    array.t(),
                    model.name()
                );
                return Ok(());
            }
            for row in &report.invalid_rows {
                println!("invalid row {row}: not a valid product");
            }
            const SHOWN: usize = 20;
            for ts in report.uncovered.iter().take(SHOWN) {
                println!("uncovered: {}", ts.display_with(model.features()));
            }
            if report.uncovered.len() > SHOWN {
                println!("... and {} more uncovered t-sets", report.uncovered.len() - SHOWN);
            }
            Err(CliError::Verification {
                invalid: report.invalid_rows.len(),
                uncovered: report.uncovered.len(),
            })
        }
        Command::Bench {
            config,
            output,
            workers,
        } => {
            let mut config = match config {
                Some(path) => BenchmarkConfig::from_toml(&read_file(&path)?)?,
                None => BenchmarkConfig::default(),
            };
            if let Some(workers) = workers {
                config.workers = workers;
            }
            let models = config.load_models()?;
            let report = run_benchmark(models.clone(), &config)?;
            write_reports(&report, &models, &output)?;
            println!("wrote reports for {} runs to {}", report.runs.len(), output.display());
            Ok(())
        }
        Command::Corpus { output } => {
            let paths = corpus::write_bundled(&output).map_err(|source| CliError::Io {
                path: output.display().to_string(),
                source,
            })?;
            for path in paths {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(err.exit_code())
        }
    }
}
