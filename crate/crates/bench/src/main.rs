use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hmc_bench::csvio::{load_csv, write_matrix_csv, LabelColumn};
use hmc_bench::report::report;
use hmc_bench::runner::WORKERS_ENV;
use hmc_bench::sweep::{classcount_csv, classcount_summary, sweep_csv, sweep_grid};
use hmc_bench::{run_experiment, ExperimentConfig, ResultStore, RunOptions};
use hmc_core::dissimilarity::{cbd_matrix, rbd_matrix, NoEvidence};
use hmc_core::hierarchy::{sample_random_hierarchy, to_newick};
use hmc_core::rng::rng_from;
use hmc_core::{CbdPlan, CbdScheme, CbdVariant, ClassifierSpec, Metric, Standardizer};

#[derive(Parser)]
#[command(
    name = "hmc",
    version,
    about = "Hierarchical multi-class classification benchmarks"
)]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = WORKERS_ENV, default_value_t = 0)]
    workers: usize,
    /// Suppress per-cell progress on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method of a config on every dataset and fold.
    Run { config: PathBuf },
    /// Compare every stored method with a baseline.
    Report {
        store: PathBuf,
        #[arg(long)]
        baseline: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Evaluate the CBD-complexity × base-complexity grid of a config.
    Sweep { config: PathBuf },
    /// Print a uniformly sampled hierarchy as Newick.
    SampleHierarchy {
        #[arg(long)]
        classes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a class dissimilarity matrix as CSV.
    Dissim {
        dataset: PathBuf,
        /// Label column name or 0-based index.
        #[arg(long, default_value = "-1")]
        label: String,
        #[arg(long)]
        no_header: bool,
        #[arg(long, value_enum)]
        method: DissimMethod,
        #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
        metric: MetricArg,
        #[arg(long, value_enum, default_value_t = VariantArg::AvaProxy)]
        variant: VariantArg,
        #[arg(long, value_enum, default_value_t = SchemeArg::SingleMulticlass)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value_t = KindArg::Cart)]
        classifier: KindArg,
        #[arg(long, default_value_t = 10)]
        mc_folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        standardize: bool,
        /// Fail instead of substituting 0.5 for class pairs without evidence.
        #[arg(long)]
        strict: bool,
    },
    /// Relative accuracy against the random hierarchy, by class count, across stores.
    Classcount {
        stores: Vec<PathBuf>,
        #[arg(long, default_value = "random")]
        random: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum DissimMethod {
    Rbd,
    Cbd,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Cosine,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    AvaProxy,
    ConfusionSubset,
    ConfusionRows,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    SingleMulticlass,
    Ova,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Cart,
    Logistic,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let causes: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            let line = serde_json::json!({ "error": causes[0], "causes": &causes[1..] });
            eprintln!("{}", line);
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let opts = RunOptions {
        workers: cli.workers,
        audit: None,
        quiet: cli.quiet,
    };
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let store = run_experiment(&cfg, &opts)?;
            writeln!(
                out,
                "{} records in {}",
                store.records().len(),
                store.dir().display()
            )?;
        }
        Command::Report {
            store,
            baseline,
            format,
        } => {
            let store = ResultStore::open(&store)?;
            let r = report(&store, &baseline)?;
            match format {
                Format::Text => write!(out, "{}", r.to_text())?,
                Format::Csv => write!(out, "{}", r.to_csv()?)?,
            }
        }
        Command::Sweep { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let (store, cells) = sweep_grid(&cfg, &opts)?;
            let csv = sweep_csv(&cells)?;
            std::fs::write(store.dir().join("sweep.csv"), &csv)?;
            write!(out, "{}", csv)?;
        }
        Command::SampleHierarchy { classes, seed } => {
            let h = sample_random_hierarchy(classes, &mut rng_from(seed))?;
            let names: Vec<String> = (0..classes).map(|c| c.to_string()).collect();
            writeln!(out, "{}", to_newick(&h, &names)?)?;
        }
        Command::Dissim {
            dataset,
            label,
            no_header,
            method,
            metric,
            variant,
            scheme,
            classifier,
            mc_folds,
            seed,
            standardize,
            strict,
        } => {
            let label = if label == "-1" {
                last_column(&dataset)?
            } else {
                LabelColumn::parse(&label)
            };
            let mut ds = load_csv(&dataset, &label, !no_header)?;
            if standardize {
                let z = Standardizer::fit(ds.features())?;
                ds = ds.with_features(z.transform(ds.features())?)?;
            }
            let d = match method {
                DissimMethod::Rbd => rbd_matrix(
                    &ds,
                    match metric {
                        MetricArg::Euclidean => Metric::Euclidean,
                        MetricArg::Cosine => Metric::Cosine,
                    },
                )?,
                DissimMethod::Cbd => {
                    let spec = match classifier {
                        KindArg::Cart => ClassifierSpec::cart(),
                        KindArg::Logistic => ClassifierSpec::logistic(),
                    };
                    let scheme = match scheme {
                        SchemeArg::SingleMulticlass => CbdScheme::SingleMulticlass,
                        SchemeArg::Ova => CbdScheme::Ova,
                    };
                    let variant = match variant {
                        VariantArg::AvaProxy => CbdVariant::AvaProxy,
                        VariantArg::ConfusionSubset => CbdVariant::ConfusionSubset,
                        VariantArg::ConfusionRows => CbdVariant::ConfusionRows,
                    };
                    let mut plan = CbdPlan::new(spec, scheme, variant);
                    plan.mc_folds = mc_folds;
                    if strict {
                        plan.no_evidence = NoEvidence::Error;
                    }
                    cbd_matrix(&ds, &plan, seed)?
                }
            };
            write_matrix_csv(&d, ds.class_names(), &mut out)?;
        }
        Command::Classcount { stores, random } => {
            let opened = stores
                .iter()
                .map(|p| ResultStore::open(p))
                .collect::<Result<Vec<_>>>()?;
            let rows = classcount_summary(&opened.iter().collect::<Vec<_>>(), &random)?;
            write!(out, "{}", classcount_csv(&rows)?)?;
        }
    }
    Ok(())
}

/// Index of the last column, read from the first line.
fn last_column(path: &std::path::Path) -> Result<LabelColumn> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let first = rdr.records().next().context("empty file")??;
    Ok(LabelColumn::Index(first.len().saturating_sub(1)))
}
