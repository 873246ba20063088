//! `glt`: dataset conversion, ticket runs, sparsity sweeps, spectral and
//! degree reports, and MACs accounting.
//!
//! Exit codes: 0 success, 1 invalid input or config, 2 runtime failure.

mod commands;
mod config;
mod convert;
mod error;
mod metrics;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{AnalyzeArgs, AnalyzeMode};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "glt", version, about = "Degree-based graph lottery tickets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceFormat {
    /// `<name>.content` + `<name>.cites` text files.
    Linqs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a public citation-network distribution into a dataset directory.
    Convert {
        #[arg(long, value_enum, default_value = "linqs")]
        format: SourceFormat,
        /// Directory holding the source files.
        #[arg(long)]
        input: PathBuf,
        /// Dataset directory to write.
        #[arg(long)]
        output: PathBuf,
        /// Dataset stem when the input holds several (e.g. `cora`).
        #[arg(long)]
        name: Option<String>,
        /// Seed of the 20-per-class / 500 / 1000 split.
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
    },
    /// Train one ticket: pretrain, score edges once, prune, sparse-train.
    Run {
        /// TOML run config.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Ticket bundle directory to write.
        #[arg(long)]
        out: PathBuf,
        /// Metrics CSV to append a row to.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Run scorers x simulation grid x seeds and write a metrics CSV.
    /// Parallel width comes from GLT_THREADS.
    Sweep {
        /// TOML sweep file.
        #[arg(long)]
        spec: PathBuf,
        /// Metrics CSV to write (overwritten).
        #[arg(long)]
        out: PathBuf,
        /// Use this dataset instead of the one named in the sweep file.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Also write one ticket bundle per run under this directory.
        #[arg(long)]
        bundles: Option<PathBuf>,
    },
    /// Spectral, degree and score reports as TSV.
    Analyze {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        mode: AnalyzeMode,
        /// TSV report path (required except for energy mode).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scorer for degree-report and scores modes.
        #[arg(long, default_value = "teddy")]
        scorer: String,
        /// Delta mode: evaluate this many sampled edges instead of all.
        #[arg(long)]
        sample: Option<usize>,
        /// Seed for edge sampling and the random scorer.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest graph the dense eigensolver accepts.
        #[arg(long, default_value_t = glt_core::spectral::DEFAULT_SPECTRAL_BUDGET)]
        budget: usize,
        /// Degree-report p_g values, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
        )]
        grid: Vec<f64>,
    },
    /// Inference multiply-accumulates of a ticket bundle or the dense model.
    Macs {
        #[arg(long)]
        dataset: PathBuf,
        /// Ticket bundle; without it the dense model is counted.
        #[arg(long)]
        bundle: Option<PathBuf>,
        /// Hidden width of the dense model.
        #[arg(long, default_value_t = 128)]
        hidden: usize,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Convert {
            format: SourceFormat::Linqs,
            input,
            output,
            name,
            split_seed,
        } => {
            let s = convert::convert_linqs(&input, &output, name.as_deref(), split_seed)?;
            println!("{s}");
            eprintln!(
                "dropped {} self-citations, {} repeated or reciprocal citations, {} citations to unknown ids",
                s.self_citations, s.repeated_citations, s.dangling_citations
            );
        }
        Command::Run {
            config,
            dataset,
            out,
            metrics,
        } => {
            let row = commands::run(&config, &dataset, &out, metrics.as_deref())?;
            println!(
                "scorer={} p_g={} p_theta={} seed={} val_acc={:.4} test_acc={:.4} macs={}",
                row.scorer,
                row.p_g,
                row.p_theta,
                row.seed,
                row.val_acc.unwrap_or(f64::NAN),
                row.test_acc.unwrap_or(f64::NAN),
                row.inference_macs.unwrap_or(0)
            );
        }
        Command::Sweep {
            spec,
            out,
            dataset,
            bundles,
        } => {
            let rows = commands::sweep(&spec, dataset.as_deref(), &out, bundles.as_deref())?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            println!("runs={} failed={failed} csv={}", rows.len(), out.display());
        }
        Command::Analyze {
            dataset,
            mode,
            out,
            scorer,
            sample,
            seed,
            budget,
            grid,
        } => {
            let summary = commands::analyze(&AnalyzeArgs {
                dataset: &dataset,
                mode,
                out: out.as_deref(),
                scorer: &scorer,
                sample,
                seed,
                budget,
                grid: &grid,
            })?;
            println!("{summary}");
        }
        Command::Macs {
            dataset,
            bundle,
            hidden,
        } => {
            let m = commands::macs(&dataset, bundle.as_deref(), hidden)?;
            println!(
                "aggregation={} transform={} total={}",
                m.aggregation, m.transform, m.total
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
