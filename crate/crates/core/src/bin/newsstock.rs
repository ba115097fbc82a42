use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, ValueEnum};

use newsstock::config::RunConfig;
use newsstock::harness::ReportTable;
use newsstock::pipeline::{Pipeline, Stage, StageError};
use newsstock::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

/// Run the news sentiment / stock price pipeline described by a TOML config.
///
/// Without --stage every stage from ingest to report runs in order. With
/// --stage exactly one stage runs against the files already in the output
/// directory. Stages: ingest, prep, features, sentiment, dataset, train,
/// report, synth.
#[derive(Debug, Parser)]
#[command(name = "newsstock", version)]
struct Cli {
    /// TOML run configuration. Optional only for `--stage synth`.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Run a single stage.
    #[arg(long, value_name = "NAME")]
    stage: Option<String>,
    /// Format of the report printed to stdout.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

const USAGE_ERROR: u8 = 2;
const PIPELINE_ERROR: u8 = 1;

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}\n");
    eprintln!("{}", Cli::command().render_long_help());
    ExitCode::from(USAGE_ERROR)
}

fn print_table(table: &ReportTable, format: Format) {
    match format {
        Format::Text => print!("{}", table.render_text()),
        Format::Csv => print!("{}", table.render_csv()),
    }
}

fn pipeline_error(e: StageError) -> ExitCode {
    eprintln!("error: {e}");
    match e.error {
        Error::Config(_) => ExitCode::from(USAGE_ERROR),
        _ => ExitCode::from(PIPELINE_ERROR),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let stage = match cli.stage.as_deref().map(|s| (s, Stage::parse(s))) {
        None => None,
        Some((_, Some(st))) => Some(st),
        Some((name, None)) => {
            let known: Vec<&str> = Stage::ALL.iter().map(Stage::as_str).collect();
            return usage_error(&format!("unknown stage {name:?} (expected one of {})", known.join(", ")));
        }
    };

    let mut cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: invalid config {}:\n{e}", path.display());
                return ExitCode::from(USAGE_ERROR);
            }
        },
        None if stage == Some(Stage::Synth) => RunConfig::default(),
        None => return usage_error("--config is required"),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }

    let pipeline = Pipeline::new(cfg);
    match stage {
        None => match pipeline.run() {
            Ok(table) => print_table(&table, cli.format),
            Err(e) => return pipeline_error(e),
        },
        Some(st) => {
            if let Err(e) = pipeline.run_stage(st) {
                return pipeline_error(e);
            }
            if st == Stage::Report {
                match pipeline.load_table() {
                    Ok(table) => print_table(&table, cli.format),
                    Err(error) => return pipeline_error(StageError { stage: st, error }),
                }
            } else {
                println!("stage {st} done; output in {}", pipeline.out_dir().display());
            }
        }
    }
    ExitCode::SUCCESS
}
