use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use joint_blup::cli::{self, render, AnalysisConfig, OutputFormat, Table};
use joint_blup::{ErrorKind, Family, QuadratureSettings};

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(
    name = "joint-blup",
    version,
    about = "Linear estimation and joint prediction from Type-II censored samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print expected values and covariances of standardized order statistics.
    Moments(CommonArgs),
    /// Location and scale BLUEs from a censored sample.
    Estimate(CommonArgs),
    /// Marginal and joint BLUPs of future order statistics.
    Predict(CommonArgs),
    /// Determinant and trace efficiency of joint over marginal prediction.
    Efficiency(CommonArgs),
    /// Recompute a published table and compare it cell by cell.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Parent distribution: normal or exponential.
    #[arg(long, default_value = "normal")]
    family: String,
    /// Total sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Number of observed failures (defaults to the length of the input).
    #[arg(long)]
    r: Option<usize>,
    /// Target indices: `6,7;6,10;9` (pairs are predicted jointly).
    #[arg(long)]
    targets: Option<String>,
    /// CSV or JSON file with the observed failure times.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Directory for cached moment tables.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Treat the family as scale-only (no location parameter).
    #[arg(long)]
    scale_only: bool,
    #[arg(long, requires = "quad_nodes")]
    quad_panels: Option<usize>,
    #[arg(long, requires = "quad_panels")]
    quad_nodes: Option<usize>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    table: TableArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    Table1,
    Table2,
}

fn config_from(args: &CommonArgs) -> joint_blup::Result<AnalysisConfig> {
    let family: Family = args.family.parse()?;
    let n = match (args.n, &args.input) {
        (Some(n), _) => n,
        (None, Some(path)) if cli::InputFormat::from_path(path) == cli::InputFormat::Json => {
            cli::ingest(path, cli::InputFormat::Json, None)?.n()
        }
        _ => {
            return Err(joint_blup::Error::InvalidConfig(
                "the total sample size is required (--n)".into(),
            ))
        }
    };
    let mut config = AnalysisConfig::new(family, n);
    if args.scale_only {
        config.model = config.model.scale_only();
    }
    config.r = args.r;
    if let Some(spec) = &args.targets {
        config.targets = cli::parse_targets(spec)?;
    }
    config.input = args.input.clone();
    config.format = match args.format {
        FormatArg::Table => OutputFormat::Table,
        FormatArg::Json => OutputFormat::Json,
    };
    config.cache_dir = args.cache.clone();
    if let (Some(panels), Some(nodes)) = (args.quad_panels, args.quad_nodes) {
        let base = config.model.default_quadrature();
        config.quadrature = Some(QuadratureSettings {
            panels,
            nodes_per_panel: nodes,
            ..base
        });
    }
    Ok(config)
}

fn output<D: Serialize>(
    format: OutputFormat,
    doc: &D,
    table: impl FnOnce(&D) -> String,
) -> joint_blup::Result<()> {
    match format {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(doc)?),
        OutputFormat::Table => print!("{}", table(doc)),
    }
    Ok(())
}

fn run(cli: Cli) -> joint_blup::Result<u8> {
    match cli.command {
        Command::Moments(args) => {
            let config = config_from(&args)?;
            output(
                config.format,
                &cli::moments_document(&config)?,
                render::moments_table,
            )?;
        }
        Command::Estimate(args) => {
            let config = config_from(&args)?;
            output(
                config.format,
                &cli::estimate(&config)?,
                render::estimate_table,
            )?;
        }
        Command::Predict(args) => {
            let config = config_from(&args)?;
            output(
                config.format,
                &cli::run_analysis(&config)?,
                render::analysis_table,
            )?;
        }
        Command::Efficiency(args) => {
            let config = config_from(&args)?;
            output(
                config.format,
                &cli::efficiency_analysis(&config)?,
                render::efficiency_table,
            )?;
        }
        Command::Reproduce(args) => {
            let table = match args.table {
                TableArg::Table1 => Table::Table1,
                TableArg::Table2 => Table::Table2,
            };
            let report = cli::reproduce(table, args.cache.as_deref())?;
            let format = match args.format {
                FormatArg::Table => OutputFormat::Table,
                FormatArg::Json => OutputFormat::Json,
            };
            output(format, &report, render::reproduction_table)?;
            if !report.passed() {
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err.kind() {
                ErrorKind::Numerical => EXIT_NUMERICAL,
                ErrorKind::Validation | ErrorKind::Io => EXIT_VALIDATION,
            })
        }
    }
}
