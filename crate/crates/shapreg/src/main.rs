use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use shapreg::cli::{self, Mode, RunConfig};
use shapreg::data_io::ReportFormat;

const FORMATS_HELP: &str = "\
INPUT FORMATS (UTF-8 CSV, header row required):

  Payoff CSV (game mode):
    two columns: semicolon-separated partner names and the payoff.
    An empty partner field or the literal NA marks the baseline row.
    Every non-empty subset of partners must appear exactly once.
        partners,sales
        NA,1000
        Disney,10000
        Disney;ESPN,12000
        ...

  Dataset CSV (regress mode):
    first column: period label (opaque), last column: outcome,
    every column in between: one partner's regressor series.
    Blank cells read as 0.
        Week,Partner A,Partner B,TV Sales
        2020-06-01,1.713,-0.677,0.520
        ...

  Spend CSV (--spend):
    partner,spend rows; partners without a row spend 0.

Reports are JSON by default; --format csv writes one file per table
section next to the output path (<stem>.<section>.csv).";

#[derive(Parser)]
#[command(
    name = "shapreg",
    version,
    about = "Shapley attribution for cooperative games and partner-level regression",
    after_long_help = FORMATS_HELP
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum FormatArg {
    #[default]
    Json,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact Shapley attribution from a coalition payoff table
    Game {
        /// Payoff CSV path (see --help for the format)
        #[arg(long)]
        payoffs: PathBuf,
        /// Scale shares up to this channel total (e.g. national dollars)
        #[arg(long)]
        channel_total: Option<f64>,
        /// Write a machine report here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
        /// Suppress timestamps for byte-identical reruns
        #[arg(long)]
        deterministic: bool,
        /// Refuse inputs with more partners than this (hard cap 25)
        #[arg(long)]
        max_partners: Option<usize>,
    },
    /// Shapley value regression over a partner time series
    Regress {
        /// Dataset CSV path (see --help for the format)
        #[arg(long)]
        data: PathBuf,
        /// Write a machine report here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
        /// Include the full 2^n coalition R² table in the report
        #[arg(long)]
        emit_r2_table: bool,
        /// Write the fitted/contribution series CSV here
        #[arg(long)]
        emit_fitted: Option<PathBuf>,
        /// Per-partner spend CSV for cost-per-outcome
        #[arg(long)]
        spend: Option<PathBuf>,
        /// Suppress timestamps for byte-identical reruns
        #[arg(long)]
        deterministic: bool,
        /// Refuse inputs with more partners than this (hard cap 25)
        #[arg(long)]
        max_partners: Option<usize>,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match args.command {
        Command::Game {
            payoffs,
            channel_total,
            out,
            format,
            deterministic,
            max_partners,
        } => RunConfig {
            mode: Mode::Game,
            input: payoffs,
            output: out,
            output_format: format.into(),
            emit_r2_table: false,
            emit_fitted: None,
            spend: None,
            channel_total,
            deterministic,
            max_partners,
        },
        Command::Regress {
            data,
            out,
            format,
            emit_r2_table,
            emit_fitted,
            spend,
            deterministic,
            max_partners,
        } => RunConfig {
            mode: Mode::Regress,
            input: data,
            output: out,
            output_format: format.into(),
            emit_r2_table,
            emit_fitted,
            spend,
            channel_total: None,
            deterministic,
            max_partners,
        },
    };
    ExitCode::from(cli::run(&config) as u8)
}
