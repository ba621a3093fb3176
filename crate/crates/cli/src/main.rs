use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod error;
mod figures;
mod point;
mod range;
mod statefile;
mod sweep;
mod table;

use error::CliResult;
use figures::{FigureId, FigureOptions};
use point::{StateArgs, SUMMARY_COLUMNS};
use statefile::StateFile;
use table::{Cell, Format, Table};

/// Hilbert–Schmidt non-Gaussianity of bosonic states.
#[derive(Debug, Parser)]
#[command(name = "nongauss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// δ of one catalog state or state file, optionally after a channel.
    Compute {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Write a catalog state (after any channel) as a state file.
    Export {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table behind one of the figures.
    Figure {
        #[arg(value_enum)]
        id: FigureId,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random states per dimension (f2).
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// δ over the cartesian product of parameter ranges (start:stop:step, a,b,c or a value).
    Sweep {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn compute(args: &StateArgs, format: Format) -> CliResult<()> {
    let plan = args.plan()?;
    let pt = plan.single()?;
    let rec = plan.evaluate(&pt)?;
    match format {
        Format::Json => {
            let mut v = rec.to_json(&plan.family_name());
            v["modes"] = rec.cutoffs.len().into();
            table::emit_text(&table::pretty(&v), None)
        }
        Format::Csv => {
            let mut columns: Vec<&str> = pt.values.keys().map(|p| p.name()).collect();
            columns.extend(SUMMARY_COLUMNS);
            let mut t = Table::new("compute", &columns);
            let mut row: Vec<Cell> = pt.values.values().map(|&v| v.into()).collect();
            row.extend(rec.summary_cells());
            t.push(row);
            table::emit(&[t], Format::Csv, None)
        }
    }
}

fn export(args: &StateArgs, out: Option<&std::path::Path>) -> CliResult<()> {
    let plan = args.plan()?;
    let pt = plan.single()?;
    let (state, _) = plan.state(&pt)?;
    let file = StateFile::from_state(&state, Some(plan.metadata(&pt)));
    table::emit_text(&file.to_json(), out)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Compute { state, format } => compute(&state, format),
        Command::Export { state, out } => export(&state, out.as_deref()),
        Command::Figure { id, seed, samples, parallelism, out, format } => {
            let tables = figures::figure(id, &FigureOptions { seed, samples, threads: parallelism })?;
            table::emit(&tables, format, out.as_deref())
        }
        Command::Sweep { state, parallelism, out, format } => {
            let plan = state.plan()?;
            let t = sweep::sweep(&plan, parallelism)?;
            table::emit(&[t], format, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
