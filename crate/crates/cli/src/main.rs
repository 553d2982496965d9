mod args;
mod compare;
mod output;
mod run;
mod table;

use std::process::ExitCode;

use clap::Parser;
use serde::{Deserialize, Serialize};

use args::{Cli, Command, Format, Method, RunArgs};
use run::Record;
use slet_core::{Error, Result};

const DIVERGENCE_EXIT: u8 = 5;

#[derive(Debug, Serialize, Deserialize)]
struct SolveReport {
    records: Vec<Record>,
}

fn solve(args: RunArgs, force_breakdown: bool) -> Result<Option<i32>> {
    let mut m = args.into_manifest(Method::Slet)?;
    m.breakdown |= force_breakdown;
    if m.breakdown && m.method == Method::Oracle {
        return Err(Error::InvalidInput("--breakdown needs the slet method".into()));
    }
    let records = run::run_solve(&m);
    let text = match m.format {
        Format::Csv => output::records_csv(&records)?,
        Format::Json => output::to_json(&SolveReport {
            records: records.clone(),
        })?,
        Format::Text => output::records_text(&records),
    };
    output::emit(&text, m.out.as_deref())?;
    Ok(run::first_failure(&records))
}

fn compare(args: RunArgs) -> Result<Option<i32>> {
    let m = args.into_manifest(Method::Both)?;
    let (report, records) = compare::run_compare(&m)?;
    output::emit(&compare::render(&report, m.format)?, m.out.as_deref())?;
    Ok(run::first_failure(&records))
}

fn table(args: args::TableArgs) -> Result<Option<i32>> {
    let report = table::run_table(args.table)?;
    output::emit(&table::render(&report, args.format)?, args.out.as_deref())?;
    Ok(table::divergence_error(&report).map(|e| {
        eprintln!("error: {e}");
        i32::from(DIVERGENCE_EXIT)
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a, false),
        Command::Breakdown(a) => solve(a, true),
        Command::Compare(a) => compare(a),
        Command::Table(a) => table(a),
    };
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(code)) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(run::exit_code(e.kind()) as u8)
        }
    }
}
