//! `hweyl`: command-line access to the heisenberg-weyl computations.
//!
//! Exit status is 0 on success, 2 for invalid input and 3 for resource or
//! I/O failures. Without `--output`, reports go to standard output, or to
//! `$HWEYL_OUTPUT_DIR/<subcommand>.<format>` when that variable is set.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use args::{Cli, Format};
use commands::Report;
use error::CliError;

const OUTPUT_DIR_VAR: &str = "HWEYL_OUTPUT_DIR";

/// Location of `--config`, found before full parsing so its entries can be merged.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

fn render(report: Report, cli: &Cli) -> Result<Vec<u8>, CliError> {
    match cli.format {
        Format::Json => {
            let mut fields = report.fields;
            let config = serde_json::to_value(cli).map_err(|e| CliError::Io(e.to_string()))?;
            fields.insert("config".into(), config);
            let mut out = serde_json::to_vec_pretty(&Value::Object(fields))
                .map_err(|e| CliError::Io(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(&report.header).map_err(io)?;
            for row in &report.rows {
                w.write_record(row).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn destination(cli: &Cli) -> Option<PathBuf> {
    cli.output.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_VAR)
            .filter(|d| !d.is_empty())
            .map(|d| {
                PathBuf::from(d).join(format!("{}.{}", cli.command.name(), cli.format.extension()))
            })
    })
}

fn execute(args: Vec<OsString>) -> Result<(), CliError> {
    let args = match config_path(&args) {
        Some(path) => config::merge(args, &path)?,
        None => args,
    };
    let mut cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            return Err(CliError::Usage(
                e.render().to_string().trim_end().to_string(),
            ))
        }
    };
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("cannot start thread pool: {e}")))?;
    }
    let report = commands::run(&mut cli.command)?;
    let bytes = render(report, &cli)?;
    match destination(&cli) {
        Some(path) => std::fs::write(&path, bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    match execute(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hweyl: {e}");
            e.exit_code()
        }
    }
}
