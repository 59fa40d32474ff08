//! `key=value` configuration files, merged under the command line.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory};

use crate::args::Cli;
use crate::error::CliError;

/// Parses `key=value` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key=value",
                i + 1
            )));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!(
                "config line {}: invalid key",
                i + 1
            )));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Id of the flag `--key`, and whether it is a global flag.
fn arg_id(matches: &ArgMatches, key: &str) -> Option<(String, bool)> {
    let cmd = Cli::command();
    let sub = matches.subcommand_name()?;
    let sub_cmd = cmd.find_subcommand(sub)?;
    let global = cmd
        .get_arguments()
        .find(|a| a.get_long() == Some(key))
        .map(|a| (a.get_id().to_string(), true));
    let local = sub_cmd
        .get_arguments()
        .find(|a| a.get_long() == Some(key))
        .map(|a| (a.get_id().to_string(), false));
    global.or(local)
}

/// Appends config entries for every flag the command line left unset.
pub fn merge(args: Vec<OsString>, path: &Path) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse(&text)?;
    let matches = Cli::command()
        .try_get_matches_from(&args)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let Some((_, sub)) = matches.subcommand() else {
        return Ok(args);
    };
    let mut merged = args;
    for (key, value) in entries {
        let (id, global) = arg_id(&matches, &key).ok_or_else(|| {
            CliError::Usage(format!(
                "config key '{key}' is not a flag of this subcommand"
            ))
        })?;
        let explicit = matches!(sub.value_source(&id), Some(ValueSource::CommandLine))
            || (global && matches!(matches.value_source(&id), Some(ValueSource::CommandLine)));
        if !explicit {
            merged.push(format!("--{key}").into());
            merged.push(value.into());
        }
    }
    Ok(merged)
}
