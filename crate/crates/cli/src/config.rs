//! Flat `key = value` config files.
//!
//! Keys are long flag names of the chosen subcommand (or the global flags);
//! `-` and `_` are interchangeable. Blank lines and `#` comments are
//! ignored. Flags given on the command line win over the file.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

use crate::error::CliError;

pub fn parse_file(path: &Path) -> Result<Vec<(usize, String, String)>, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse_text(&text, &path.display().to_string())
}

pub fn parse_text(text: &str, path: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config {
            path: path.to_string(),
            line: idx + 1,
            message: "expected key = value".into(),
        })?;
        out.push((idx + 1, k.trim().replace('_', "-"), unquote(v.trim()).to_string()));
    }
    Ok(out)
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v)
}

/// The deepest subcommand's matches and definition, plus its name path.
pub fn leaf<'a>(mut m: &'a ArgMatches, mut cmd: &'a Command) -> (&'a ArgMatches, &'a Command, Vec<String>) {
    let mut path = Vec::new();
    while let Some((name, sub)) = m.subcommand() {
        path.push(name.to_string());
        cmd = cmd.find_subcommand(name).expect("matched subcommand exists");
        m = sub;
    }
    (m, cmd, path)
}

/// Extra `--key=value` arguments for config entries not set on the command
/// line.
pub fn extra_args(
    entries: &[(usize, String, String)],
    path: &str,
    root: &Command,
    leaf_cmd: &Command,
    leaf_m: &ArgMatches,
) -> Result<Vec<OsString>, CliError> {
    let mut extra = Vec::new();
    for (line, key, value) in entries {
        let err = |message: String| CliError::Config {
            path: path.to_string(),
            line: *line,
            message,
        };
        let arg = leaf_cmd
            .get_arguments()
            .chain(root.get_arguments().filter(|a| a.is_global_set()))
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| err(format!("unknown key {key:?}")))?;
        if key == "config" {
            return Err(err("config files do not nest".into()));
        }
        if leaf_m.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(OsString::from(format!("--{key}={value}")));
        } else {
            match value.as_str() {
                "true" => extra.push(OsString::from(format!("--{key}"))),
                "false" => {}
                other => return Err(err(format!("expected true or false for {key}, got {other:?}"))),
            }
        }
    }
    Ok(extra)
}
