//! `key = value` config files merged into the argument list.
//!
//! Keys are long flag names without the dashes (`prior`, `n`, `seed`, ...).
//! Blank lines and lines starting with `#` are skipped. A key is only
//! applied when the same flag is absent from the command line, so flags
//! always win.

use std::collections::BTreeMap;
use std::fs;

use clap::{ArgAction, Command};

use crate::CliError;

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected key = value, got {raw:?}",
                i + 1
            ))
        })?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Path given by `--config PATH` or `--config=PATH`, if any.
fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn flag_present(args: &[String], long: &str) -> bool {
    let bare = format!("--{long}");
    let eq = format!("--{long}=");
    args.iter().any(|a| *a == bare || a.starts_with(&eq))
}

/// Returns `args` with config entries spliced in after the subcommand name.
pub fn merge(args: Vec<String>, cmd: &Command) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let entries = parse(&text)?;

    let Some(pos) = args.iter().position(|a| cmd.find_subcommand(a).is_some()) else {
        return Ok(args);
    };
    let sub = cmd.find_subcommand(&args[pos]).expect("matched above");
    let known_anywhere = |key: &str| {
        cmd.get_arguments().any(|a| a.get_long() == Some(key))
            || cmd
                .get_subcommands()
                .any(|s| s.get_arguments().any(|a| a.get_long() == Some(key)))
    };

    let mut extra = Vec::new();
    for (key, value) in &entries {
        if key == "config" {
            continue;
        }
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()));
        let Some(arg) = arg else {
            if known_anywhere(key) {
                // Shared config files carry keys for other subcommands.
                continue;
            }
            return Err(CliError::Usage(format!(
                "unknown config key {key:?} in {path}"
            )));
        };
        if flag_present(&args, key) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "1" | "yes" => extra.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                other => {
                    return Err(CliError::Usage(format!(
                        "config key {key}: expected a boolean, got {other:?}"
                    )))
                }
            },
            _ => extra.push(format!("--{key}={value}")),
        }
    }
    let mut merged = args;
    let tail = merged.split_off(pos + 1);
    merged.extend(extra);
    merged.extend(tail);
    Ok(merged)
}
