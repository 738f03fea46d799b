//! `--config <file>` support.
//!
//! The file holds `key = value` lines whose keys are long flag names
//! without the leading dashes. Its entries are spliced into the argument
//! list right after the subcommand, so flags given on the command line
//! (which come later) take precedence.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::ConfigError;

/// Parses a config file into `--key=value` arguments. `true`/`false`
/// values become a bare `--key` or nothing, for switches.
pub fn config_args(path: &Path) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(ConfigError(format!("{}:{}: expected `key = value`", path.display(), ln + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.starts_with('-') || key == "config" {
            bail!(ConfigError(format!("{}:{}: invalid key {key:?}", path.display(), ln + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => out.push(format!("--{key}={value}").into()),
        }
    }
    Ok(out)
}

/// Removes every `--config <path>` / `--config=<path>` from `args` and
/// splices the referenced files' entries in right after the first
/// argument naming one of `subcommands`.
pub fn expand(args: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut files = Vec::new();
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            match iter.next() {
                Some(path) => files.push(path),
                None => bail!(ConfigError("--config needs a file path".into())),
            }
        } else if let Some(path) = text.strip_prefix("--config=") {
            files.push(path.into());
        } else {
            rest.push(arg);
        }
    }
    if files.is_empty() {
        return Ok(rest);
    }
    let mut injected = Vec::new();
    for f in &files {
        injected.extend(config_args(Path::new(f))?);
    }
    let split = rest
        .iter()
        .skip(1)
        .position(|a| subcommands.contains(&a.to_string_lossy().as_ref()))
        .map_or(rest.len(), |p| p + 2);
    let tail = rest.split_off(split);
    rest.extend(injected);
    rest.extend(tail);
    Ok(rest)
}
