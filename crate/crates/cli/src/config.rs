//! `key = value` config files, applied as flags placed ahead of the ones
//! given on the command line so that explicit flags win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

/// Keys that are switches rather than valued flags.
const SWITCHES: &[&str] = &["report-only"];

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Syntax { line: usize, text: String },
}

/// Parses a config file into flag tokens. Blank lines and lines starting with
/// `#` are ignored; keys may use `_` or `-`.
pub fn parse(text: &str) -> Result<Vec<OsString>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() || key == "config" {
            return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
        }
        if SWITCHES.contains(&key.as_str()) {
            match value {
                "true" => out.push(format!("--{key}").into()),
                "false" => {}
                _ => return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() }),
            }
        } else {
            out.push(format!("--{key}").into());
            out.push(value.into());
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<OsString>, ConfigError> {
    parse(&fs::read_to_string(path).map_err(ConfigError::Io)?)
}

/// The value of `--config` in raw arguments, in either `--config p` or
/// `--config=p` form.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Inserts `extra` right after the subcommand name (the first argument after
/// the program name that is not an option).
pub fn splice(args: Vec<OsString>, extra: Vec<OsString>) -> Vec<OsString> {
    if extra.is_empty() {
        return args;
    }
    let pos = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 2);
    match pos {
        Some(p) => {
            let mut out = args[..p].to_vec();
            out.extend(extra);
            out.extend_from_slice(&args[p..]);
            out
        }
        None => args,
    }
}
