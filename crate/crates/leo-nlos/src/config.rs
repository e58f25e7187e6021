//! `key=value` run configuration.
//!
//! Keys are long flag names. A config file is spliced into the command line
//! right after the subcommand, so explicit flags that follow override it.
//! Any CSV this tool writes is itself a valid config file: when `# config `
//! lines are present only those are read.

use std::ffi::OsString;
use std::path::Path;

use crate::CliError;

/// Keys that describe where a run reads and writes, not what it computes.
pub const IO_KEYS: [&str; 2] = ["config", "out"];

const EMBED_PREFIX: &str = "# config ";
const COMMAND_PREFIX: &str = "# command: ";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    /// Subcommand recorded in a CSV header, if any.
    pub command: Option<String>,
    pub pairs: Vec<(String, String)>,
}

pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    let embedded = text.lines().any(|l| l.starts_with(EMBED_PREFIX));
    let mut out = ConfigFile::default();
    for (i, line) in text.lines().enumerate() {
        if let Some(cmd) = line.strip_prefix(COMMAND_PREFIX) {
            out.command = Some(cmd.trim().to_string());
            continue;
        }
        let body = if embedded {
            match line.strip_prefix(EMBED_PREFIX) {
                Some(b) => b,
                None => continue,
            }
        } else {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            t
        };
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {} is not key=value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {} has an empty key", i + 1)));
        }
        if IO_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("`{key}` cannot be set from a config file")));
        }
        out.pairs.push((key, v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Flags equivalent to `pairs`. Booleans become bare switches.
pub fn to_args(pairs: &[(String, String)]) -> Vec<OsString> {
    let mut args = Vec::new();
    for (k, v) in pairs {
        match v.as_str() {
            "true" => args.push(format!("--{k}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{k}").into());
                args.push(v.into());
            }
        }
    }
    args
}

/// Expands `--config FILE` in place. Returns `argv` unchanged when there is
/// no subcommand or no config flag.
pub fn splice(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(sub) = argv.get(1).and_then(|s| s.to_str()).filter(|s| !s.starts_with('-')) else {
        return Ok(argv);
    };
    let mut path = None;
    let mut i = 2;
    while i < argv.len() {
        let a = argv[i].to_string_lossy();
        if a == "--config" {
            path = argv.get(i + 1).cloned();
            if path.is_none() {
                return Err(CliError::Usage("--config needs a file".into()));
            }
            i += 2;
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.into());
            i += 1;
        } else {
            i += 1;
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let cfg = read_config(Path::new(&path))?;
    if let Some(cmd) = &cfg.command {
        if cmd != sub {
            return Err(CliError::Usage(format!("config was written by `{cmd}`, not `{sub}`")));
        }
    }
    let mut out = argv[..2].to_vec();
    out.extend(to_args(&cfg.pairs));
    out.extend(argv[2..].iter().cloned());
    Ok(out)
}

/// Metadata lines recording a resolved configuration.
pub fn embed(command: &str, pairs: &[(String, String)]) -> Vec<String> {
    let mut lines = vec![format!("command: {command}")];
    lines.extend(pairs.iter().map(|(k, v)| format!("config {k}={v}")));
    lines
}
