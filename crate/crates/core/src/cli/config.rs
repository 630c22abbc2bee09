//! `key = value` config files, merged into the command line.
//!
//! Keys are long flag names (`gap-penalty` or `gap_penalty`). The file's
//! values are inserted right after the subcommand and any global flags the
//! user gave before the subcommand are moved to the end, so with every flag
//! overriding itself the command line always wins.

use std::ffi::{OsStr, OsString};
use std::path::PathBuf;

use clap::Command;

use super::files::read_lines;
use crate::error::{Error, Result};

/// `(key, value)` pairs in file order.
pub fn parse_config(text: &[String], origin: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (k, line) in text.iter().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::format(origin, k + 1, "expected key = value"))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::format(origin, k + 1, "empty key"));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn long_takes_value(cmd: &Command, long: &str) -> Option<bool> {
    cmd.get_arguments()
        .find(|a| a.get_long() == Some(long))
        .map(|a| a.get_action().takes_values())
}

/// Index of the subcommand in `argv`, skipping global flags and their values.
fn subcommand_index(argv: &[OsString], cmd: &Command) -> Option<usize> {
    let mut k = 1;
    while k < argv.len() {
        let a = argv[k].to_string_lossy();
        if a == "--" {
            return None;
        }
        if let Some(long) = a.strip_prefix("--") {
            if !long.contains('=') && long_takes_value(cmd, long) == Some(true) {
                k += 1;
            }
        } else if !a.starts_with('-') {
            return Some(k);
        }
        k += 1;
    }
    None
}

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut found = None;
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(v) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(v));
        }
    }
    found
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::InvalidArgument(format!(
            "config key {key}: expected a boolean, got {value:?}"
        ))),
    }
}

/// Rewrite `argv` with the settings of the `--config` file, if there is one.
pub fn merge_config_file(argv: Vec<OsString>, cmd: &Command) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let Some(at) = subcommand_index(&argv, cmd) else {
        return Ok(argv);
    };
    let name = argv[at].to_string_lossy().into_owned();
    let Some(sub) = cmd.find_subcommand(&name) else {
        return Ok(argv);
    };
    let entries = parse_config(&read_lines(&path)?, &path.display().to_string())?;

    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err(Error::InvalidArgument(
                "config files cannot include other config files".into(),
            ));
        }
        let takes = long_takes_value(sub, &key).or_else(|| long_takes_value(cmd, &key));
        match takes {
            Some(true) => injected.push(format!("--{key}={value}").into()),
            Some(false) => {
                if parse_bool(&key, &value)? {
                    injected.push(format!("--{key}").into());
                }
            }
            None => {
                let elsewhere = cmd.get_subcommands().any(|s| long_takes_value(s, &key).is_some());
                if !elsewhere {
                    return Err(Error::InvalidArgument(format!(
                        "unknown config key {key:?} in {}",
                        path.display()
                    )));
                }
            }
        }
    }

    let mut out = Vec::with_capacity(argv.len() + injected.len());
    out.push(argv[0].clone());
    out.push(argv[at].clone());
    out.extend(injected);
    out.extend(argv[at + 1..].iter().cloned());
    out.extend(argv[1..at].iter().cloned());
    Ok(out)
}

/// `config.<id>=<value>` for every argument clap resolved, defaults included.
pub fn resolved_config(cmd: &Command, matches: &clap::ArgMatches) -> String {
    let mut out = String::new();
    let mut seen: Vec<String> = Vec::new();
    let mut dump = |c: &Command, m: &clap::ArgMatches, out: &mut String| {
        for id in m.ids() {
            let id = id.as_str();
            let is_arg = c.get_arguments().any(|a| a.get_id() == id) || cmd.get_arguments().any(|a| a.get_id() == id);
            if !is_arg || seen.iter().any(|s| s == id) {
                continue;
            }
            seen.push(id.to_string());
            let Ok(Some(raw)) = m.try_get_raw(id) else {
                continue;
            };
            let values: Vec<String> = raw.map(|v: &OsStr| v.to_string_lossy().into_owned()).collect();
            out.push_str(&format!("config.{id}={}\n", values.join(",")));
        }
    };
    if let Some((name, sub)) = matches.subcommand() {
        out.push_str(&format!("config.command={name}\n"));
        if let Some(c) = cmd.find_subcommand(name) {
            dump(c, sub, &mut out);
        }
    }
    dump(cmd, matches, &mut out);
    out
}
