//! `--config` files: one `key = value` per line, `#` comments. Keys are
//! long flag names (underscores allowed). A value is used only when the
//! flag is absent from the command line and the subcommand accepts it.

use std::ffi::OsString;

use clap::CommandFactory;

use crate::Cli;

pub fn merge_config(raw: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let strings: Vec<String> = raw
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let Some(path) = config_path(&strings) else {
        return Ok(raw);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
    let entries = parse(&text).map_err(|e| format!("{path}: {e}"))?;

    let cmd = Cli::command();
    let sub = strings
        .iter()
        .skip(1)
        .find_map(|a| cmd.get_subcommands().find(|s| s.get_name() == a));
    let accepts =
        |c: &clap::Command, key: &str| c.get_arguments().any(|a| a.get_long() == Some(key));
    let known_anywhere =
        |key: &str| accepts(&cmd, key) || cmd.get_subcommands().any(|s| accepts(s, key));

    let mut out = raw;
    for (key, value) in entries {
        if !known_anywhere(&key) {
            return Err(format!("{path}: unknown option {key:?}"));
        }
        let applies = accepts(&cmd, &key) || sub.is_some_and(|s| accepts(s, &key));
        let flag = format!("--{key}");
        let given = strings
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if applies && !given && key != "config" {
            out.push(flag.into());
            out.push(value.into());
        }
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines() {
        let e = parse("# c\nrelax = 0.95\n\ntop_k=3\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("relax".into(), "0.95".into()),
                ("top-k".into(), "3".into())
            ]
        );
        assert!(parse("oops").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        std::fs::write(&path, "relax=0.95\nseed=4\ntop_k=3\n").unwrap();
        let raw: Vec<OsString> = [
            "poem",
            "evaluate",
            "--library",
            "x",
            "--seed",
            "9",
            "--config",
        ]
        .iter()
        .map(OsString::from)
        .chain([path.clone().into_os_string()])
        .collect();
        let merged: Vec<String> = merge_config(raw)
            .unwrap()
            .into_iter()
            .map(|a| a.into_string().unwrap())
            .collect();
        assert!(merged.windows(2).any(|w| w == ["--relax", "0.95"]));
        assert!(!merged.windows(2).any(|w| w == ["--seed", "4"]));
        // top-k belongs to explain only.
        assert!(!merged.iter().any(|a| a == "--top-k"));
    }
}
