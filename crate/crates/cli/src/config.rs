//! Flat key-value run configuration: `key = value` lines, `#` comments, and
//! `include <path>` directives resolved relative to the including file.
//! Entries become long flags, so a persisted config replays a run exactly;
//! flags given explicitly on the command line win over config entries.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

const MAX_INCLUDE_DEPTH: usize = 8;

pub fn load_config(path: &Path) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    read_into(path, 0, &mut out)?;
    Ok(out)
}

fn read_into(
    path: &Path,
    depth: usize,
    out: &mut Vec<(String, String)>,
) -> Result<(), String> {
    if depth > MAX_INCLUDE_DEPTH {
        return Err(format!("{}: include depth exceeds {MAX_INCLUDE_DEPTH}", path.display()));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("include ") {
            let inc = resolve_relative(path, rest.trim());
            read_into(&inc, depth + 1, out)?;
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            format!("{}:{}: expected `key = value` or `include path`", path.display(), i + 1)
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(format!("{}:{}: empty key or value", path.display(), i + 1));
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(())
}

fn resolve_relative(base: &Path, target: &str) -> PathBuf {
    let t = Path::new(target);
    if t.is_absolute() {
        t.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(t)
    }
}

/// Splices config-file entries into the raw argument list. A `--config path`
/// pair anywhere after the subcommand is replaced by the file's entries as
/// `--key value` flags, skipping keys already present on the command line.
pub fn expand_args(raw: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = raw.iter().position(|a| a == "--config") else {
        return Ok(raw);
    };
    if pos + 1 >= raw.len() {
        return Err("--config requires a path".into());
    }
    let path = PathBuf::from(&raw[pos + 1]);
    let entries = load_config(&path)?;

    let explicit: HashSet<&str> = raw
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .collect();
    let mut out: Vec<String> = raw[..pos].to_vec();
    for (key, value) in &entries {
        if !explicit.contains(key.as_str()) {
            out.push(format!("--{key}"));
            out.push(value.clone());
        }
    }
    out.extend_from_slice(&raw[pos + 2..]);
    Ok(out)
}
