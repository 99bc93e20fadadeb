//! `key = value` config files. Each entry becomes `--key value` inserted
//! right after the subcommand name, so flags given on the command line
//! (which come later) override it.

use std::ffi::OsString;
use std::fs;

/// Parses config text into flag arguments. Blank lines and `#` comments
/// are skipped; `key = true` becomes a bare `--key`, `key = false` is
/// dropped.
pub fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim();
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: bad key {:?}", i + 1, k.trim()));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_string());
            }
        }
    }
    Ok(out)
}

/// Finds `--config <path>` (or `--config=<path>`) and splices the file's
/// entries in after the subcommand.
pub fn expand(mut argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = argv.get(i + 1).map(|p| p.to_string_lossy().into_owned());
            break;
        }
        if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.to_string());
            break;
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let extra = parse(&text)?;
    // Global flags before the subcommand all take a value.
    let mut idx = 1;
    while idx < argv.len() {
        let s = argv[idx].to_string_lossy();
        if !s.starts_with('-') {
            break;
        }
        idx += if s.contains('=') { 1 } else { 2 };
    }
    if idx >= argv.len() {
        return Ok(argv);
    }
    let tail = argv.split_off(idx + 1);
    argv.extend(extra.into_iter().map(OsString::from));
    argv.extend(tail);
    Ok(argv)
}
