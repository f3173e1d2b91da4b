use std::fs;
use std::io::Write;
use std::path::Path;

use amdahl_core::Error;
use tempfile::NamedTempFile;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            EXIT_NUMERICAL
        } else {
            EXIT_INPUT
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Adds `what` in front of a core error unless the message already names it.
pub fn context(what: &Path) -> impl FnOnce(Error) -> CliError + '_ {
    move |e| {
        let mut err = CliError::from(e);
        let shown = what.display().to_string();
        if !err.message.contains(&shown) {
            err.message = format!("{shown}: {}", err.message);
        }
        err
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// `name=value` flag values.
pub fn parse_pair(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(format!("missing name in {s:?}"));
    }
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("value {value:?} for {name:?} is not a number"))?;
    if !v.is_finite() {
        return Err(format!("value for {name:?} is not finite"));
    }
    Ok((name.to_string(), v))
}

/// Writes through a temporary file in the same directory, then renames, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::input(format!("{}: {e}", path.display()));
    let mut tmp = NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))
}
