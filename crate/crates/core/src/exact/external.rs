use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

use super::milp::{LinearProgram, VarKey};
use super::ExactError;

/// Parses `name value` lines. Blank lines and lines starting with `#` are
/// skipped.
pub fn parse_value_file(text: &str) -> Result<HashMap<String, f64>, ExactError> {
    let mut out = HashMap::new();
    for (k, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let mut parts = l.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ExactError::ValueFile { line: k + 1, reason: "expected `name value`".into() });
        };
        let value: f64 = value
            .parse()
            .map_err(|_| ExactError::ValueFile { line: k + 1, reason: format!("`{value}` is not a number") })?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

/// Dense value vector for `lp`; variables absent from `values` are zero.
/// Names that are not variables of `lp` are rejected.
pub fn values_for(lp: &LinearProgram, values: &HashMap<String, f64>) -> Result<Vec<f64>, ExactError> {
    let mut x = vec![0.0; lp.variables.len()];
    for (name, &value) in values {
        let v = VarKey::parse(name)
            .and_then(|key| lp.var(key))
            .ok_or_else(|| ExactError::Mapping(format!("unknown variable `{name}`")))?;
        x[v] = value;
    }
    Ok(x)
}

/// Runs an external MILP solver through the shell. `{lp}` and `{sol}` in
/// `command` are replaced by the model and solution paths; the solver must
/// write `name value` lines to `{sol}`.
pub fn run_external_solver(
    command: &str,
    lp_text: &str,
    workdir: &Path,
    stem: &str,
) -> Result<HashMap<String, f64>, ExactError> {
    let lp_path = workdir.join(format!("{stem}.lp"));
    let sol_path = workdir.join(format!("{stem}.sol"));
    std::fs::write(&lp_path, lp_text)?;
    let _ = std::fs::remove_file(&sol_path);
    let cmd = command.replace("{lp}", &lp_path.to_string_lossy()).replace("{sol}", &sol_path.to_string_lossy());
    let status = Command::new("sh").arg("-c").arg(&cmd).status()?;
    if !status.success() {
        return Err(ExactError::Solver(format!("`{cmd}` exited with {status}")));
    }
    parse_value_file(&std::fs::read_to_string(&sol_path)?)
}
