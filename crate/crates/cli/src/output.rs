use std::fs;
use std::io::Write;
use std::path::Path;

use crate::{CliError, Command, RunConfig};

/// One output file. `name` is used inside the output directory for
/// multi-file commands and ignored otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub content: String,
}

/// What a command produced, and whether it failed after producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failure: Option<String>,
}

impl Outcome {
    pub fn single(name: &str, content: String) -> Self {
        Self { artifacts: vec![Artifact { name: name.to_string(), content }], failure: None }
    }
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_row(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Compute(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write(cfg: &RunConfig, outcome: &Outcome) -> Result<(), CliError> {
    if let Command::Figure { .. } = cfg.command {
        let dir = cfg.common.out.as_deref().unwrap_or(Path::new("."));
        fs::create_dir_all(dir)?;
        for a in &outcome.artifacts {
            let path = dir.join(&a.name);
            fs::write(&path, &a.content)?;
            eprintln!("wrote {}", path.display());
        }
        return Ok(());
    }
    let content: String = outcome.artifacts.iter().map(|a| a.content.as_str()).collect();
    match &cfg.common.out {
        Some(path) => {
            fs::write(path, content)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().lock().write_all(content.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-30.0), "-3.0000000000000000e1");
        let x = 5.342907124862649_f64;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }
}
