//! File schemas and input resolution: designs, distributions, counts.

use std::path::Path;

use bdrr_core::{catalog_lookup, parse_rat, CountVector, Distribution, Rat, SetSystem};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Design file schema: `{"name": optional, "points": v, "blocks": [[...]]}`,
/// 0-based point indices.
#[derive(Debug, Serialize, Deserialize)]
pub struct DesignFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub points: usize,
    pub blocks: Vec<Vec<usize>>,
}

/// Counts file schema: `{"t": total, "f": [per-output counts]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct CountsFile {
    pub t: u64,
    pub f: Vec<u64>,
}

/// A design argument is a catalog name first, a file path second.
pub fn resolve_design(source: &str) -> Result<(String, SetSystem), CliError> {
    if let Ok(system) = catalog_lookup(source) {
        return Ok((source.to_string(), system));
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(CliError::user(format!(
            "`{source}` is neither a catalog name nor an existing file"
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::user(format!("cannot read {source}: {e}")))?;
    let file: DesignFile = serde_json::from_str(&text)
        .map_err(|e| CliError::user(format!("bad design JSON in {source}: {e}")))?;
    let system = SetSystem::new(file.points, file.blocks)?;
    let name = file.name.unwrap_or_else(|| {
        path.file_stem()
            .map_or_else(|| source.into(), |s| s.to_string_lossy().into_owned())
    });
    Ok((name, system))
}

/// `uniform`, a JSON file of rational strings, or an inline comma list.
pub fn resolve_distribution(spec: &str, n: usize) -> Result<Distribution, CliError> {
    if spec == "uniform" {
        return Ok(Distribution::uniform(n));
    }
    let probs: Vec<Rat> = if Path::new(spec).exists() {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| CliError::user(format!("cannot read {spec}: {e}")))?;
        let strings: Vec<String> = serde_json::from_str(&text)
            .map_err(|e| CliError::user(format!("bad distribution JSON in {spec}: {e}")))?;
        strings
            .iter()
            .map(|s| parse_rat(s))
            .collect::<Result<_, _>>()?
    } else {
        spec.split(',').map(parse_rat).collect::<Result<_, _>>()?
    };
    if probs.len() != n {
        return Err(CliError::user(format!(
            "distribution has {} entries, design has {n} points",
            probs.len()
        )));
    }
    Ok(Distribution::new(probs)?)
}

pub fn read_counts(path: &str) -> Result<CountVector, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::user(format!("cannot read {path}: {e}")))?;
    let file: CountsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::user(format!("bad counts JSON in {path}: {e}")))?;
    Ok(CountVector::new(file.f, file.t)?)
}

/// Writes to `--out` or stdout, with a trailing newline.
pub fn emit(out: Option<&str>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, format!("{body}\n"))
            .map_err(|e| CliError::user(format!("cannot write {path}: {e}"))),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}
