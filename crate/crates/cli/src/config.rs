//! Flat `key = value` experiment configs with `#` comments.
//!
//! Unknown keys are rejected and every required key must be present, so a
//! config either maps cleanly onto an [`ExperimentSpec`] or fails before any
//! computation starts.

use std::collections::BTreeMap;
use std::path::PathBuf;

use orka_core::experiments::{ExperimentKind, ExperimentSpec};
use orka_core::feasibility::{Method, SolverConfig};

use crate::CliError;

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "n_rows",
    "dim",
    "rank_or_sparsity",
    "m_list",
    "trials",
    "method",
    "lambda",
    "gamma",
    "block_k",
    "max_iters",
    "tol",
    "seed",
    "adaptive",
    "adaptive_delta",
    "adaptive_max_outer",
    "output",
];

const REQUIRED_KEYS: &[&str] = &[
    "kind",
    "n_rows",
    "dim",
    "rank_or_sparsity",
    "m_list",
    "trials",
    "method",
    "max_iters",
    "tol",
    "seed",
    "adaptive",
    "output",
];

/// A parsed experiment config: the grid to run plus the output path.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: ExperimentSpec,
    pub output: PathBuf,
}

fn parse_value<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<T, CliError> {
    let raw = map
        .get(key)
        .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))?;
    raw.parse()
        .map_err(|_| CliError::Config(format!("invalid value for key `{key}`: '{raw}'")))
}

fn parse_optional<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("invalid value for key `{key}`: '{raw}'"))),
    }
}

/// Parse a config file's text into a [`RunConfig`].
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut map = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!(
                "line {}: expected `key = value`, got '{raw_line}'",
                idx + 1
            ))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(CliError::Config(format!("duplicate key `{key}`")));
        }
    }
    for key in REQUIRED_KEYS {
        if !map.contains_key(*key) {
            return Err(CliError::Config(format!("missing required key `{key}`")));
        }
    }

    let kind_raw: String = parse_value(&map, "kind")?;
    let kind = ExperimentKind::parse(&kind_raw)
        .ok_or_else(|| CliError::Config(format!("invalid value for key `kind`: '{kind_raw}'")))?;
    let method_raw: String = parse_value(&map, "method")?;
    let method = Method::parse(&method_raw).ok_or_else(|| {
        CliError::Config(format!("invalid value for key `method`: '{method_raw}'"))
    })?;

    let m_list_raw: String = parse_value(&map, "m_list")?;
    let m_list: Vec<usize> = m_list_raw
        .split(',')
        .map(|tok| tok.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("invalid value for key `m_list`: '{m_list_raw}'")))?;

    let mut solver = SolverConfig::new(method);
    solver.max_iters = parse_value(&map, "max_iters")?;
    solver.tol = parse_value(&map, "tol")?;
    if let Some(lambda) = parse_optional(&map, "lambda")? {
        solver.lambda = lambda;
    }
    solver.gamma = parse_optional(&map, "gamma")?;
    solver.block_k = parse_optional(&map, "block_k")?;

    let mut spec = ExperimentSpec::new(
        kind,
        parse_value(&map, "n_rows")?,
        parse_value(&map, "dim")?,
        solver,
    );
    spec.rank_or_sparsity = parse_value(&map, "rank_or_sparsity")?;
    spec.m_list = m_list;
    spec.trials = parse_value(&map, "trials")?;
    spec.seed = parse_value(&map, "seed")?;
    spec.adaptive = parse_value(&map, "adaptive")?;
    if let Some(delta) = parse_optional(&map, "adaptive_delta")? {
        spec.adaptive_delta = delta;
    }
    if let Some(outer) = parse_optional(&map, "adaptive_max_outer")? {
        spec.adaptive_max_outer = outer;
    }
    spec.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let output: String = parse_value(&map, "output")?;
    Ok(RunConfig {
        spec,
        output: PathBuf::from(output),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> String {
        "\
# reference low-rank grid
kind = lowrank
n_rows = 200
dim = 25
rank_or_sparsity = 1
m_list = 10, 20, 30
trials = 15
method = blockskm
max_iters = 2000
tol = 1e-9
seed = 7
adaptive = false
output = out.csv
"
        .to_string()
    }

    #[test]
    fn parses_reference_config() {
        let cfg = parse_config(&base_config()).unwrap();
        assert_eq!(cfg.spec.m_list, vec![10, 20, 30]);
        assert_eq!(cfg.spec.trials, 15);
        assert_eq!(cfg.spec.solver.method.name(), "blockskm");
        assert_eq!(cfg.output, PathBuf::from("out.csv"));
    }

    #[test]
    fn missing_required_key_names_it() {
        let text = base_config().replace("trials = 15\n", "");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("`trials`"), "message: {err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = base_config() + "mystery = 1\n";
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("`mystery`"));
    }

    #[test]
    fn invalid_value_names_key() {
        let text = base_config().replace("trials = 15", "trials = many");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("`trials`"));
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let text = base_config() + "trials = 3\n";
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }
}
